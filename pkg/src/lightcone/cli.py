"""Command-line pipeline: analyze | spectral | backlund | convergence | sweep.

Every subcommand reads one JSON config, runs the requested pipeline with
per-check error isolation, writes a JSON report, and exits 0 exactly when
every verdict is PASS.
"""

import argparse
import dataclasses
import os
import sys

import numpy as np

from . import chart as ch
from . import config as cf
from . import connection as cn
from . import dressing as dr
from . import export as ex
from . import gauge as gg
from . import isothermic as iso
from . import multiplier as mp
from . import oracle as orc
from . import report as rp
from . import surface as sf
from .errors import ConfigError, LightconeError


def _meta(cfg, s):
    return {
        "surface": cfg.surface_name,
        "params": cfg.surface_params,
        "nx": cfg.nx,
        "ny": cfg.ny,
        "h": s.grid.h,
        "rng_seed": cfg.rng_seed,
    }


def _export_surface(rep, cfg, s, tag):
    if not cfg.export_formats:
        return
    try:
        points = sf.euclidean_graph(s)
    except LightconeError as exc:
        rep.add_error(f"export.{tag}", exc, source="surface.spaceform_project")
        return
    for fmt in cfg.export_formats:
        path = os.path.join(cfg.export_dir, f"{cfg.surface_name}_{tag}.{fmt}")
        ex.export_points(fmt, path, points, s.grid)
        rep.add(f"export.{tag}.{fmt}", path, source="export")


def cmd_analyze(cfg):
    """Full static analysis: energy, residuals, multiplier, isothermic,
    flatness at the configured lambda samples."""
    s = cfg.surface()
    rep = rp.Report("analyze", meta=_meta(cfg, s))
    grid = s.grid
    h2 = grid.h ** 2
    mask = grid.interior_mask()
    tol = cfg.tolerances
    N = cn.second_form(s)

    try:
        energy = cn.willmore_energy(s, N)
        rep.add("energy.lightcone", energy, source="connection.willmore_energy")
        points, ambient = sf.zoo_euclidean_points(cfg.surface_name,
                                                  cfg.surface_params, grid)
        data = orc.invariants(points, ambient, grid)
        energy_oracle = orc.willmore_energy_classical(data, grid)
        rep.add("energy.oracle", energy_oracle, source="oracle")
        rel = abs(energy - energy_oracle) / abs(energy_oracle)
        rep.add("energy.cross_agreement", rel, threshold=max(5e-3, 2.0 * h2),
                source="both")
    except LightconeError as exc:
        rep.add_error("energy", exc, source="connection.willmore_energy")

    try:
        W = cn.willmore_residual(s, N)
        wmax = ch.masked_max(W, mask)
        rep.add("willmore.residual", wmax, threshold=tol["willmore_C"] * h2,
                source="connection.willmore_residual")
    except LightconeError as exc:
        rep.add_error("willmore.residual", exc, source="connection")

    try:
        g1 = ch.masked_max(cn.structure_gauss(s, N), mask)
        g2 = ch.masked_max(cn.structure_codazzi(s, N), mask)
        rep.add("structure.gauss", g1, source="connection.structure_gauss")
        rep.add("structure.codazzi", g2, source="connection.structure_codazzi")
    except LightconeError as exc:
        rep.add_error("structure", exc, source="connection")

    try:
        fit = mp.recover_multiplier(s, N)
        rep.add("multiplier.rel_residual", fit.rel_residual,
                threshold=tol["constrained_C"] * h2,
                source="multiplier.recover_multiplier",
                detail={"kernel_svals": list(fit.kernel_svals),
                        "sigma_max": fit.sigma_max})
    except LightconeError as exc:
        rep.add_error("multiplier", exc, source="multiplier")

    try:
        eta = iso.eta_solve(s, N)
        rep.add("isothermic.residual", eta.residual,
                threshold=tol["isothermic_C"] * h2, source="isothermic.eta_solve")
    except LightconeError as exc:
        rep.add_error("isothermic", exc, source="isothermic")

    for lam in cfg.lambda_samples:
        try:
            A = cn.family_connection(lam, N)
            fmax, _ = cn.flatness_defect(A, grid)
            thr = tol["flatness_C"] * h2 if s.flags.get("willmore") else None
            rep.add(f"flatness[{lam}]", fmax, threshold=thr,
                    source="connection.curvature")
        except LightconeError as exc:
            rep.add_error(f"flatness[{lam}]", exc, source="connection")

    _export_surface(rep, cfg, s, "input")
    return rep.finish()


def cmd_spectral(cfg):
    """Spectral deformation at the configured lambda plus re-analysis."""
    if cfg.spectral_lambda is None:
        raise ConfigError("spectral.lambda is required", field="spectral")
    lam = cfg.spectral_lambda
    s = cfg.surface()
    rep = rp.Report("spectral", meta={**_meta(cfg, s), "lambda": str(lam)})
    grid = s.grid
    h2 = grid.h ** 2
    tol = cfg.tolerances
    N = cn.second_form(s)
    deformed = gg.spectral_deform(s, lam, N=N)
    s2 = deformed.surface
    if lam == 1:
        rep.add("noop.bitwise", float(not np.array_equal(s2.sigma, s.sigma)),
                threshold=0.0, source="gauge.spectral_deform")
    rep.add("deformed.reality_defect", s2.reality_defect(),
            threshold=1e-7 if abs(abs(lam) - 1.0) < 1e-12 else None,
            source="gauge.spectral_deform")
    N2 = cn.second_form(s2)
    mask2 = s2.grid.interior_mask()
    wmax = ch.masked_max(cn.willmore_residual(s2, N2), mask2)
    thr = tol["willmore_C"] * h2 if s.flags.get("willmore") else None
    rep.add("deformed.willmore_residual", wmax, threshold=thr,
            source="connection.willmore_residual")
    rep.add("deformed.energy", cn.willmore_energy(s2, N2),
            source="connection.willmore_energy")
    _export_surface(rep, cfg, s2, f"spectral")
    return rep.finish()


def cmd_backlund(cfg):
    """Single Bäcklund step plus optional permutability/commutation checks."""
    if cfg.backlund is None:
        raise ConfigError("a backlund block is required", field="backlund")
    bk = cfg.backlund
    s = cfg.surface()
    rep = rp.Report("backlund", meta={**_meta(cfg, s),
                                      "alpha": str(bk.alpha),
                                      "beta": str(bk.beta),
                                      "reality_mode": bk.reality_mode})
    tol = cfg.tolerances
    params = dr.BacklundParams(alpha=bk.alpha, beta=bk.beta,
                               reality_mode=bk.reality_mode,
                               rng_seed=cfg.rng_seed)
    N = cn.second_form(s)
    try:
        res = dr.backlund(s, params, N=N, det_tol=tol["det_tol"])
    except LightconeError as exc:
        rep.add_error("backlund", exc, source="dressing.backlund")
        return rep.finish()
    rep.add("backlund.det_defect", res.det_defect, threshold=tol["det_tol"],
            source="dressing.backlund")
    rep.add("backlund.conj_defect", res.conj_defect,
            threshold=tol["commute_tol"] if bk.reality_mode else None,
            source="dressing.backlund")
    s2 = res.surface
    try:
        N2 = cn.second_form(s2)
        W2 = cn.willmore_residual(s2, N2)
        rep.add("backlund.willmore_residual",
                ch.masked_max(W2, s2.grid.interior_mask()),
                source="connection.willmore_residual")
        # away from the transform's singular set the residual is meaningful;
        # near it the dressing factor genuinely degenerates
        mask2 = s2.grid.interior_mask(4) & dr.singular_set_mask(res)
        thr = tol["backlund_willmore"] if (s.flags.get("willmore")
                                           and bk.reality_mode) else None
        rep.add("backlund.willmore_residual_regular", ch.masked_max(W2, mask2),
                threshold=thr, source="connection.willmore_residual")
        eta = iso.eta_solve(s2, N2)
        rep.add("backlund.isothermic_residual", eta.residual,
                source="isothermic.eta_solve")
    except LightconeError as exc:
        rep.add_error("backlund.reanalysis", exc, source="connection")
    # the exchange and commuting-diagram identities hold for arbitrary line
    # fields; well-conditioned pointwise lines keep them at algebra precision
    # (transported lines pass through pairing zeros that amplify rounding)
    if bk.run_permutability or bk.run_commute:
        lines = (gg.pointwise_line_field(s, rng_seed=cfg.rng_seed),
                 gg.pointwise_line_field(s, rng_seed=cfg.rng_seed + 1))
    if bk.run_permutability:
        try:
            perm = dr.permutability(s, params, lines=lines, N=N)
            rep.add("permutability.exchange", perm["exchange_residual"],
                    threshold=tol["commute_tol"], source="dressing.permutability")
            rep.add("permutability.line_angle", perm["line_angle_max"],
                    threshold=tol["commute_tol"], source="dressing.permutability")
        except LightconeError as exc:
            rep.add_error("permutability", exc, source="dressing")
    if bk.run_commute:
        try:
            defect, _ = dr.spectral_backlund_commute(s, params,
                                                     bk.commute_lambda,
                                                     lines=lines, N=N)
            rep.add("commute.defect", defect, threshold=tol["commute_tol"],
                    source="dressing.spectral_backlund_commute")
        except LightconeError as exc:
            rep.add_error("commute", exc, source="dressing")
    _export_surface(rep, cfg, s2, "backlund")
    return rep.finish()


def cmd_convergence(cfg, levels=3):
    """Repeat the main residuals across h, h/2, ... and fit log-log slopes."""
    rep = rp.Report("convergence", meta={"surface": cfg.surface_name,
                                         "levels": levels})
    grids = []
    g = cf.RunConfig(surface_name=cfg.surface_name,
                     surface_params=cfg.surface_params,
                     nx=cfg.nx, ny=cfg.ny).grid()
    for _ in range(levels):
        grids.append(g)
        g = g.refined()
    hs, wres, sres, fres = [], [], [], {lam: [] for lam in cfg.lambda_samples}
    for g in grids:
        s = sf.zoo(cfg.surface_name, cfg.surface_params, grid=g)
        N = cn.second_form(s)
        mask = g.interior_mask()
        hs.append(g.h)
        wres.append(ch.masked_max(cn.willmore_residual(s, N), mask))
        sres.append(ch.masked_max(cn.structure_gauss(s, N), mask))
        for lam in cfg.lambda_samples:
            A = cn.family_connection(lam, N)
            fres[lam].append(cn.flatness_defect(A, g)[0])
    rep.add("willmore.values", wres, source="connection", detail={"h": hs})
    if s.flags.get("willmore"):
        rep.add("willmore.slope", ch.fit_slope(hs, wres), source="fit_slope")
    rep.add("structure.slope", ch.fit_slope(hs, sres), source="fit_slope",
            detail={"values": sres})
    for lam in cfg.lambda_samples:
        name = f"flatness[{lam}].slope"
        if s.flags.get("willmore"):
            rep.add(name, ch.fit_slope(hs, fres[lam]), source="fit_slope",
                    detail={"values": fres[lam]})
        else:
            rep.add(f"flatness[{lam}].values", fres[lam], source="connection",
                    detail={"h": hs})
    return rep.finish()


def cmd_sweep(cfg):
    """Cartesian sweep of flatness over the lambda grid (and alpha if a
    Bäcklund block is present)."""
    s = cfg.surface()
    rep = rp.Report("sweep", meta=_meta(cfg, s))
    N = cn.second_form(s)
    for lam in cfg.lambda_samples:
        try:
            A = cn.family_connection(lam, N)
            fmax, fl2 = cn.flatness_defect(A, s.grid)
            rep.add(f"flatness[{lam}]", fmax, source="connection.curvature",
                    detail={"l2": fl2})
        except LightconeError as exc:
            rep.add_error(f"flatness[{lam}]", exc, source="connection")
    if cfg.backlund is not None:
        params = dr.BacklundParams(alpha=cfg.backlund.alpha,
                                   beta=cfg.backlund.beta,
                                   reality_mode=cfg.backlund.reality_mode,
                                   rng_seed=cfg.rng_seed)
        lines = (gg.pointwise_line_field(s, rng_seed=cfg.rng_seed),
                 gg.pointwise_line_field(s, rng_seed=cfg.rng_seed + 1))
        guard = 1e-3 * min(abs(params.alpha), abs(params.beta))
        for lam in cfg.lambda_samples:
            if min(abs(lam - params.alpha), abs(lam + params.alpha),
                   abs(lam - params.beta), abs(lam + params.beta)) <= guard:
                # the composition order is undefined at the poles
                rep.add(f"commute[{lam}]", "skipped (lambda at a pole)",
                        source="dressing.spectral_backlund_commute")
                continue
            try:
                defect, _ = dr.spectral_backlund_commute(s, params, lam,
                                                         lines=lines, N=N)
                rep.add(f"commute[{lam}]", defect,
                        threshold=cfg.tolerances["commute_tol"],
                        source="dressing.spectral_backlund_commute")
            except LightconeError as exc:
                rep.add_error(f"commute[{lam}]", exc, source="dressing")
    return rep.finish()


_COMMANDS = {
    "analyze": cmd_analyze,
    "spectral": cmd_spectral,
    "backlund": cmd_backlund,
    "convergence": cmd_convergence,
    "sweep": cmd_sweep,
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="lightcone",
        description="Numerical laboratory for conformal surface geometry "
                    "in the light-cone model")
    parser.add_argument("command", choices=sorted(_COMMANDS))
    parser.add_argument("--config", help="path to a JSON run configuration")
    parser.add_argument("--out", help="report output path (overrides config)")
    parser.add_argument("--grid-override", nargs=2, type=int,
                        metavar=("NX", "NY"))
    parser.add_argument("--seed", type=int)
    parser.add_argument("--export", action="append", default=None,
                        choices=["obj", "ply", "csv"])
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = cf.load(args.config) if args.config else cf.RunConfig()
        updates = {}
        if args.grid_override:
            updates["nx"], updates["ny"] = args.grid_override
        if args.seed is not None:
            updates["rng_seed"] = args.seed
        if args.export:
            updates["export_formats"] = tuple(args.export)
        if args.out:
            updates["report_path"] = args.out
        if updates:
            cfg = dataclasses.replace(cfg, **updates)
        rep = _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if cfg.report_path:
        rep.save(cfg.report_path)
    for c in rep.checks:
        print(f"[{c.verdict:5s}] {c.name}: {c.value}"
              + (f" (<= {c.threshold:g})" if c.threshold is not None else ""))
    print(f"all_pass={rep.all_pass} wall_time={rep.wall_time:.2f}s")
    return 0 if rep.all_pass else 1


if __name__ == "__main__":
    sys.exit(main())
