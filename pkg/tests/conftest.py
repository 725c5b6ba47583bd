"""Shared fixtures: analytic surfaces and their derived data at the default
resolution, computed once per session."""

import time

import numpy as np
import pytest

import lightcone.connection as cn
import lightcone.surface as sf

SESSION_START = time.time()


@pytest.fixture(scope="session")
def torus():
    return sf.zoo("clifford_torus")


@pytest.fixture(scope="session")
def torus_N(torus):
    return cn.second_form(torus)


@pytest.fixture(scope="session")
def torus_pi(torus):
    return cn.congruence_projector(torus)


@pytest.fixture(scope="session")
def torus129():
    return sf.zoo("clifford_torus", nx=129, ny=129)


@pytest.fixture(scope="session")
def torus129_N(torus129):
    return cn.second_form(torus129)


@pytest.fixture(scope="session")
def cylinder():
    return sf.zoo("cylinder")


@pytest.fixture(scope="session")
def cylinder_N(cylinder):
    return cn.second_form(cylinder)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
