"""Shared fixtures: the correlation table and the packaged step scenario.

The full-horizon trajectory is session scoped because three acceptance
criteria reuse it; one 3600 s integration takes well under a second.
"""
import importlib.resources

import pytest

from alkasim import correlations
from alkasim.dae import simulate
from alkasim.scenario import initial_state, load_scenario


@pytest.fixture(scope="session")
def table():
    return correlations.default_table()


def _packaged(name):
    ref = importlib.resources.files("alkasim.data") / name
    with importlib.resources.as_file(ref) as path:
        return load_scenario(path)


@pytest.fixture(scope="session")
def step_config():
    return _packaged("feasible_step.scenario")


@pytest.fixture(scope="session")
def infeasible_config():
    return _packaged("paper_step.scenario")


@pytest.fixture(scope="session")
def step_traj(step_config, table):
    cfg = step_config
    x0 = initial_state(cfg, table)
    return simulate(x0, cfg.u_of_t, cfg.d_of_t, cfg.t_end, plant=cfg.plant,
                    settings=cfg.solver, table=table,
                    breakpoints=cfg.breakpoints)
