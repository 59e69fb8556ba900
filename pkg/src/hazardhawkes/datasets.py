"""Bundled synthetic earthquake-style catalogue.

The fixture is a simulated aftershock-like sequence from an Omori-kernel
model with a recorded seed; :func:`generate_fixture` rebuilds it exactly.
"""

from importlib import resources

from .kernels import Omori
from .model import EventSequence, HawkesModel
from .simulate import SimConfig, simulate

FIXTURE_MODEL = HawkesModel(1.0, Omori(0.1, 0.2, 1.0))
FIXTURE_HORIZON = 600.0
FIXTURE_SEED = 20240601
FIXTURE_FILE = "synthetic_catalogue.csv"


def generate_fixture(model=FIXTURE_MODEL, horizon=FIXTURE_HORIZON, seed=FIXTURE_SEED):
    """Simulate the fixture catalogue (times and parents on ``(0, horizon]``)."""
    return simulate(SimConfig(model, horizon, seed)).seq


def load_fixture():
    """Read the bundled catalogue; the window is ``(0, FIXTURE_HORIZON]``."""
    path = resources.files(__package__).joinpath("data", FIXTURE_FILE)
    with resources.as_file(path) as p:
        return EventSequence.from_csv(p, t_end=FIXTURE_HORIZON)


def fixture_path():
    return resources.files(__package__).joinpath("data", FIXTURE_FILE)
