import numpy as np
import pytest

from degenboot import PanelData, QuadMomentModel, named_design, simulate_ch_panel


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def d1_panel():
    return simulate_ch_panel(named_design("D1"), 300, rng=np.random.default_rng(7))


def random_panel(rng, t=50, k=2, m=2):
    return PanelData(y=rng.standard_normal((t, k)), z=rng.standard_normal((t, m)))


def model_from(deltas, weight=None):
    return QuadMomentModel.from_deltas(np.asarray(deltas, dtype=float), sample_size=100, weight=weight)


def population_model(loadings, factor_scales, weight=None):
    """Population quadratic-form matrices L diag-ish L' of a factor design;
    the null space of loadings' is the flat minimizer set."""
    lam = np.asarray(loadings, dtype=float)
    deltas = []
    for scale in factor_scales:
        mid = np.diag(np.asarray(scale, dtype=float))
        deltas.append(lam @ mid @ lam.T)
    return model_from(np.stack(deltas), weight=weight)
