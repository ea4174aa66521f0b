import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from lmechain.gaussian import build_drift_diffusion
from lmechain.model import ChainSpec

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much])
settings.load_profile("default")


@pytest.fixture
def fridge_spec():
    """Refrigerator point: omega_1/omega_2 = 0.4 below T_1/T_2 = 1/2."""
    return ChainSpec.two_site(0.4, 1.0, epsilon=0.1, gamma=0.5, t_cold=0.5, t_hot=1.0)


@pytest.fixture
def engine_spec():
    return ChainSpec.two_site(0.6, 1.0, epsilon=0.2, gamma=1.0, t_cold=0.25, t_hot=0.5)


@st.composite
def two_site_specs(draw, eta=False):
    w1 = draw(st.floats(0.1, 3.0))
    w2 = draw(st.floats(0.1, 3.0))
    eps = draw(st.floats(0.0, 0.5))
    gam = draw(st.floats(0.1, 5.0))
    t1 = draw(st.floats(0.2, 5.0))
    t2 = draw(st.floats(0.2, 5.0))
    return ChainSpec.two_site(w1, w2, epsilon=eps, gamma=gam, t_cold=t1, t_hot=t2)


@st.composite
def chain_specs(draw, max_sites=6):
    n = draw(st.integers(2, max_sites))
    freqs = draw(st.lists(st.floats(0.2, 3.0), min_size=n, max_size=n))
    # interior sites are damped only through the coupling
    eps = draw(st.floats(0.0 if n == 2 else 0.02, 0.4))
    gam = draw(st.floats(0.2, 5.0))
    # counter-rotating strength kept inside the stable region
    eta = draw(st.floats(0.0, 1.0)) * min(eps, 0.1)
    t1 = draw(st.floats(0.2, 5.0))
    t2 = draw(st.floats(0.2, 5.0))
    spec = ChainSpec(n_sites=n, frequencies=tuple(freqs), epsilon=eps, eta=eta, gamma=gam, t_cold=t1, t_hot=t2)
    # strong pairing next to a soft site has no steady state
    assume(build_drift_diffusion(spec).is_hurwitz())
    return spec


def random_specs(count, seed, n_sites=2, eta=False):
    """Specs drawn with numpy for the large property sweeps; unstable draws are redrawn."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        n = n_sites if isinstance(n_sites, int) else int(rng.integers(*n_sites))
        freqs = rng.uniform(0.1, 3.0, n)
        eps = rng.uniform(0 if n == 2 else 0.02, 0.5)
        spec = ChainSpec(
            n_sites=n, frequencies=tuple(freqs), epsilon=eps,
            eta=rng.uniform(0, 1) * min(eps, 0.1) if eta else 0.0,
            gamma=rng.uniform(0.1, 5.0), t_cold=rng.uniform(0.2, 5.0), t_hot=rng.uniform(0.2, 5.0))
        if spec.eta == 0 or build_drift_diffusion(spec).is_hurwitz():
            out.append(spec)
    return out
