import numpy as np
import pytest

from contact_bar.assembly import Mode
from contact_bar.contact import Layout
from contact_bar.experiments import benchmark_initial_state, benchmark_system


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=[Mode.MOD2, Mode.MOD3], ids=["mod2", "mod3"])
def reduced_bench(request):
    sys = benchmark_system(6, request.param)
    return sys, benchmark_initial_state(sys, Layout.REDUCED)
