import pytest
from hypothesis import settings

from hausfill import use_backend
from hausfill._jit import HAS_NUMBA

settings.register_profile("hausfill", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("hausfill")

BACKENDS = ["numpy"] + (["numba"] if HAS_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def each_backend(request):
    with use_backend(request.param):
        yield request.param
