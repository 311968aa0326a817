import pytest

from parapos.runner import run_scenario
from parapos.scenarios import get_scenario


@pytest.fixture(scope="session")
def scenario_run(tmp_path_factory):
    """Run a library scenario once per session and cache its artifacts.

    Returns a callable ``(name, seed=None) -> (manifest, out_dir)``.  Tests
    that need a *fresh* run (determinism checks) should call ``run_scenario``
    themselves instead of going through the cache.
    """
    cache = {}

    def _run(name, seed=None):
        key = (name, seed)
        if key not in cache:
            base = tmp_path_factory.mktemp(f"run_{name.lower()}")
            manifest = run_scenario(get_scenario(name), out_dir=str(base / name), seed=seed)
            cache[key] = (manifest, base / name)
        return cache[key]

    return _run
