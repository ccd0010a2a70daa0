import pytest

from gsf.ffield import FieldTower

_CACHE: dict[tuple[int, int, int], FieldTower] = {}


@pytest.fixture(scope="session")
def tower():
    """Memoized tower factory; construction is deterministic so sharing is safe."""

    def get(p: int, s: int = 1, n: int = 1) -> FieldTower:
        key = (p, s, n)
        if key not in _CACHE:
            _CACHE[key] = FieldTower(p, s, n)
        return _CACHE[key]

    return get
