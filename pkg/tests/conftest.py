import numpy as np
import pytest

from potkit.geometry import build_grid, named_domain
from potkit.szego import build_szego_system


@pytest.fixture(scope="session")
def disc_grid():
    return build_grid(named_domain("unit-disc"), 256)


@pytest.fixture(scope="session")
def disc_system(disc_grid):
    return build_szego_system(disc_grid, a=0.0)


@pytest.fixture(scope="session")
def annulus_grid():
    return build_grid(named_domain("annulus:0.5"), 256)


@pytest.fixture(scope="session")
def annulus_system(annulus_grid):
    return build_szego_system(annulus_grid, a=0.75)


@pytest.fixture(scope="session")
def cassini_grid():
    return build_grid(named_domain("cassini-like"), 256)


@pytest.fixture(scope="session")
def cassini_system(cassini_grid):
    return build_szego_system(cassini_grid)


# ---------------------------------------------------------------------------
# independent closed-form oracles (annulus r < |z| < 1)
# ---------------------------------------------------------------------------


def annulus_szego_series(z, a, r, terms=250):
    """S(z, a) from the orthonormal Laurent basis z^n / sqrt(2 pi (1+r^{2n+1}))."""
    n = np.arange(-terms, terms + 1)
    return np.sum(np.power.outer(z * np.conj(a), n) / (1 + r ** (2 * n + 1)), axis=-1) / (
        2 * np.pi
    )


def annulus_garabedian_series(z, a, r, terms=250):
    """L(z, a) = 1/(2 pi (z-a)) + correction series (coefficient matching)."""
    n = np.arange(0, terms)
    w = r ** (2 * n + 1) / (1 + r ** (2 * n + 1))
    s1 = np.sum(np.power.outer(a / z, n) * w, axis=-1) / z
    s2 = np.sum(np.power.outer(z / a, n) * w, axis=-1) / a
    return (1.0 / (z - a) - s1 + s2) / (2 * np.pi)


def annulus_lambda_inner(z, r, terms=300):
    """lambda_inner by Laurent orthogonality on the inner circle (real z)."""
    n = np.arange(-terms, terms + 1, dtype=np.float64)
    with np.errstate(over="ignore", invalid="ignore"):
        num = np.nan_to_num(z ** (2 * n) * r ** (2 * n + 1) / (1 + r ** (2 * n + 1)) ** 2)
        den = np.nan_to_num(z ** (2 * n) / (1 + r ** (2 * n + 1)))
    return float(np.sum(num) / np.sum(den))


def disc_szego_exact(z, a):
    return 1.0 / (2.0 * np.pi * (1.0 - z * np.conj(a)))


def disc_green_exact(z, w):
    return -np.log(np.abs((z - w) / (1.0 - np.conj(w) * z)))


def disc_green_dw_exact(z, w):
    return (1.0 - abs(z) ** 2) / (2.0 * (z - w) * (1.0 - w * np.conj(z)))


def disc_poisson_exact(z, w):
    return (1.0 - abs(z) ** 2) / (2.0 * np.pi * np.abs(w - z) ** 2)
