import numpy as np
import pytest

from cviqp.quadgrid import ModeState, Rep, make_grid, normalized


@pytest.fixture(scope="session")
def grid_small():
    return make_grid(256, 30.0)


@pytest.fixture(scope="session")
def grid_default():
    return make_grid(4096, 40.0)


def random_smooth_state(grid, seed, n_bumps: int = 4) -> ModeState:
    """Normalized superposition of displaced squeezed bumps (grid-supported, physical)."""
    rng = np.random.default_rng(seed)
    q = grid.points
    amp = np.zeros(grid.n_points, dtype=np.complex128)
    for _ in range(n_bumps):
        center = rng.uniform(-grid.extent / 10.0, grid.extent / 10.0)
        width = rng.uniform(0.5, 1.5)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        kick = rng.uniform(-1.0, 1.0)
        amp += np.exp(1j * phase) * np.exp(-((q - center) ** 2) / (2.0 * width**2) + 1j * kick * q)
    return normalized(ModeState(grid, Rep.POSITION, amp))


def random_dense_state(grid, seed) -> ModeState:
    """White-noise amplitudes: unphysical but exercises exact unitarity."""
    rng = np.random.default_rng(seed)
    amp = rng.normal(size=grid.n_points) + 1j * rng.normal(size=grid.n_points)
    return normalized(ModeState(grid, Rep.POSITION, amp))
