"""The CV-IQP gate set (diagonal in position), the Fourier gate, and displacements.

All single-mode diagonal gates act as amplitude-wise phases in the position
representation and therefore commute exactly.  The Fourier gate is realized
by the exact three-factor chirp decomposition

    F = e^(-i pi/4) * e^(i q^2/2) * IFT * e^(i p^2/2) * FT * e^(i q^2/2),

which reproduces psi(q) -> (2 pi)^(-1/2) integral dq' exp(i q q') psi(q') on
the continuum and is a product of exactly unitary grid operations, so norms
are preserved to machine precision for arbitrary amplitude vectors.

Position shifts go through a linear phase in the momentum representation,
which supports shifts that are not multiples of the grid spacing (the
sqrt(pi) shifts of GKP logic).
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import RepresentationError, ValidationError
from .quadgrid import (
    ModeState,
    Rep,
    TwoModeState,
    as_rep,
    to_momentum,
    to_position,
    transform_mode,
)

_CZ_BLOCK_ROWS = 512  # bounds the transient phase-matrix allocation


def apply_phase_function(psi: ModeState, f: Callable[[np.ndarray], np.ndarray]) -> ModeState:
    """Apply the position-diagonal gate exp(i f(q)): a_j <- exp(i f(q_j)) a_j."""
    if psi.rep is not Rep.POSITION:
        raise RepresentationError("phase gates act in the position representation")
    phase = np.exp(1j * np.asarray(f(psi.coordinates), dtype=float))
    return ModeState(psi.grid, Rep.POSITION, phase * psi.amplitudes)


def apply_z(psi: ModeState) -> ModeState:
    """Logical Z on the GKP grid: exp(i sqrt(pi) q)."""
    return apply_phase_function(psi, lambda q: np.sqrt(np.pi) * q)


def _t_exponent(q: np.ndarray) -> np.ndarray:
    u = q / np.sqrt(np.pi)
    return (np.pi / 4.0) * (2.0 * u**3 + u**2 - 2.0 * u)


def apply_t(psi: ModeState) -> ModeState:
    """Logical T on the GKP grid: exp(i pi/4 [2 (q/rt)^3 + (q/rt)^2 - 2 q/rt]), rt = sqrt(pi)."""
    return apply_phase_function(psi, _t_exponent)


def tensor(a: ModeState, b: ModeState) -> TwoModeState:
    """Product state A[j, k] = a_j * b_k (mode 1 indexes rows)."""
    if a.grid != b.grid:
        raise ValidationError("tensor requires both modes on the same grid")
    return TwoModeState(a.grid, (a.rep, b.rep), np.outer(a.amplitudes, b.amplitudes))


def apply_phase_function2(
    state: TwoModeState, f: Callable[[np.ndarray, np.ndarray], np.ndarray]
) -> TwoModeState:
    """Apply the two-mode position-diagonal gate exp(i f(q1, q2)).

    f receives broadcastable (n, 1) and (1, n) coordinate arrays.  Both modes
    are converted to the position representation first.  The phase is applied
    in row blocks to bound transient memory on large grids.
    """
    state = transform_mode(state, 1, Rep.POSITION)
    state = transform_mode(state, 2, Rep.POSITION)
    q = state.grid.points
    out = state.amplitudes.copy()
    col = q[np.newaxis, :]
    for lo in range(0, state.grid.n_points, _CZ_BLOCK_ROWS):
        hi = lo + _CZ_BLOCK_ROWS
        rows = q[lo:hi, np.newaxis]
        out[lo:hi] *= np.exp(1j * np.asarray(f(rows, col), dtype=float))
    return TwoModeState(state.grid, (Rep.POSITION, Rep.POSITION), out)


def apply_cz(state: TwoModeState, conjugate: bool = False) -> TwoModeState:
    """The entangling gate exp(i q1 q2) (or its inverse with conjugate=True)."""
    sign = -1.0 if conjugate else 1.0
    return apply_phase_function2(state, lambda q1, q2: sign * q1 * q2)


def apply_fourier(psi: ModeState) -> ModeState:
    """The Fourier gate: psi(q) -> (2 pi)^(-1/2) integral dq' exp(i q q') psi(q')."""
    psi = as_rep(psi, Rep.POSITION)
    q = psi.grid.points
    chirp_q = np.exp(0.5j * q * q)
    stage = ModeState(psi.grid, Rep.POSITION, chirp_q * psi.amplitudes)
    stage = to_momentum(stage)
    p = psi.grid.momentum_points
    stage = ModeState(psi.grid, Rep.MOMENTUM, np.exp(0.5j * p * p) * stage.amplitudes)
    stage = to_position(stage)
    out = np.exp(-0.25j * np.pi) * chirp_q * stage.amplitudes
    return ModeState(psi.grid, Rep.POSITION, out)


def displace_q(psi: ModeState, u: float) -> ModeState:
    """Position shift exp(-i u p): psi(q) -> psi(q - u), exact on the torus."""
    _check_shift(psi, u)
    original_rep = psi.rep
    phi = as_rep(psi, Rep.MOMENTUM)
    shifted = ModeState(
        phi.grid, Rep.MOMENTUM, np.exp(-1j * u * phi.grid.momentum_points) * phi.amplitudes
    )
    return as_rep(shifted, original_rep)


def displace_p(psi: ModeState, v: float) -> ModeState:
    """Momentum kick exp(-i v q): multiplies the position wavefunction by exp(-i v q)."""
    _check_shift(psi, v)
    original_rep = psi.rep
    pos = as_rep(psi, Rep.POSITION)
    kicked = ModeState(pos.grid, Rep.POSITION, np.exp(-1j * v * pos.grid.points) * pos.amplitudes)
    return as_rep(kicked, original_rep)


def _check_shift(psi: ModeState, shift: float) -> None:
    limit = psi.grid.extent / 4.0
    if abs(shift) >= limit:
        raise ValidationError(
            f"shift {shift} exceeds a quarter of the grid extent ({limit}); "
            "the displaced state would wrap around"
        )
