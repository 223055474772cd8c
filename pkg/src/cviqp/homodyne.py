"""Finite-resolution homodyne measurement.

The detector partitions the momentum axis into pixels of width ``2*eta``
centered at ``p_k = 2*eta*k`` (half-open, ``[p_k - eta, p_k + eta)``).  Two
evaluation regimes are supported and selected automatically:

* sample binning, when a pixel holds at least four momentum grid samples
  (``eta >= 2*dp``): each grid sample belongs to exactly one pixel, so the
  pixel projectors are disjoint and complete on the grid by construction;
* sub-grid quadrature, when pixels are narrower than the grid can resolve:
  pixel masses and conditional states are computed from Gauss-Legendre nodes
  inside the pixel, with the measured-mode momentum slice at each node
  evaluated by the explicit (2 pi)^(-1/2) sum exp(-i s q_j) kernel.  This is
  the regime of the post-selected gadgets, where eta can sit far below the
  grid spacing.

Both regimes discretize the same continuum projector, and they agree where
their domains overlap; the sample regime is additionally an exact partition
of grid samples.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .errors import NumericalError, ValidationError, ZeroMassBinError
from .quadgrid import (
    ModeState,
    QuadratureGrid,
    Rep,
    TwoModeState,
    as_rep,
    fidelity_pure,
    normalized,
    transform_mode,
)

TAIL_MASS_DIAGNOSTIC = 1e-8
ZERO_MASS_TOL = 1e-15
GKP_BINNING_REL_TOL = 1e-9
SQRT_PI = math.sqrt(math.pi)

_MIN_QUAD_NODES = 8


class TailMassWarning(UserWarning):
    """The requested bin range misses non-negligible probability mass."""


@dataclass(frozen=True)
class DetectorParams:
    """Half-width eta of the detector pixels; pixel k covers [2 eta k - eta, 2 eta k + eta)."""

    eta: float

    def __post_init__(self) -> None:
        if not self.eta > 0:
            raise ValidationError(f"eta must be positive, got {self.eta}")

    def bin_center(self, k: int) -> float:
        return 2.0 * self.eta * k

    def bin_interval(self, k: int) -> tuple[float, float]:
        c = self.bin_center(k)
        return (c - self.eta, c + self.eta)

    def bin_of(self, p: np.ndarray | float) -> np.ndarray | int:
        """Pixel index for momentum value(s); half-open assignment."""
        k = np.floor((np.asarray(p) + self.eta) / (2.0 * self.eta)).astype(int)
        return k if k.ndim else int(k)

    def sample_aligned(self, grid: QuadratureGrid) -> bool:
        """True when each pixel holds >= 4 momentum samples (sample-binning regime)."""
        return self.eta >= 2.0 * grid.dp

    @property
    def gkp_compatible(self) -> bool:
        """sqrt(pi)/eta is an integer (within 1e-9 relative tolerance)."""
        ratio = SQRT_PI / self.eta
        return abs(ratio - round(ratio)) <= GKP_BINNING_REL_TOL * ratio

    def require_gkp_compatible(self) -> None:
        if not self.gkp_compatible:
            raise ValidationError(
                f"eta={self.eta} does not match the sqrt(pi) binning: "
                f"sqrt(pi)/eta = {SQRT_PI / self.eta:.6f} is not an integer"
            )


@dataclass(frozen=True)
class ConditionalEnsemble:
    """Weighted pure components of a post-measurement state on the unmeasured mode.

    Weights sum to the probability of the conditioning outcome; each component
    is normalized.  One component per momentum sample (or quadrature node)
    inside the measured bin.
    """

    components: tuple[tuple[float, ModeState], ...]
    total_probability: float

    def __post_init__(self) -> None:
        if not self.components:
            raise ValidationError("ensemble must have at least one component")

    @property
    def weights(self) -> np.ndarray:
        return np.array([w for w, _ in self.components])

    @property
    def states(self) -> tuple[ModeState, ...]:
        return tuple(s for _, s in self.components)

    def principal_component(self) -> ModeState:
        """Top eigenvector of the ensemble density operator (via the small Gram matrix)."""
        w = self.weights
        states = self.states
        m = len(states)
        if m == 1:
            return states[0]
        spacing = states[0].spacing
        vecs = np.stack([s.amplitudes for s in states])
        gram = (np.sqrt(np.outer(w, w))) * (np.conj(vecs) @ vecs.T) * spacing
        evals, evecs = np.linalg.eigh(gram)
        coeff = np.sqrt(w) * evecs[:, -1]
        amp = coeff @ vecs
        return normalized(ModeState(states[0].grid, states[0].rep, amp))

    def purity(self) -> float:
        """Tr[rho^2] / (Tr rho)^2 of the ensemble density operator."""
        w = self.weights
        states = self.states
        spacing = states[0].spacing
        vecs = np.stack([s.amplitudes for s in states])
        overlaps = np.abs((np.conj(vecs) @ vecs.T) * spacing) ** 2
        return float(w @ overlaps @ w / np.sum(w) ** 2)


def _measured_axis_density(state: TwoModeState, mode: int) -> np.ndarray:
    """Per-sample probability mass of the measured mode's momentum grid."""
    tilted = transform_mode(state, mode, Rep.MOMENTUM)
    other = 2 if mode == 1 else 1
    other_spacing = tilted.grid.rep_spacing(tilted.reps[other - 1])
    axis = 1 if mode == 1 else 0
    mass = np.sum(np.abs(tilted.amplitudes) ** 2, axis=axis) * other_spacing * tilted.grid.dp
    return mass


def _position_slices(state: TwoModeState, mode: int, s_values: np.ndarray) -> np.ndarray:
    """Momentum slices <s|_mode state at arbitrary continuum s, one row per s.

    Uses the explicit kernel (2 pi)^(-1/2) sum_j exp(-i s q_j) dq on the
    measured mode's position representation, so s need not lie on the grid.
    """
    st = transform_mode(state, mode, Rep.POSITION)
    q = st.grid.points
    kernel = np.exp(-1j * np.outer(s_values, q)) * (st.grid.dq / math.sqrt(2.0 * math.pi))
    if mode == 1:
        return kernel @ st.amplitudes
    return kernel @ st.amplitudes.T


def _gauss_legendre(lo: float, hi: float, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n_nodes)
    half = 0.5 * (hi - lo)
    return lo + half * (x + 1.0), half * w


def _quad_nodes_per_bin(det: DetectorParams, grid: QuadratureGrid) -> int:
    oscillations = 2.0 * det.eta / grid.dp
    return max(_MIN_QUAD_NODES, int(math.ceil(4.0 * oscillations)))


def _check_mode(mode: int) -> None:
    if mode not in (1, 2):
        raise ValidationError(f"mode must be 1 or 2, got {mode}")


def _auto_k_range(
    state: TwoModeState, mode: int, det: DetectorParams
) -> list[int]:
    """Bins intersecting the region where the sampled momentum marginal has mass."""
    mass = _measured_axis_density(state, mode)
    p = state.grid.momentum_points
    live = mass > ZERO_MASS_TOL * max(np.max(mass), 1e-300)
    if not np.any(live):
        raise NumericalError("state carries no measurable momentum mass")
    lo = int(det.bin_of(float(p[live][0])))
    hi = int(det.bin_of(float(p[live][-1])))
    return list(range(lo, hi + 1))


def bin_probabilities(
    state: TwoModeState,
    mode: int,
    det: DetectorParams,
    k_range: Iterable[int] | None = None,
    warn_tail: bool = True,
) -> dict[int, float]:
    """Probability of each detector pixel for a homodyne measurement of one mode.

    Returns an ordered ``{k: probability}`` map.  With ``k_range=None`` the
    pixels covering the state's momentum support are selected automatically;
    otherwise a diagnostic warning is emitted if the requested range misses
    more than 1e-8 of the mass (suppress with ``warn_tail=False`` when
    deliberately probing a rare bin, as post-selection does).
    """
    _check_mode(mode)
    ks = sorted(k_range) if k_range is not None else None
    if det.sample_aligned(state.grid):
        mass = _measured_axis_density(state, mode)
        sample_bins = det.bin_of(state.grid.momentum_points)
        out: dict[int, float] = {}
        if ks is None:
            for k in np.unique(sample_bins):
                out[int(k)] = float(np.sum(mass[sample_bins == k]))
            covered = sum(out.values())
            total = float(np.sum(mass))
        else:
            for k in ks:
                out[k] = float(np.sum(mass[sample_bins == k]))
            covered = sum(out.values())
            total = float(np.sum(mass))
    else:
        if ks is None:
            ks = _auto_k_range(state, mode, det)
        n_nodes = _quad_nodes_per_bin(det, state.grid)
        other = 2 if mode == 1 else 1
        other_spacing = state.grid.rep_spacing(state.reps[other - 1])
        out = {}
        for k in ks:
            lo, hi = det.bin_interval(k)
            nodes, wts = _gauss_legendre(lo, hi, n_nodes)
            slices = _position_slices(state, mode, nodes)
            density = np.sum(np.abs(slices) ** 2, axis=1) * other_spacing
            out[k] = float(np.dot(wts, density))
        covered = sum(out.values())
        total = float(np.sum(_measured_axis_density(state, mode)))
    tail = total - covered
    if warn_tail and k_range is not None and tail > TAIL_MASS_DIAGNOSTIC:
        warnings.warn(
            f"requested bins miss {tail:.3e} probability mass",
            TailMassWarning,
            stacklevel=2,
        )
    return out


def project_bin(
    state: TwoModeState, mode: int, k: int, det: DetectorParams
) -> ConditionalEnsemble:
    """Condition on pixel k of a homodyne measurement of ``mode``.

    The measured mode is removed; the result is a weighted ensemble of pure
    states of the other mode, one per momentum sample (sample regime) or
    quadrature node (sub-grid regime) inside the pixel.  Raises
    ZeroMassBinError when the pixel mass is below 1e-15.
    """
    _check_mode(mode)
    other = 2 if mode == 1 else 1
    other_rep = state.reps[other - 1]
    other_spacing = state.grid.rep_spacing(other_rep)
    if det.sample_aligned(state.grid):
        tilted = transform_mode(state, mode, Rep.MOMENTUM)
        sample_bins = det.bin_of(state.grid.momentum_points)
        idx = np.nonzero(sample_bins == k)[0]
        slices = tilted.amplitudes[idx, :] if mode == 1 else tilted.amplitudes[:, idx].T
        node_measure = np.full(len(idx), state.grid.dp)
    else:
        lo, hi = det.bin_interval(k)
        nodes, node_measure = _gauss_legendre(lo, hi, _quad_nodes_per_bin(det, state.grid))
        slices = _position_slices(state, mode, nodes)
    sq_norms = np.sum(np.abs(slices) ** 2, axis=1) * other_spacing
    weights = sq_norms * node_measure
    total = float(np.sum(weights))
    if total < ZERO_MASS_TOL:
        raise ZeroMassBinError(
            f"bin k={k} carries probability {total:.3e} (< {ZERO_MASS_TOL:.0e})"
        )
    keep = weights > 0.0
    components = tuple(
        (float(w), ModeState(state.grid, other_rep, row / math.sqrt(sn)))
        for w, sn, row in zip(weights[keep], sq_norms[keep], slices[keep])
    )
    return ConditionalEnsemble(components=components, total_probability=total)


def ensemble_fidelity(ensemble: ConditionalEnsemble, target: ModeState) -> float:
    """<target| rho |target> / Tr rho for the rank-structured ensemble."""
    w = ensemble.weights
    fids = np.array([fidelity_pure(target, s) for s in ensemble.states])
    return float(np.dot(w, fids) / np.sum(w))


def sample_outcome(dist: Mapping[int, float], seed: int) -> int:
    """Deterministic inverse-CDF sample of a bin index from ``{k: probability}``.

    The distribution may sum to less than one (out-of-range tail); tail draws
    are assigned to the nearest covered bin (lowest k for the first half of
    the tail, highest k for the rest).
    """
    if not dist:
        raise ValidationError("cannot sample from an empty distribution")
    ks = sorted(dist)
    probs = np.array([dist[k] for k in ks])
    if np.any(probs < 0):
        raise ValidationError("negative probability in distribution")
    cdf = np.cumsum(probs)
    u = float(np.random.default_rng(seed).random())
    idx = int(np.searchsorted(cdf, u, side="right"))
    if idx >= len(ks):
        remainder = 1.0 - cdf[-1]
        return ks[0] if (u - cdf[-1]) < 0.5 * remainder else ks[-1]
    return ks[idx]


@dataclass(frozen=True)
class ReadoutResult:
    """sqrt(pi)-window masses of a GKP X-basis readout."""

    p_plus: float
    p_minus: float
    p_error: float


def gkp_readout(psi: ModeState, det: DetectorParams) -> ReadoutResult:
    """Bin the momentum axis into sqrt(pi)-long windows centered on m*sqrt(pi).

    Mass in even windows is associated with |+>, odd windows with |->; the
    error mass for the dominant identification is min(p_plus, p_minus).
    Requires sqrt(pi)/eta to be an integer so the detector pixels are
    compatible with the window layout.
    """
    det.require_gkp_compatible()
    phi = as_rep(psi, Rep.MOMENTUM)
    p = phi.grid.momentum_points
    mass = phi.density() * phi.grid.dp
    window = np.floor(p / SQRT_PI + 0.5).astype(int)
    even = (window % 2) == 0
    p_plus = float(np.sum(mass[even]))
    p_minus = float(np.sum(mass[~even]))
    return ReadoutResult(p_plus=p_plus, p_minus=p_minus, p_error=min(p_plus, p_minus))
