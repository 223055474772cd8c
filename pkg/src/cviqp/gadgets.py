"""Composite measurement-based procedures and the DV reference simulator.

CV side: the post-selected Fourier gadget (entangle with a momentum-squeezed
ancilla through CZ, measure the input mode with a finite-resolution homodyne
detector, keep a pixel), the GKP error-correction gadget (syndrome = ancilla
momentum mod sqrt(pi), corrective position shift), a Gaussian shift-noise
channel, and the error-corrected Fourier pipeline that manufactures its |0>
ancilla inline from the |+> resource via a post-selected Fourier gadget.

DV side: a dense statevector simulator for the Hadamard gadget and small IQP
circuits (X-basis inputs and measurements, Z-diagonal phases), used as the
brute-force reference for the CV constructions.

Two evaluation engines produce identical numbers for the CV gadgets:

* ``two_mode`` materializes the full n x n entangled state and routes
  through the homodyne module (the default up to 4096 grid points);
* ``factored`` never builds the two-mode array.  For a product input, the
  conditional slice at measured momentum s factorizes as
  kept(x) * meas_tilde(s - x), with meas_tilde the (periodic) transform of
  the measured mode, so slices and the full outcome distribution are
  O(n log n).  Requires a self-dual grid (dq == dp) so the shifted-argument
  lookup is an exact circular indexing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import NumericalError, ValidationError, ZeroMassBinError
from .homodyne import (
    ZERO_MASS_TOL,
    ConditionalEnsemble,
    DetectorParams,
    _gauss_legendre,
    _quad_nodes_per_bin,
    bin_probabilities,
    ensemble_fidelity,
    project_bin,
    sample_outcome,
)
from .quadgrid import (
    ModeState,
    Rep,
    as_rep,
    normalized,
    to_momentum,
)
from .gates import apply_cz, apply_fourier, displace_p, displace_q, tensor
from .states import GkpParams, gkp_plus, gkp_zero, squeezed_momentum

SQRT_PI = math.sqrt(math.pi)

TWO_MODE_MAX_POINTS = 4096


def centered_mod_sqrt_pi(x: float) -> float:
    """Representative of x mod sqrt(pi) in [-sqrt(pi)/2, sqrt(pi)/2)."""
    return float((x + SQRT_PI / 2.0) % SQRT_PI - SQRT_PI / 2.0)


@dataclass(frozen=True)
class ShiftNoise:
    """Gaussian shift channel exp(-i u p) exp(-i v q), u ~ N(0, u_std^2), v ~ N(0, v_std^2).

    Fixed shifts, when given, override the random draw (deterministic tests).
    """

    u_std: float = 0.0
    v_std: float = 0.0
    fixed_u: float | None = None
    fixed_v: float | None = None

    def __post_init__(self) -> None:
        for name, s in (("u_std", self.u_std), ("v_std", self.v_std)):
            if not (np.isfinite(s) and s >= 0):
                raise ValidationError(f"{name} must be finite and >= 0, got {s}")

    @classmethod
    def none(cls) -> "ShiftNoise":
        return cls(0.0, 0.0)


def apply_shift_noise(
    psi: ModeState, noise: ShiftNoise, seed: int | np.random.Generator | None = None
) -> tuple[ModeState, tuple[float, float]]:
    """Apply one draw of the shift channel; returns the state and the realized (u, v)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = noise.fixed_u if noise.fixed_u is not None else float(rng.normal(0.0, noise.u_std))
    v = noise.fixed_v if noise.fixed_v is not None else float(rng.normal(0.0, noise.v_std))
    out = psi
    if v != 0.0:
        out = displace_p(out, v)
    if u != 0.0:
        out = displace_q(out, u)
    return out, (u, v)


@dataclass
class GadgetReport:
    """Outcome, success probability, conditional output, and named diagnostics of a gadget run."""

    outcome_k: int
    outcome_value: float
    success_probability: float
    output: ConditionalEnsemble
    diagnostics: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not (0.0 <= self.success_probability <= 1.0 + 1e-12):
            raise ValidationError(
                f"success probability {self.success_probability} outside [0, 1]"
            )


# ---------------------------------------------------------------------------
# factored engine


def _require_factorable(a: ModeState) -> None:
    if not a.grid.is_self_dual:
        raise ValidationError(
            "the factored gadget engine needs a self-dual grid (dq == dp); "
            "use quadgrid.self_dual_grid or the two_mode engine"
        )


def _shifted_transform(measured: ModeState, eps: float) -> np.ndarray:
    """Values of the measured mode's momentum transform at grid + eps."""
    if eps == 0.0:
        return to_momentum(measured).amplitudes
    q = measured.grid.points
    tilted = ModeState(measured.grid, Rep.POSITION, measured.amplitudes * np.exp(-1j * eps * q))
    return to_momentum(tilted).amplitudes


def _factored_slice(kept: ModeState, measured: ModeState, s: float) -> np.ndarray:
    """Unnormalized conditional amplitudes kept(x) * meas_tilde(s - x) on the kept grid."""
    g = measured.grid
    n = g.n_points
    ai = int(round((s + 0.5 * g.extent) / g.dq))
    eps = s - (-0.5 * g.extent + ai * g.dq)
    tilde = _shifted_transform(measured, eps)
    idx = (ai + n // 2 - np.arange(n)) % n
    return kept.amplitudes * tilde[idx]


def _factored_sample_masses(kept: ModeState, measured: ModeState) -> np.ndarray:
    """Per-sample outcome masses of measuring the measured mode after CZ, O(n log n).

    masses[a] = dp * dq * sum_m |kept_m|^2 |meas_tilde(p_a - x_m)|^2, evaluated
    as a circular convolution on the self-dual grid.
    """
    g = measured.grid
    n = g.n_points
    t = np.abs(to_momentum(measured).amplitudes) ** 2
    w = np.abs(kept.amplitudes) ** 2
    u = np.roll(t, -(n // 2))
    conv = np.fft.ifft(np.fft.fft(w) * np.fft.fft(u)).real
    return np.maximum(conv, 0.0) * g.dp * g.dq


def _factored_condition(
    kept: ModeState,
    measured: ModeState,
    det: DetectorParams,
    k: int,
) -> ConditionalEnsemble:
    """Conditional ensemble of the kept mode for pixel k of the measured mode."""
    g = measured.grid
    lo, hi = det.bin_interval(k)
    if det.sample_aligned(g):
        p = g.momentum_points
        nodes = p[(p >= lo) & (p < hi)]
        node_measure = np.full(len(nodes), g.dp)
    else:
        nodes, node_measure = _gauss_legendre(lo, hi, _quad_nodes_per_bin(det, g))
    comps = []
    total = 0.0
    for s, w_node in zip(nodes, node_measure):
        raw = _factored_slice(kept, measured, float(s))
        sq = float(np.sum(np.abs(raw) ** 2) * g.dq)
        weight = sq * w_node
        total += weight
        if weight > 0.0:
            comps.append((weight, ModeState(g, Rep.POSITION, raw / math.sqrt(sq))))
    if total < ZERO_MASS_TOL:
        raise ZeroMassBinError(f"bin k={k} carries probability {total:.3e}")
    return ConditionalEnsemble(components=tuple(comps), total_probability=total)


def _factored_bin_probability(
    kept: ModeState, measured: ModeState, det: DetectorParams, k: int
) -> float:
    g = measured.grid
    lo, hi = det.bin_interval(k)
    if det.sample_aligned(g):
        masses = _factored_sample_masses(kept, measured)
        p = g.momentum_points
        return float(np.sum(masses[(p >= lo) & (p < hi)]))
    nodes, wts = _gauss_legendre(lo, hi, _quad_nodes_per_bin(det, g))
    dens = [
        float(np.sum(np.abs(_factored_slice(kept, measured, float(s))) ** 2) * g.dq)
        for s in nodes
    ]
    return float(np.dot(wts, dens))


def _factored_bin_distribution(
    kept: ModeState, measured: ModeState, det: DetectorParams
) -> dict[int, float]:
    g = measured.grid
    if not det.sample_aligned(g):
        raise ValidationError(
            "the factored engine needs eta >= 2*dp to build a full outcome distribution"
        )
    masses = _factored_sample_masses(kept, measured)
    bins = det.bin_of(g.momentum_points)
    out: dict[int, float] = {}
    for k in np.unique(bins):
        out[int(k)] = float(np.sum(masses[bins == k]))
    return out


def _resolve_engine(engine: str, n_points: int) -> str:
    if engine == "auto":
        return "two_mode" if n_points <= TWO_MODE_MAX_POINTS else "factored"
    if engine not in ("two_mode", "factored"):
        raise ValidationError(f"unknown engine {engine!r}")
    return engine


# ---------------------------------------------------------------------------
# Fourier gadget


def fourier_gadget_target(psi: ModeState, sigma: float) -> ModeState:
    """Finite-squeezing target of the Fourier gadget: psi convolved with a
    width-sigma Gaussian, read as a momentum wavefunction."""
    pos = as_rep(psi, Rep.POSITION)
    g = pos.grid
    q = g.points
    if g.is_self_dual:
        kernel = np.exp(-(q**2) / (2.0 * sigma**2))
        ks = np.roll(kernel, -(g.n_points // 2))
        amp = np.fft.ifft(np.fft.fft(pos.amplitudes) * np.fft.fft(ks))
    else:
        p = g.momentum_points
        kernel = np.exp(-((p[:, None] - q[None, :]) ** 2) / (2.0 * sigma**2))
        amp = kernel @ pos.amplitudes
    return normalized(ModeState(g, Rep.MOMENTUM, amp))


def fourier_gadget(
    psi: ModeState,
    sigma: float,
    det: DetectorParams,
    postselect_k: int = 0,
    engine: str = "auto",
    compute_fidelities: bool = True,
) -> GadgetReport:
    """Post-selected measurement-based Fourier transform.

    Entangles psi with a sigma-squeezed ancilla through CZ, measures the
    input mode with resolution 2*eta, and conditions on pixel
    ``postselect_k``.  The report carries the pixel probability (for k=0,
    compared against the leading order 2*eta*sigma/sqrt(pi) in the
    diagnostics) and the conditional ensemble on the output arm; for k != 0
    the conditional state carries an uncorrected outcome-dependent phase and
    is reported as-is.
    """
    g = psi.grid
    eng = _resolve_engine(engine, g.n_points)
    pos = as_rep(psi, Rep.POSITION)
    ancilla = squeezed_momentum(sigma, g)
    if eng == "two_mode":
        st = apply_cz(tensor(pos, ancilla))
        prob = bin_probabilities(st, 1, det, k_range=[postselect_k], warn_tail=False)[
            postselect_k
        ]
        ens = project_bin(st, 1, postselect_k, det)
    else:
        _require_factorable(pos)
        kept = as_rep(ancilla, Rep.POSITION)
        prob = _factored_bin_probability(kept, pos, det, postselect_k)
        ens = _factored_condition(kept, pos, det, postselect_k)
    diagnostics: dict[str, float] = {
        "leading_order_probability": 2.0 * det.eta * sigma / SQRT_PI,
        "ensemble_purity": ens.purity(),
    }
    if compute_fidelities:
        diagnostics["fidelity_vs_ideal_fourier"] = ensemble_fidelity(ens, apply_fourier(pos))
        diagnostics["fidelity_vs_finite_squeezing_target"] = ensemble_fidelity(
            ens, fourier_gadget_target(pos, sigma)
        )
    return GadgetReport(
        outcome_k=postselect_k,
        outcome_value=det.bin_center(postselect_k),
        success_probability=prob,
        output=ens,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# GKP error correction


def gkp_error_correct(
    data: ModeState,
    ancilla_params: GkpParams,
    ancilla_noise: ShiftNoise,
    det: DetectorParams,
    seed: int | None = None,
    fixed_outcome_k: int | None = None,
    known_data_shift: tuple[float, float] | None = None,
    ancilla_state: ModeState | None = None,
    engine: str = "auto",
) -> GadgetReport:
    """Measure q mod sqrt(pi) of the data mode through a GKP ancilla and shift it back.

    The ancilla (|0> comb unless ``ancilla_state`` is supplied) passes through
    the shift-noise channel, is entangled to the data with CZ, and its
    momentum is measured with resolution 2*eta; the outcome pixel center p_k
    determines the corrective displacement by minus the centered
    representative of p_k mod sqrt(pi).  When the data mode's own shift
    (u1, v1) is known to the caller, the diagnostics report whether the
    recovery threshold |u1 - v2| <= sqrt(pi)/2 - eta held and whether the
    applied correction left a logical (+-sqrt(pi)) offset.

    Fixed outcomes win over the seeded sampler.  The returned ensemble is the
    corrected data mode; the measured mode is gone.
    """
    det.require_gkp_compatible()
    g = data.grid
    eng = _resolve_engine(engine, g.n_points)
    seq = np.random.SeedSequence(seed)
    noise_seed, outcome_seed = (int(s) for s in seq.generate_state(2))

    ancilla = ancilla_state if ancilla_state is not None else gkp_zero(ancilla_params, g)
    ancilla, (u2, v2) = apply_shift_noise(ancilla, ancilla_noise, seed=noise_seed)
    data_pos = as_rep(data, Rep.POSITION)
    anc_pos = as_rep(ancilla, Rep.POSITION)

    if eng == "two_mode":
        st = apply_cz(tensor(data_pos, anc_pos))
        probs = bin_probabilities(st, 2, det)
    else:
        _require_factorable(data_pos)
        probs = _factored_bin_distribution(data_pos, anc_pos, det)

    k = fixed_outcome_k if fixed_outcome_k is not None else sample_outcome(probs, outcome_seed)
    if k not in probs:
        probs[k] = (
            _factored_bin_probability(data_pos, anc_pos, det, k)
            if eng == "factored"
            else bin_probabilities(st, 2, det, k_range=[k], warn_tail=False)[k]
        )
    p_k = det.bin_center(k)
    correction = -centered_mod_sqrt_pi(p_k)

    if eng == "two_mode":
        raw = project_bin(st, 2, k, det)
    else:
        raw = _factored_condition(data_pos, anc_pos, det, k)
    corrected = ConditionalEnsemble(
        components=tuple((w, displace_q(s, correction)) for w, s in raw.components),
        total_probability=raw.total_probability,
    )

    diagnostics: dict[str, float] = {
        "measured_pk": p_k,
        "applied_correction": correction,
        "ancilla_u2": u2,
        "ancilla_v2": v2,
    }
    if known_data_shift is not None:
        u1, _v1 = known_data_shift
        margin = SQRT_PI / 2.0 - det.eta
        diagnostics["threshold_held"] = float(abs(u1 - v2) <= margin)
        net = u1 + correction
        diagnostics["net_position_offset"] = net
        diagnostics["logical_miscorrection"] = float(abs(net) > SQRT_PI / 2.0)
    return GadgetReport(
        outcome_k=k,
        outcome_value=p_k,
        success_probability=probs[k],
        output=corrected,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# error-corrected Fourier pipeline


def error_corrected_fourier(
    psi: ModeState,
    gkp: GkpParams,
    sigma: float,
    det: DetectorParams,
    seed: int | None = None,
    fixed_outcome_k: int | None = None,
    engine: str = "auto",
) -> GadgetReport:
    """Fourier gadget followed by GKP error correction in q.

    Only |+> GKP ancillae are assumed available; the |0> comb wanted by the
    correction step is produced inline by a second post-selected Fourier
    gadget acting on |+>.  Mixed intermediate states are carried forward by
    their principal component (the pixel ensembles are nearly pure for the
    resolutions of interest; purities are reported).  The overall success
    probability is the product of the three conditioning probabilities.

    The syndrome tooth index is a random integer; on a finite-envelope comb
    the far teeth condition slightly differently, so deterministic
    experiments can pin the correction outcome with ``fixed_outcome_k``.
    """
    g = psi.grid
    fg_data = fourier_gadget(psi, sigma, det, postselect_k=0, engine=engine)
    data1 = fg_data.output.principal_component()

    fg_anc = fourier_gadget(gkp_plus(gkp, g), sigma, det, postselect_k=0, engine=engine)
    anc0 = fg_anc.output.principal_component()

    ec = gkp_error_correct(
        data1,
        gkp,
        ShiftNoise.none(),
        det,
        seed=seed,
        fixed_outcome_k=fixed_outcome_k,
        ancilla_state=anc0,
        engine=engine,
    )
    success = (
        fg_data.success_probability * fg_anc.success_probability * ec.success_probability
    )
    diagnostics: dict[str, float] = {
        "probability_fourier_stage": fg_data.success_probability,
        "probability_ancilla_stage": fg_anc.success_probability,
        "probability_correction_stage": ec.success_probability,
        "purity_fourier_stage": fg_data.diagnostics["ensemble_purity"],
        "purity_ancilla_stage": fg_anc.diagnostics["ensemble_purity"],
        "fidelity_vs_ideal_fourier": ensemble_fidelity(ec.output, apply_fourier(psi)),
        "uncorrected_fidelity_vs_ideal_fourier": fg_data.diagnostics[
            "fidelity_vs_ideal_fourier"
        ],
    }
    return GadgetReport(
        outcome_k=ec.outcome_k,
        outcome_value=ec.outcome_value,
        success_probability=success,
        output=ec.output,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# DV reference simulator


@dataclass(frozen=True)
class QubitState:
    """Dense statevector on up to 14 qubits; qubit j is bit j of the index."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        if not (1 <= self.n_qubits <= 14):
            raise ValidationError(f"n_qubits must be in [1, 14], got {self.n_qubits}")
        a = np.asarray(self.amplitudes, dtype=np.complex128)
        if a.shape != (2**self.n_qubits,):
            raise ValidationError(
                f"amplitude length {a.shape} does not match {self.n_qubits} qubits"
            )
        n = np.linalg.norm(a)
        if abs(n - 1.0) > 1e-12:
            raise ValidationError(f"state norm {n} deviates from 1 by more than 1e-12")
        a.flags.writeable = False
        object.__setattr__(self, "amplitudes", a)


def qubit_state(alpha: complex, beta: complex) -> QubitState:
    """Single qubit alpha|0> + beta|1>, normalized."""
    v = np.array([alpha, beta], dtype=np.complex128)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValidationError("zero state")
    return QubitState(1, v / n)


def dv_hadamard_gadget(
    psi: QubitState,
    postselect: int | None = None,
    seed: int | None = None,
) -> tuple[QubitState, int, float]:
    """The Hadamard gadget: |psi>|+>, CZ, X-basis measurement of qubit 1.

    Returns (output qubit, h, outcome probability).  The output equals
    X^h H |psi> exactly; the probability of either outcome is 1/2 regardless
    of the input.  ``postselect`` forces outcome +1 or -1; otherwise the
    outcome is sampled with the given seed.
    """
    if psi.n_qubits != 1:
        raise ValidationError("the Hadamard gadget takes a single-qubit input")
    a = psi.amplitudes
    # joint amplitudes amp[x1, x2] of |psi> |+> after CZ
    amp = np.outer(a, np.array([1.0, 1.0]) / math.sqrt(2.0))
    amp[1, 1] *= -1.0
    branches = {}
    for h, sign in ((0, 1.0), (1, -1.0)):
        out = (amp[0, :] + sign * amp[1, :]) / math.sqrt(2.0)
        branches[h] = (float(np.sum(np.abs(out) ** 2)), out)
    if postselect is not None:
        if postselect not in (1, -1):
            raise ValidationError("postselect must be +1 or -1")
        h = 0 if postselect == 1 else 1
    else:
        u = float(np.random.default_rng(seed).random())
        h = 0 if u < branches[0][0] else 1
    prob, out = branches[h]
    if prob <= 0.0:
        raise NumericalError("conditioning outcome has zero probability")
    return QubitState(1, out / math.sqrt(prob)), h, prob


def _hadamard_transform_all(amp: np.ndarray, n: int) -> np.ndarray:
    a = amp.reshape((2,) * n)
    for axis in range(n):
        a = np.moveaxis(a, axis, 0)
        a = np.stack([a[0] + a[1], a[0] - a[1]]) / math.sqrt(2.0)
        a = np.moveaxis(a, 0, axis)
    return a.reshape(-1)


def dv_iqp_circuit(
    n_qubits: int,
    gates: Sequence[tuple[Iterable[int], float]],
    postselect: Sequence[tuple[int, int]] | None = None,
) -> np.ndarray:
    """Statevector IQP circuit: |+>^n input, Z-diagonal phases, X-basis output.

    Each gate is (qubit subset, theta) implementing exp(i theta prod_j Z_j).
    Returns the length 2^n outcome distribution, where bit j of the index is
    the qubit-j outcome (0 for +, 1 for -).  With ``postselect`` given as
    (qubit, outcome in {+1, -1}) pairs, the renormalized conditional
    distribution is returned (zero off the conditioning set); conditioning on
    a zero-probability event raises NumericalError.
    """
    if not (1 <= n_qubits <= 14):
        raise ValidationError(f"n_qubits must be in [1, 14], got {n_qubits}")
    dim = 2**n_qubits
    amp = np.full(dim, 1.0 / math.sqrt(dim), dtype=np.complex128)
    idx = np.arange(dim)
    for subset, theta in gates:
        mask = 0
        for j in subset:
            if not 0 <= j < n_qubits:
                raise ValidationError(f"gate touches qubit {j} outside the register")
            mask |= 1 << j
        bits = idx & mask
        parity = np.zeros(dim, dtype=np.int64)
        b = bits
        while np.any(b):
            parity ^= b & 1
            b >>= 1
        amp = amp * np.exp(1j * theta * np.where(parity, -1.0, 1.0))
    amp = _hadamard_transform_all(amp, n_qubits)
    probs = np.abs(amp) ** 2
    if postselect:
        keep = np.ones(dim, dtype=bool)
        for qubit, outcome in postselect:
            if outcome not in (1, -1):
                raise ValidationError("postselect outcomes must be +1 or -1")
            want = 0 if outcome == 1 else 1
            keep &= ((idx >> qubit) & 1) == want
        mass = float(np.sum(probs[keep]))
        if mass <= 0.0:
            raise NumericalError("conditioning event has zero probability")
        probs = np.where(keep, probs, 0.0) / mass
    return probs
