import math

import numpy as np
import pytest

from cviqp.errors import ValidationError
from cviqp.gadgets import (
    ShiftNoise,
    apply_shift_noise,
    centered_mod_sqrt_pi,
    error_corrected_fourier,
    fourier_gadget,
    fourier_gadget_target,
    gkp_error_correct,
)
from cviqp.gates import displace_p, displace_q
from cviqp.homodyne import DetectorParams, ensemble_fidelity
from cviqp.quadgrid import (
    ModeState,
    Rep,
    fidelity_pure,
    make_grid,
    normalized,
    self_dual_grid,
)
from cviqp.states import GkpParams, gkp_one, gkp_plus, gkp_zero

from conftest import random_smooth_state

SQRT_PI = math.sqrt(math.pi)


def vacuum(grid):
    q = grid.points
    return normalized(ModeState(grid, Rep.POSITION, np.exp(-(q**2) / 2.0)))


def oracle_center_bin_probability(psi: ModeState, sigma: float, eta: float) -> float:
    """Independent 1-D quadrature of the projector expectation for the k=0 pixel.

    Reduces the 4-fold integral to the autocorrelation of psi:
    P = (2 eta sigma / sqrt(pi)) * (1 / 2 sigma sqrt(pi)) *
        integral du exp(-u^2/(4 sigma^2)) C(u) sinc(eta u),
    with C(u) the position autocorrelation, evaluated here by direct shifting.
    """
    grid = psi.grid
    q = grid.points
    n = grid.n_points
    amps = psi.amplitudes
    shifts = np.arange(-n // 2, n // 2)
    corr = np.fft.ifft(np.abs(np.fft.fft(amps)) ** 2).real * grid.dq
    corr = np.roll(corr, n // 2)  # index i -> lag (i - n/2) * dq
    u = shifts * grid.dq
    kern = np.exp(-(u**2) / (4.0 * sigma**2)) / (2.0 * sigma * math.sqrt(math.pi))
    sinc = np.sinc(eta * u / math.pi)
    lead = 2.0 * eta * sigma / SQRT_PI
    return float(lead * np.sum(kern * corr * sinc) * grid.dq)


class TestCenteredMod:
    def test_representative_range(self):
        for x in (-7.3, -1.0, 0.0, 0.2, SQRT_PI, 2 * SQRT_PI + 0.3, 11.4):
            r = centered_mod_sqrt_pi(x)
            assert -SQRT_PI / 2 <= r < SQRT_PI / 2
            assert (x - r) / SQRT_PI == pytest.approx(round((x - r) / SQRT_PI), abs=1e-9)

    def test_exact_values(self):
        assert centered_mod_sqrt_pi(0.2) == pytest.approx(0.2, abs=1e-12)
        assert centered_mod_sqrt_pi(SQRT_PI) == pytest.approx(0.0, abs=1e-12)
        assert centered_mod_sqrt_pi(-2 * SQRT_PI) == pytest.approx(0.0, abs=1e-12)


class TestShiftNoise:
    def test_zero_noise_is_identity(self, grid_small):
        psi = random_smooth_state(grid_small, seed=0)
        out, (u, v) = apply_shift_noise(psi, ShiftNoise.none(), seed=1)
        assert (u, v) == (0.0, 0.0)
        assert np.array_equal(out.amplitudes, psi.amplitudes)

    def test_fixed_shift_moves_density(self):
        grid = make_grid(1024, 40.0)
        out, (u, v) = apply_shift_noise(vacuum(grid), ShiftNoise(fixed_u=0.3, fixed_v=0.0), seed=2)
        assert (u, v) == (0.3, 0.0)
        peak = grid.points[np.argmax(out.density())]
        assert abs(peak - 0.3) <= grid.dq

    def test_fixed_wins_over_seed(self, grid_small):
        psi = random_smooth_state(grid_small, seed=3)
        noise = ShiftNoise(u_std=1.0, v_std=1.0, fixed_u=0.1, fixed_v=-0.2)
        _, shifts_a = apply_shift_noise(psi, noise, seed=4)
        _, shifts_b = apply_shift_noise(psi, noise, seed=999)
        assert shifts_a == shifts_b == (0.1, -0.2)

    def test_sampled_shift_statistics(self, grid_small):
        # statistical oracle: empirical stds within 3% over 1e4 seeded draws
        noise = ShiftNoise(u_std=0.7, v_std=0.25)
        psi = random_smooth_state(grid_small, seed=6)
        shifts = [apply_shift_noise(psi, noise, seed=s)[1] for s in range(10_000)]
        assert np.std([s[0] for s in shifts]) == pytest.approx(0.7, rel=0.03)
        assert np.std([s[1] for s in shifts]) == pytest.approx(0.25, rel=0.03)

    def test_negative_std_rejected(self):
        with pytest.raises(ValidationError):
            ShiftNoise(u_std=-0.1)


@pytest.fixture(scope="module")
def gadget_grid():
    return make_grid(4096, 256.0)


class TestFourierGadget:
    def test_center_bin_probability_leading_order(self, gadget_grid):
        rep = fourier_gadget(vacuum(gadget_grid), 0.1, DetectorParams(eta=0.01))
        lead = rep.diagnostics["leading_order_probability"]
        assert lead == pytest.approx(1.1284e-3, rel=1e-4)
        assert rep.success_probability == pytest.approx(lead, rel=0.05)

    def test_probability_matches_independent_oracle(self, gadget_grid):
        psi = vacuum(gadget_grid)
        rep = fourier_gadget(psi, 0.1, DetectorParams(eta=0.01), compute_fidelities=False)
        oracle = oracle_center_bin_probability(psi, 0.1, 0.01)
        assert rep.success_probability == pytest.approx(oracle, rel=1e-6)

    def test_output_fidelities(self, gadget_grid):
        rep = fourier_gadget(vacuum(gadget_grid), 0.1, DetectorParams(eta=0.01))
        assert rep.diagnostics["fidelity_vs_ideal_fourier"] > 0.98
        assert rep.diagnostics["fidelity_vs_finite_squeezing_target"] > 0.999

    def test_fidelity_improves_with_better_resources(self):
        grid = self_dual_grid(65536)
        psi = vacuum(grid)
        rep_a = fourier_gadget(psi, 0.1, DetectorParams(eta=0.01), engine="factored")
        rep_b = fourier_gadget(psi, 0.05, DetectorParams(eta=0.005), engine="factored")
        assert (
            rep_b.diagnostics["fidelity_vs_ideal_fourier"]
            > rep_a.diagnostics["fidelity_vs_ideal_fourier"]
        )

    def test_deviation_from_leading_order_shrinks_quadratically(self, gadget_grid):
        # the eta -> 0 coefficient carries the finite-sigma autocorrelation factor
        # (1/sqrt(1 + sigma^2) for the vacuum); relative to it the residual is O(eta^2)
        psi = vacuum(gadget_grid)
        sigma = 0.1
        b0 = oracle_center_bin_probability(psi, sigma, 1e-7) / (2e-7 * sigma / SQRT_PI)
        devs = []
        for eta in (0.02, 0.01, 0.005):
            rep = fourier_gadget(psi, sigma, DetectorParams(eta=eta), compute_fidelities=False)
            lead = rep.diagnostics["leading_order_probability"]
            devs.append(abs(rep.success_probability / lead - b0))
        assert devs[1] / devs[0] < 0.30
        assert devs[2] / devs[1] < 0.30

    def test_engines_agree_sample_aligned(self):
        grid = self_dual_grid(1024)
        psi = random_smooth_state(grid, seed=8)
        det = DetectorParams(eta=0.35)
        rep_two = fourier_gadget(psi, 0.4, det, engine="two_mode")
        rep_fac = fourier_gadget(psi, 0.4, det, engine="factored")
        assert rep_fac.success_probability == pytest.approx(rep_two.success_probability, abs=1e-13)
        for (wa, sa), (wb, sb) in zip(rep_two.output.components, rep_fac.output.components):
            assert wa == pytest.approx(wb, abs=1e-13)
            assert np.max(np.abs(sa.amplitudes - sb.amplitudes)) < 1e-12

    def test_engines_agree_sub_grid(self):
        grid = self_dual_grid(1024)
        psi = random_smooth_state(grid, seed=9)
        det = DetectorParams(eta=0.01)
        rep_two = fourier_gadget(psi, 0.4, det, engine="two_mode")
        rep_fac = fourier_gadget(psi, 0.4, det, engine="factored")
        assert rep_fac.success_probability == pytest.approx(rep_two.success_probability, rel=1e-12)

    def test_factored_needs_self_dual(self, grid_small):
        with pytest.raises(ValidationError):
            fourier_gadget(random_smooth_state(grid_small, seed=10), 1.0, DetectorParams(eta=0.5), engine="factored")

    def test_target_builder_matches_direct_integration(self, grid_small):
        # dense-kernel route vs the library construction on a non-self-dual grid
        psi = random_smooth_state(grid_small, seed=11)
        sigma = 0.5
        target = fourier_gadget_target(psi, sigma)
        p = grid_small.momentum_points
        q = grid_small.points
        kernel = np.exp(-((p[:, None] - q[None, :]) ** 2) / (2 * sigma**2))
        direct = kernel @ psi.amplitudes
        direct = direct / np.sqrt(np.sum(np.abs(direct) ** 2) * grid_small.dp)
        assert np.max(np.abs(target.amplitudes - direct)) < 1e-10


@pytest.fixture(scope="module")
def gc_grid():
    return self_dual_grid(8192)


class TestGkpErrorCorrect:
    def test_small_shift_corrected_fidelity_improves(self, gc_grid):
        params = GkpParams.tied(0.2)
        det = DetectorParams(eta=SQRT_PI / 8)
        clean = gkp_plus(params, gc_grid)
        data = displace_q(clean, 0.2)
        pre = fidelity_pure(clean, data)
        rep = gkp_error_correct(
            data, params, ShiftNoise.none(), det, seed=3, known_data_shift=(0.2, 0.0)
        )
        post = ensemble_fidelity(rep.output, clean)
        assert rep.diagnostics["threshold_held"] == 1.0
        assert post > pre
        # residual bounded by resolution plus the ancilla width scale
        assert abs(rep.diagnostics["net_position_offset"]) <= det.eta + 3 * params.delta_envelope

    def test_full_logical_shift_invisible(self, gc_grid):
        # a sqrt(pi) shift commutes with the mod-sqrt(pi) syndrome: the
        # correction stays near zero, the |0> comb lands on the |1> comb, and
        # the ground-truth diagnostic flags the logical error
        params = GkpParams.tied(0.2)
        det = DetectorParams(eta=SQRT_PI / 8)
        zero = gkp_zero(params, gc_grid)
        one = gkp_one(params, gc_grid)
        data = displace_q(zero, SQRT_PI)
        rep = gkp_error_correct(
            data, params, ShiftNoise.none(), det, seed=4, known_data_shift=(SQRT_PI, 0.0)
        )
        assert abs(rep.diagnostics["applied_correction"]) < 2 * det.eta
        assert rep.diagnostics["logical_miscorrection"] == 1.0
        assert ensemble_fidelity(rep.output, one) > ensemble_fidelity(rep.output, zero) + 0.5

    def test_threshold_boundary_flagged(self, gc_grid):
        params = GkpParams.tied(0.2)
        det = DetectorParams(eta=SQRT_PI / 8)
        u1 = SQRT_PI / 2 - det.eta + 0.01
        data = displace_q(gkp_plus(params, gc_grid), u1)
        rep = gkp_error_correct(
            data, params, ShiftNoise.none(), det, seed=5, known_data_shift=(u1, 0.0)
        )
        assert rep.diagnostics["threshold_held"] == 0.0

    def test_engines_agree(self):
        grid = self_dual_grid(4096)
        params = GkpParams.tied(0.25)
        det = DetectorParams(eta=SQRT_PI / 4)
        data = displace_q(gkp_plus(params, grid), 0.2)
        rep_two = gkp_error_correct(data, params, ShiftNoise.none(), det, seed=7, engine="two_mode")
        rep_fac = gkp_error_correct(data, params, ShiftNoise.none(), det, seed=7, engine="factored")
        assert rep_two.outcome_k == rep_fac.outcome_k
        assert rep_two.success_probability == pytest.approx(rep_fac.success_probability, abs=1e-13)

    def test_noise_replacement(self):
        # data position noise (std 0.3) is replaced by ancilla-plus-resolution
        # noise; needs an ancilla whose intrinsic teeth are narrow next to s_a
        grid = self_dual_grid(65536)
        params_data = GkpParams.tied(0.25)
        params_anc = GkpParams.tied(0.05)
        det = DetectorParams(eta=SQRT_PI / 8)
        clean = gkp_plus(params_data, grid)
        s_d, s_a = 0.3, 0.05
        rng = np.random.default_rng(123)
        bound = 2.0 * (s_a + det.eta)
        residuals = []
        wraps = 0
        total = 0
        for trial in range(60):
            u1 = float(rng.normal(0.0, s_d))
            rep = gkp_error_correct(
                displace_q(clean, u1),
                params_anc,
                ShiftNoise(u_std=0.0, v_std=s_a),
                det,
                seed=trial,
                known_data_shift=(u1, 0.0),
                engine="factored",
            )
            if rep.diagnostics["threshold_held"] > 0.5:
                total += 1
                if rep.diagnostics["logical_miscorrection"] > 0.5:
                    wraps += 1  # tooth-tail wrap: the logical-error channel
                else:
                    residuals.append(rep.diagnostics["net_position_offset"])
        assert total > 40
        spread = float(np.sqrt(np.mean(np.square(residuals))))
        assert spread <= bound
        assert spread < s_d  # no longer governed by the data noise
        assert wraps / total < 0.10

    def test_incompatible_binning_rejected(self, gc_grid):
        params = GkpParams.tied(0.2)
        data = gkp_plus(params, gc_grid)
        with pytest.raises(ValidationError):
            gkp_error_correct(data, params, ShiftNoise.none(), DetectorParams(eta=0.2), seed=0)


class TestErrorCorrectedFourier:
    def test_corrects_input_momentum_errors(self, gc_grid):
        # a momentum kick on the input becomes a position error after the
        # Fourier stage, which the q correction removes; frozen comparison:
        # corrected 0.62 vs uncorrected 0.08 at v = 0.35
        params = GkpParams.tied(0.15)
        det = DetectorParams(eta=SQRT_PI / 16)
        zero = gkp_zero(params, gc_grid)
        noisy = displace_p(gkp_plus(params, gc_grid), 0.35)
        corrected = error_corrected_fourier(noisy, params, 0.15, det, seed=5)
        uncorrected = fourier_gadget(noisy, 0.15, det)
        fid_corr = ensemble_fidelity(corrected.output, zero)
        fid_unc = ensemble_fidelity(uncorrected.output, zero)
        assert fid_corr > fid_unc + 0.3
        assert fid_corr > 0.5

    def test_success_probability_is_stage_product(self, gc_grid):
        params = GkpParams.tied(0.15)
        det = DetectorParams(eta=SQRT_PI / 16)
        rep = error_corrected_fourier(gkp_plus(params, gc_grid), params, 0.15, det, seed=6)
        product = (
            rep.diagnostics["probability_fourier_stage"]
            * rep.diagnostics["probability_ancilla_stage"]
            * rep.diagnostics["probability_correction_stage"]
        )
        assert rep.success_probability == pytest.approx(product, rel=1e-6)

    def test_fidelity_improves_with_all_resources(self, gc_grid):
        # resource-improvement trend of the full pipeline (modal syndrome);
        # frozen endpoints 0.744 (0.15 resources) -> 0.886 (0.1/0.03 resources)
        params_a = GkpParams.tied(0.15)
        rep_a = error_corrected_fourier(
            gkp_plus(params_a, gc_grid), params_a, 0.15, DetectorParams(eta=SQRT_PI / 16),
            fixed_outcome_k=0,
        )
        grid_b = self_dual_grid(131072)
        params_b = GkpParams.tied(0.1)
        rep_b = error_corrected_fourier(
            gkp_plus(params_b, grid_b), params_b, 0.03, DetectorParams(eta=SQRT_PI / 64),
            fixed_outcome_k=0, engine="factored",
        )
        fid_a = rep_a.diagnostics["fidelity_vs_ideal_fourier"]
        fid_b = rep_b.diagnostics["fidelity_vs_ideal_fourier"]
        assert fid_b > fid_a
        assert fid_b > 0.85
        # the uncorrected stage approaches the ideal transform in the same limit
        assert rep_b.diagnostics["uncorrected_fidelity_vs_ideal_fourier"] > 0.98
