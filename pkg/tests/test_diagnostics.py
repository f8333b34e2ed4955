import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oscillab.diagnostics import (
    DiagnosticsConfig,
    infinity_norm,
    monotonicity_check,
    nyquist_seed,
    oscillation_check,
    run_simulation,
    stability_check,
)
from oscillab.problems import (
    BoundaryCondition,
    IBVP,
    default_ibvp,
    equation_by_name,
)
from oscillab.spectral import heat_ftcs_eigenvalues

CFG = DiagnosticsConfig()


class TestInfinityNorm:
    def test_examples(self):
        assert infinity_norm(np.array([1.0, -3.0, 2.0])) == 3.0
        assert infinity_norm(np.zeros(4)) == 0.0

    def test_bounded_by_l2(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            v = rng.normal(size=rng.integers(1, 50))
            assert infinity_norm(v) <= np.linalg.norm(v) + 1e-15


class TestStabilityCheck:
    def test_moderate_growth_passes(self):
        assert stability_check(np.array([10.0]), 1.0, CFG)

    def test_threshold_is_inclusive(self):
        assert not stability_check(np.array([1e6]), 1.0, CFG)
        assert stability_check(np.array([1e6 - 1]), 1.0, CFG)

    def test_zero_initial_norm_bypasses(self):
        assert stability_check(np.array([1e30]), 0.0, CFG)

    def test_nonfinite_always_fails(self):
        assert not stability_check(np.array([np.nan]), 0.0, CFG)
        assert not stability_check(np.array([np.inf]), 1.0, CFG)

    def test_unstable_ftcs_diverges_and_records_step(self):
        ibvp = default_ibvp("heat", "dirichlet")
        cfg = DiagnosticsConfig(max_steps=2000)
        flags = run_simulation(ibvp, "ftcs", 0.1, 0.6 * 0.01, cfg)
        assert not flags.stable
        assert flags.diverged_at_step is not None
        assert flags.diverged_at_step <= 2000
        assert flags.max_inf_norm_ratio >= CFG.cap_K


class TestOscillationCheck:
    def test_monotone_triple(self):
        one = np.ones(1)
        assert not oscillation_check(1 * one, 2 * one, 3 * one, CFG)

    def test_flip_flop_triple(self):
        one = np.ones(1)
        assert oscillation_check(1 * one, 2 * one, 1 * one, CFG)

    def test_deadband_zeroes_noise(self):
        one = np.ones(1)
        eps = 1e-8
        assert not oscillation_check(1 * one, (1 + eps / 2) * one, 1 * one,
                                     CFG, deadband=eps)

    def test_min_nodes_threshold(self):
        cfg = DiagnosticsConfig(osc_min_nodes=2)
        a = np.array([1.0, 1.0, 1.0])
        b = np.array([2.0, 2.0, 1.5])
        c = np.array([1.0, 3.0, 1.0])
        # only nodes 0 and 2 flip; node 1 keeps climbing
        assert oscillation_check(a, b, c, cfg)
        cfg3 = DiagnosticsConfig(osc_min_nodes=3)
        assert not oscillation_check(a, b, c, cfg3)

    @settings(max_examples=60, deadline=None)
    @given(st.floats(min_value=-50, max_value=50),
           st.lists(st.floats(min_value=-5, max_value=5), min_size=2,
                    max_size=8))
    def test_translation_invariant(self, shift, base):
        rng = np.random.default_rng(1)
        u0 = np.asarray(base)
        u1 = u0 + rng.normal(size=u0.size)
        u2 = u1 + rng.normal(size=u0.size)
        before = oscillation_check(u0, u1, u2, CFG, deadband=1e-9)
        after = oscillation_check(u0 + shift, u1 + shift, u2 + shift, CFG,
                                  deadband=1e-9)
        assert before == after


class TestMonotonicityCheck:
    def test_decaying_mode_is_monotone(self):
        lam = 0.8
        profile = np.sin(np.pi * np.linspace(0.1, 0.9, 9))
        trace = np.array([profile * lam**n for n in range(20)])
        assert monotonicity_check(trace)

    def test_alternating_mode_is_not(self):
        lam = -0.8
        profile = np.sin(np.pi * np.linspace(0.1, 0.9, 9))
        trace = np.array([profile * lam**n for n in range(20)])
        assert not monotonicity_check(trace)

    def test_spatial_variant(self):
        ramp = np.array([[0.0, 1.0, 2.0], [0.0, 0.5, 1.0]])
        assert monotonicity_check(ramp, axis=1)
        bump = np.array([[0.0, 1.0, 0.0]])
        assert not monotonicity_check(bump, axis=1)

    def test_fisher_front_not_temporally_monotone(self):
        ibvp = default_ibvp("fisher", "dirichlet")
        flags = run_simulation(ibvp, "btcs-linapprox", 0.1, 0.005)
        assert not flags.temporally_monotone
        assert flags.monotonicity_limited
        assert flags.transient_skipped > 0


class TestNyquistSeed:
    def test_zero_amplitude_is_identity(self):
        u = np.array([1.0, 2.0])
        np.testing.assert_array_equal(nyquist_seed(u, 0.0), u)

    def test_amplitude_scales_with_profile(self):
        u = np.sin(np.pi * np.linspace(0.1, 0.9, 9))
        seeded = nyquist_seed(u, 0.01)
        assert np.max(np.abs(seeded - u)) <= 0.01 * np.max(np.abs(u)) + 1e-15
        assert np.max(np.abs(seeded - u)) > 0.005


class TestRunSimulation:
    def test_smooth_ftcs_is_monotone(self):
        ibvp = default_ibvp("heat", "dirichlet")
        flags = run_simulation(ibvp, "ftcs", 0.1, 0.2 * 0.01, mode_seed=0.01)
        assert flags.stable
        assert not flags.oscillatory
        assert flags.temporally_monotone

    def test_seeded_high_mode_gives_stable_oscillation(self):
        # r = 0.4 puts the top mode at a negative eigenvalue; a strong seed
        # makes the flip-flop visible while the run stays bounded.
        eq = equation_by_name("heat")
        bc = BoundaryCondition("dirichlet")
        ibvp = IBVP(equation=eq, length=1.0, bc=bc,
                    initial_condition=lambda x: (math.sin(math.pi * x)
                                                 + 0.3 * math.sin(9 * math.pi * x)),
                    final_time=30.0)
        flags = run_simulation(ibvp, "ftcs", 0.1, 0.4 * 0.01)
        assert flags.stable
        assert flags.oscillatory
        assert not flags.temporally_monotone
        assert heat_ftcs_eigenvalues(0.4, 9).eigenvalues.min() < 0

    def test_unstable_ftcs(self):
        ibvp = default_ibvp("heat", "dirichlet")
        flags = run_simulation(ibvp, "ftcs", 0.1, 0.6 * 0.01, mode_seed=0.01)
        assert not flags.stable
        assert flags.diverged_at_step is not None

    def test_determinism(self):
        ibvp = default_ibvp("heat", "dirichlet")
        a = run_simulation(ibvp, "cn", 0.1, 0.05, mode_seed=0.01)
        b = run_simulation(ibvp, "cn", 0.1, 0.05, mode_seed=0.01)
        assert a == b

    def test_stable_cells_respect_cap(self):
        ibvp = default_ibvp("heat", "dirichlet")
        for scheme, dt in (("ftcs", 0.002), ("btcs", 0.3), ("cn", 0.1)):
            flags = run_simulation(ibvp, scheme, 0.1, dt, mode_seed=0.01)
            assert flags.stable
            assert flags.max_inf_norm_ratio <= CFG.cap_K

    def test_positive_spectrum_never_fires(self):
        # Conjecture-1 direction: below the positive-eigenvalue bound the
        # default profile decays without a single flip.
        ibvp = default_ibvp("heat", "dirichlet")
        for dx in (0.2, 1.0 / 3.0):
            n = round(1 / dx) - 1
            s_top = math.sin(n * math.pi / (2 * (n + 1))) ** 2
            dt = 0.9 * dx**2 / (4 * s_top)
            flags = run_simulation(ibvp, "ftcs", dx, dt, mode_seed=0.01)
            assert flags.stable and not flags.oscillatory

    def test_collect_trace(self):
        ibvp = default_ibvp("heat", "dirichlet", final_time=0.1)
        flags, trace = run_simulation(ibvp, "btcs", 0.25, 0.01,
                                      collect_trace=True)
        assert trace[0][0] == 0
        assert trace[-1][0] == flags.steps_run
        assert all(t == pytest.approx(k * 0.01) for k, t, _ in trace)

    def test_cn_front_oscillates(self):
        # far above the straight onset front the time-averaged scheme rings
        ibvp = default_ibvp("heat", "dirichlet")
        flags = run_simulation(ibvp, "cn", 0.1, 0.5, mode_seed=0.01)
        assert flags.stable
        assert flags.oscillatory

    def test_config_validation(self):
        with pytest.raises(ValueError, match="cap_K"):
            DiagnosticsConfig(cap_K=0.5)
        with pytest.raises(ValueError, match="three levels"):
            DiagnosticsConfig(max_steps=2)
