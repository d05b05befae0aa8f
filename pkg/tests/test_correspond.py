import numpy as np
import pytest

from gaudinkp.calogero import char_poly_direct
from gaudinkp.correspond import (
    expected_multiset,
    initial_lax,
    initial_velocity_check,
    refine_state_mp,
    solve_sector_spectrum,
    spectrum_identity_residual,
    twist_multiplicity_check,
)
from gaudinkp.hilbert import joint_diagonalize, random_model, sectors
from gaudinkp.master import state_value, master_t
from gaudinkp.suites import random_times
from gaudinkp.symfun import TimeVector


class TestInitialLax:
    def test_n1_is_twist_eigenvalue(self):
        model = random_model(3, 1, seed=6)
        spec = joint_diagonalize(model)
        for state in spec:
            rec = initial_lax(state, model)
            assert rec.Y0.shape == (1, 1)
            assert rec.Y0[0, 0] == pytest.approx(state.H_values[0] / model.hbar)
            dev = min(abs(rec.Y0_spectrum[0] - k) for k in model.twist)
            assert dev < 1e-12

    def test_pure_state_jordan_traces(self, small):
        # (v_a)^(x n): Y0 has the single eigenvalue k_a, tr Y0^j = n k_a^j
        model, spec = small
        n = model.n
        for a in range(model.N):
            m = tuple(n if b == a else 0 for b in range(model.N))
            state = spec.in_sector(m)[0]
            rec = initial_lax(state, model)
            P = np.eye(n, dtype=complex)
            for j in range(1, n + 1):
                P = P @ rec.Y0
                assert np.trace(P) == pytest.approx(n * model.twist[a] ** j, rel=1e-10)
            # single Jordan block: geometric multiplicity one
            rank = np.linalg.matrix_rank(rec.Y0 - model.twist[a] * np.eye(n), tol=1e-8)
            assert rank == n - 1

    def test_off_diagonal_pattern(self, tiny):
        model, spec = tiny
        rec = initial_lax(spec.states[0], model)
        x = model.x
        for i in range(model.n):
            for k in range(model.n):
                if i != k:
                    assert rec.Y0[i, k] == pytest.approx(model.hbar / (x[k] - x[i]))


class TestTwistMultiplicity:
    def test_expected_multiset(self, tiny):
        model, spec = tiny
        rec = initial_lax(spec.in_sector((1, 1))[0], model)
        want = expected_multiset(rec, model)
        assert sorted(want, key=lambda z: (z.real, z.imag)) == sorted(
            model.twist, key=lambda z: (z.real, z.imag)
        )

    def test_all_states_match_refined(self, tiny):
        model, spec = tiny
        for state in spec:
            rec = initial_lax(state, model)
            rep = twist_multiplicity_check(rec, model, refine=True)
            assert rep["max_deviation"] <= 1e-6

    def test_n3_jordan_needs_refinement(self, small):
        # the raw float64 route smears a 3-block beyond 1e-6; the refined
        # route certifies the multiset to working precision
        model, spec = small
        worst_refined = 0.0
        for state in spec:
            rec = initial_lax(state, model)
            rep = twist_multiplicity_check(rec, model, refine=True)
            worst_refined = max(worst_refined, rep["max_deviation"])
        assert worst_refined <= 1e-6
        pure = spec.in_sector((model.n, 0))[0]
        raw = twist_multiplicity_check(initial_lax(pure, model), model, refine=False)
        assert raw["max_deviation"] > 1e-6  # double precision alone is not enough

    def test_refinement_residual(self, small):
        model, spec = small
        H, res = refine_state_mp(spec.states[1], model, dps=40)
        assert res < 1e-30
        assert np.allclose(
            [complex(h) for h in H], spec.states[1].H_values, atol=1e-10
        )


class TestSpectrumIdentity:
    def test_n1_direct(self):
        model = random_model(2, 1, seed=8)
        spec = joint_diagonalize(model)
        for state in spec:
            rec = initial_lax(state, model)
            assert spectrum_identity_residual(rec, model) <= 1e-12

    def test_all_states(self, tiny):
        model, spec = tiny
        for state in spec:
            rec = initial_lax(state, model)
            assert spectrum_identity_residual(rec, model) <= 1e-8

    def test_desk_scale_sweep(self):
        # N <= 3, n <= 4 grid, a model each
        for N, n, seed in [(2, 4, 21), (3, 2, 22)]:
            model = random_model(N, n, seed=seed)
            spec = joint_diagonalize(model, seed=seed)
            for state in spec:
                rec = initial_lax(state, model)
                assert spectrum_identity_residual(rec, model) <= 1e-8

    def test_matches_lax_char_poly(self, tiny):
        # one code path, two callers: the identity LHS equals det(zI - Y0)
        model, spec = tiny
        from gaudinkp.correspond import _lhs_coeffs

        rec = initial_lax(spec.states[2], model)
        lhs = _lhs_coeffs(rec.H, model)
        direct = char_poly_direct(rec.Y0)
        assert np.allclose(lhs, direct, atol=1e-10)


class TestSolveDirection:
    def test_n1_per_sector(self):
        model = random_model(2, 1, seed=9)
        for a in range(2):
            m = tuple(1 if b == a else 0 for b in range(2))
            res = solve_sector_spectrum(model, m, starts=40, seed=0)
            assert res["count"] >= 1
            best = min(
                abs(sol[0] - model.hbar * model.twist[a]) for sol in res["solutions"]
            )
            assert best <= 1e-10

    def test_tiny_mixed_sector_exact_count(self, tiny):
        model, spec = tiny
        res = solve_sector_spectrum(model, (1, 1), starts=80, seed=0)
        states = spec.in_sector((1, 1))
        assert res["count"] == len(states) == res["sector_dim"]
        for st in states:
            best = min(np.max(np.abs(sol - st.H_values)) for sol in res["solutions"])
            assert best <= 1e-7

    def test_pure_sector_contains_formula_solution(self, tiny):
        model, spec = tiny
        res = solve_sector_spectrum(model, (model.n, 0), starts=80, seed=0)
        want = np.array([
            model.hbar * model.twist[0]
            + sum(model.hbar**2 / (model.x[i] - model.x[j])
                  for j in range(model.n) if j != i)
            for i in range(model.n)
        ])
        best = min(np.max(np.abs(sol - want)) for sol in res["solutions"])
        assert best <= 1e-9

    def test_small_every_state_recovered(self, small):
        model, spec = small
        for m in sectors(model):
            res = solve_sector_spectrum(model, m, starts=200, seed=1)
            for st in spec.in_sector(m):
                best = min(
                    np.max(np.abs(sol - st.H_values)) for sol in res["solutions"]
                )
                assert best <= 1e-7

    def test_desk_scale_guard(self):
        model = random_model(2, 5, seed=3)
        with pytest.raises(ValueError):
            solve_sector_spectrum(model, (5, 0))


class TestVelocity:
    def test_n1_velocity_is_twist(self):
        model = random_model(2, 1, seed=10)
        spec = joint_diagonalize(model)
        for state in spec:
            errs = initial_velocity_check(state, model, 1e-3)
            assert np.max(errs) <= 1e-6

    def test_pure_state_two_by_two_oracle(self, tiny):
        # explicit 2x2 determinant: roots of det(xI - X0 + 2 t2 Y0) move with
        # velocity -2 (Y0)_ii at t2 = 0, which equals -2 H_i / hbar
        model, spec = tiny
        state = spec.in_sector((model.n, 0))[0]
        rec_Y0 = None
        from gaudinkp.correspond import initial_lax as _il

        rec = _il(state, model)
        t2 = 1e-6
        rp = np.linalg.eigvals(np.diag(model.x) - 2 * t2 * rec.Y0)
        rm = np.linalg.eigvals(np.diag(model.x) + 2 * t2 * rec.Y0)
        # match to marked points
        rp = rp[np.argmin(np.abs(rp[:, None] - model.x[None, :]), axis=0)]
        rm = rm[np.argmin(np.abs(rm[:, None] - model.x[None, :]), axis=0)]
        vel = (rp - rm) / (2 * t2)
        want = -2 * state.H_values / model.hbar
        assert np.allclose(vel, want, rtol=1e-4)

    def test_quadratic_convergence(self, tiny):
        model, spec = tiny
        state = spec.states[1]
        errs = [
            float(np.max(initial_velocity_check(state, model, 0.02 / 2**j)))
            for j in range(3)
        ]
        orders = [np.log2(errs[j] / errs[j + 1]) for j in range(2)]
        assert all(1.8 <= o <= 2.2 for o in orders)

    def test_ambiguous_matching_rejected(self, tiny):
        # a t2 step large enough to move roots by order of their spacing must
        # be refused instead of silently mismatched
        model, spec = tiny
        with pytest.raises(ValueError, match="reduce delta"):
            initial_velocity_check(spec.states[0], model, 5.0)

    def test_matches_determinant_tau(self, tiny):
        # cross-module: the master-T eigenvalue equals the determinant tau, so
        # the root flow used in the velocity check matches eig(X0 - 2 t2 Y0)
        model, spec = tiny
        from gaudinkp.calogero import tau_determinant

        state = spec.states[2]
        rec = initial_lax(state, model)
        t = random_times(np.random.default_rng(0), model.hbar, 3)
        x = 1.3 + 0.4j
        traces = [complex(np.sum(np.asarray(model.twist) ** k)) for k in (1, 2, 3)]
        det_val = tau_determinant(x, t, np.diag(model.x), rec.Y0, traces)
        direct = state_value(master_t(x, t, model), state)
        assert det_val == pytest.approx(direct, rel=1e-9)
