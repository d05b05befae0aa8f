import numpy as np
import pytest

from gaudinkp.hilbert import gaudin_hamiltonian
from gaudinkp.master import (
    MasterT,
    TransferMatrix,
    default_x_grid,
    generating_series,
    master_t,
    master_t_taylor,
    master_t_xpoly,
    state_value,
    tau_eigenvalues,
    time_prefactor,
    transfer_from_master,
    transfer_matrix,
)
from gaudinkp.suites import _extract_hamiltonians
from gaudinkp.symfun import TimeVector, TruncationError, YoungDiagram, partitions_up_to


class TestTransferMatrix:
    def test_empty_rational_is_identity(self, tiny):
        model, _ = tiny
        op = transfer_matrix((), 1.5 + 0.2j, model, "rational")
        assert np.allclose(op, np.eye(model.dim))

    def test_one_box_rational_closed_form(self, tiny):
        model, _ = tiny
        x = -0.8 + 1.3j
        op = transfer_matrix((1,), x, model, "rational")
        scalar = np.sum(np.asarray(model.twist)) + sum(
            model.hbar / (x - xi) for xi in model.marked_points
        )
        assert np.allclose(op, scalar * np.eye(model.dim))

    def test_one_column_contains_hamiltonians(self, tiny):
        # rational T_(1,1)(x) = chi + tr g0 sum hbar/(x-x_i)
        #                      + sum_{i<j} hbar^2/((x-x_i)(x-x_j)) - sum_i H_i/(x-x_i)
        model, _ = tiny
        x = 2.4 - 0.9j
        hb = model.hbar
        from gaudinkp.symfun import character

        op = transfer_matrix((1, 1), x, model, "rational")
        rhs = character(model.g0, YoungDiagram([1, 1])) * np.eye(model.dim, dtype=complex)
        rhs += np.sum(np.asarray(model.twist)) * sum(
            hb / (x - xi) for xi in model.marked_points
        ) * np.eye(model.dim)
        rhs += hb**2 / np.prod([x - xi for xi in model.marked_points]) * np.eye(model.dim)
        for i in range(1, model.n + 1):
            rhs -= gaudin_hamiltonian(i, model) / (x - model.marked_points[i - 1])
        assert np.allclose(op, rhs)

    def test_rational_at_marked_point_rejected(self, tiny):
        model, _ = tiny
        with pytest.raises(ZeroDivisionError):
            transfer_matrix((1,), model.marked_points[0], model, "rational")

    def test_polynomial_vs_rational(self, tiny):
        model, _ = tiny
        x = 0.5 + 2.0j
        denom = np.prod([x - xi for xi in model.marked_points])
        a = transfer_matrix((2,), x, model, "polynomial")
        b = transfer_matrix((2,), x, model, "rational")
        assert np.allclose(a, b * denom)

    def test_wrapper_class(self, tiny):
        model, _ = tiny
        T = TransferMatrix(YoungDiagram([1]), model, "polynomial")
        assert np.allclose(T(1.0), transfer_matrix((1,), 1.0, model))

    def test_commutes_with_hamiltonians_and_charges(self, small):
        from gaudinkp.hilbert import charge

        model, _ = small
        op = transfer_matrix((2, 1), 1.3 + 0.7j, model)
        for i in range(1, model.n + 1):
            H = gaudin_hamiltonian(i, model)
            assert np.linalg.norm(op @ H - H @ op) <= 1e-10 * np.linalg.norm(
                op
            ) * np.linalg.norm(H)
        for a in range(1, model.N + 1):
            M = charge(a, model)
            assert np.linalg.norm(op @ M - M @ op) <= 1e-10 * np.linalg.norm(op) * model.n


class TestHamiltonianExtraction:
    def test_direct_route(self, small):
        model, _ = small
        for Hext, i in zip(_extract_hamiltonians(model, via_master=False),
                           range(1, model.n + 1)):
            Hdir = gaudin_hamiltonian(i, model)
            assert np.linalg.norm(Hext - Hdir) <= 1e-10 * np.linalg.norm(Hdir)

    def test_master_route(self, small):
        model, _ = small
        for Hext, i in zip(_extract_hamiltonians(model, via_master=True),
                           range(1, model.n + 1)):
            Hdir = gaudin_hamiltonian(i, model)
            assert np.linalg.norm(Hext - Hdir) <= 1e-10 * np.linalg.norm(Hdir)


class TestMasterT:
    def test_zero_times(self, small):
        model, _ = small
        x = 1.7 - 0.5j
        op = master_t(x, TimeVector.zero(model.hbar, 1), model)
        want = np.prod([x - xi for xi in model.marked_points])
        assert np.allclose(op, want * np.eye(model.dim))

    def test_t1_shift_property(self, tiny):
        model, _ = tiny
        t = TimeVector(model.hbar, (0.23 - 0.1j, 0.05j, 0.02))
        x = 0.4 + 1.6j
        trg = np.sum(np.asarray(model.twist))
        A = master_t(x, t, model)
        B = np.exp(t.entries[0] * trg / model.hbar) * master_t(
            x + t.entries[0], t.replace_entry(1, 0.0), model
        )
        assert np.allclose(A, B)

    def test_commute_at_different_arguments(self, tiny):
        model, _ = tiny
        t1 = TimeVector(model.hbar, (0.1, -0.2j))
        t2 = TimeVector(model.hbar, (0.3j, 0.07, 0.01))
        A = master_t(1.1 + 0.2j, t1, model)
        B = master_t(-0.7 + 1.4j, t2, model)
        assert np.linalg.norm(A @ B - B @ A) <= 1e-10 * np.linalg.norm(A) * np.linalg.norm(B)

    def test_hbar_mismatch_rejected(self, tiny):
        model, _ = tiny
        with pytest.raises(ValueError, match="hbar"):
            master_t(1.0, TimeVector(model.hbar * 2, (0.1,)), model)

    def test_schur_expansion_truncated(self, tiny):
        # sum over |lam| <= 4 of T_lam(x) s_lam(t/hbar) reproduces the Taylor
        # coefficients of the master T in t, coefficient by coefficient
        from gaudinkp.symfun import schur_monomials

        model, _ = tiny
        x = 1.9 + 1.1j
        D = 4
        alphas, ops = master_t_taylor(model, cutoff=D, x=x, K=D)
        rhs = {tuple(a): np.zeros((model.dim, model.dim), dtype=complex) for a in alphas}
        for lam in partitions_up_to(D):
            T = transfer_matrix(lam, x, model)
            for alpha, c in schur_monomials(lam).items():
                key = tuple(list(alpha) + [0] * (D - len(alpha)))
                rhs[key] += T * c * model.hbar ** (-sum(alpha))
        scale = max(np.linalg.norm(op) for op in ops)
        for alpha, op in zip(alphas, ops):
            assert np.linalg.norm(op - rhs[tuple(alpha)]) <= 1e-9 * scale

    def test_xpoly_matches_pointwise(self, tiny):
        model, _ = tiny
        t = TimeVector(model.hbar, (0.2, 0.1j))
        coeffs = master_t_xpoly(t, model)
        x = 0.3 - 1.2j
        direct = master_t(x, t, model)
        horner = sum(coeffs[p] * x**p for p in range(coeffs.shape[0]))
        assert np.allclose(direct, horner)

    def test_wrapper(self, tiny):
        model, _ = tiny
        M = MasterT(model)
        t = TimeVector(model.hbar, (0.1,))
        assert np.allclose(M(0.5, t), master_t(0.5, t, model))


class TestRecoverTransfer:
    def test_matches_direct(self, small):
        model, _ = small
        x = -1.2 + 0.8j
        for lam in [(), (1,), (2,), (1, 1), (2, 1)]:
            A = transfer_from_master(lam, x, model)
            B = transfer_matrix(lam, x, model)
            assert np.linalg.norm(A - B) <= 1e-10 * max(np.linalg.norm(B), 1.0)

    def test_first_derivative_fd_oracle(self, tiny):
        # T_(1)(x) = hbar d/dt_1 T(x, t) at t = 0, via central differences
        model, _ = tiny
        x = 2.0 + 0.3j
        h = 1e-5
        tp = TimeVector(model.hbar, (h,))
        tm = TimeVector(model.hbar, (-h,))
        fd = model.hbar * (master_t(x, tp, model) - master_t(x, tm, model)) / (2 * h)
        want = transfer_matrix((1,), x, model)
        assert np.linalg.norm(fd - want) <= 1e-8 * np.linalg.norm(want)

    def test_one_column_two_derivative_oracle(self, tiny):
        # T_(1,1) = (hbar^2 d^2/dt_1^2 - hbar d/dt_2) T / 2 at t = 0
        model, _ = tiny
        x = 0.9 - 0.5j
        h = 1e-4
        hb = model.hbar

        def T(t1, t2):
            return master_t(x, TimeVector(hb, (t1, t2)), model)

        d11 = (T(h, 0) - 2 * T(0, 0) + T(-h, 0)) / h**2
        d2 = (T(0, h) - T(0, -h)) / (2 * h)
        fd = (hb**2 * d11 - hb * d2) / 2
        want = transfer_matrix((1, 1), x, model)
        assert np.linalg.norm(fd - want) <= 1e-6 * np.linalg.norm(want)

    def test_budget(self, tiny):
        model, _ = tiny
        with pytest.raises(TruncationError):
            transfer_from_master((5, 2), 1.0, model, budget=6)


class TestGeneratingSeries:
    def test_zeroth_coefficient(self, tiny):
        model, _ = tiny
        x = 1.4 - 1.1j
        for sign in (+1, -1):
            ops = generating_series(x, sign, model, depth=2)
            want = transfer_matrix((), x, model)
            assert np.allclose(ops[0], want)

    def test_one_row(self, tiny):
        model, _ = tiny
        x = 0.8 + 0.9j
        ops = generating_series(x, +1, model, depth=3)
        for s in (1, 2, 3):
            want = transfer_matrix((s,), x, model)
            assert np.allclose(ops[s], want)

    def test_one_column_terminates(self, tiny):
        model, _ = tiny
        x = -0.9 + 0.6j
        ops = generating_series(x, -1, model, depth=model.N + 1)
        scale = max(np.linalg.norm(op) for op in ops)
        # beyond a = N the coefficients vanish identically (by cancellation)
        assert np.linalg.norm(ops[model.N + 1]) <= 1e-12 * scale
        for a in range(1, model.N + 1):
            want = transfer_matrix((1,) * a, x, model)
            assert np.allclose(ops[a], want)


class TestTauEigenvalues:
    def test_zero_time_roots_are_marked_points(self, small):
        model, spec = small
        taus = tau_eigenvalues(spec, TimeVector.zero(model.hbar, 1), model)
        for tv in taus:
            assert tv.ok
            got = sorted(tv.roots, key=lambda z: (z.real.round(8), z.imag.round(8)))
            want = sorted(model.x, key=lambda z: (z.real.round(8), z.imag.round(8)))
            assert np.allclose(got, want, atol=1e-8)

    def test_monic_degree_n(self, tiny):
        model, spec = tiny
        t = TimeVector(model.hbar, (0.12, -0.04j, 0.02))
        for tv in tau_eigenvalues(spec, t, model):
            assert tv.ok
            assert len(tv.coeffs) == model.n + 1
            assert tv.coeffs[-1] == pytest.approx(1.0)

    def test_prefactor(self, tiny):
        model, _ = tiny
        t = TimeVector(model.hbar, (0.3, 0.1))
        k = np.asarray(model.twist)
        want = np.exp((t.entries[0] * np.sum(k) + t.entries[1] * np.sum(k**2)) / model.hbar)
        assert time_prefactor(t, model) == pytest.approx(want)

    def test_tau_value_matches_eigenvalue(self, tiny):
        model, spec = tiny
        t = TimeVector(model.hbar, (0.1, 0.05, 0.02))
        x = 1.6 + 0.4j
        op = master_t(x, t, model)
        taus = tau_eigenvalues(spec, t, model)
        for state, tv in zip(spec, taus):
            val = state_value(op, state)
            poly = tv.prefactor * np.polyval(tv.coeffs[::-1], x)
            assert val == pytest.approx(poly, rel=1e-9)

    def test_grid_too_small_rejected(self, tiny):
        model, spec = tiny
        with pytest.raises(ValueError):
            tau_eigenvalues(spec, TimeVector.zero(model.hbar, 1), model,
                            x_grid=default_x_grid(model, 2))
