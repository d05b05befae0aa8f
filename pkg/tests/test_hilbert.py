import numpy as np
import pytest

from gaudinkp.hilbert import (
    GaudinModel,
    basis_index,
    basis_letters,
    charge,
    gaudin_hamiltonian,
    joint_diagonalize,
    permutation,
    random_model,
    sector_basis,
    sectors,
    slot_embed,
)


class TestModelValidation:
    def test_duplicate_marked_points(self):
        with pytest.raises(ValueError, match="distinct"):
            GaudinModel(N=2, n=2, hbar=1.0, marked_points=(1.0, 1.0), twist=(1.0, 2.0))

    def test_duplicate_twist(self):
        with pytest.raises(ValueError, match="distinct"):
            GaudinModel(N=2, n=1, hbar=1.0, marked_points=(0.0,), twist=(2.0, 2.0))

    def test_zero_twist(self):
        with pytest.raises(ValueError, match="nonzero"):
            GaudinModel(N=2, n=1, hbar=1.0, marked_points=(0.0,), twist=(0.0, 1.0))

    def test_zero_hbar(self):
        with pytest.raises(ValueError):
            GaudinModel(N=2, n=1, hbar=0.0, marked_points=(0.0,), twist=(1.0, 2.0))

    def test_n_zero_allowed(self):
        m = GaudinModel(N=2, n=0, hbar=1.0, marked_points=(), twist=(1.0, 2.0))
        assert m.dim == 1


class TestSlotEmbed:
    def test_identity(self, tiny):
        model, _ = tiny
        assert np.allclose(slot_embed(np.eye(2), 1, model), np.eye(4))

    def test_slot_two(self, tiny):
        model, _ = tiny
        e12 = np.zeros((2, 2))
        e12[0, 1] = 1.0
        assert np.allclose(slot_embed(e12, 2, model), np.kron(np.eye(2), e12))

    def test_trace_rule(self, small):
        model, _ = small
        rng = np.random.default_rng(0)
        g = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        for i in (1, 2, 3):
            got = np.trace(slot_embed(g, i, model))
            assert got == pytest.approx(2 ** (model.n - 1) * np.trace(g))

    def test_out_of_range(self, tiny):
        model, _ = tiny
        with pytest.raises(ValueError):
            slot_embed(np.eye(2), 3, model)


class TestPermutation:
    def test_involution(self, small):
        model, _ = small
        P = permutation(1, 3, model)
        assert np.allclose(P @ P, np.eye(model.dim))

    def test_swaps_letters(self, tiny):
        model, _ = tiny
        P = permutation(1, 2, model)
        ket01 = np.zeros(4)
        ket01[basis_index((0, 1), model)] = 1.0
        out = P @ ket01
        assert out[basis_index((1, 0), model)] == pytest.approx(1.0)

    def test_trace(self, tiny):
        model, _ = tiny
        assert np.trace(permutation(1, 2, model)) == pytest.approx(model.N)

    def test_equals_elementary_sum(self, tiny):
        model, _ = tiny
        N = model.N
        P = np.zeros((4, 4), dtype=complex)
        for a in range(N):
            for b in range(N):
                eab = np.zeros((N, N)); eab[a, b] = 1
                eba = np.zeros((N, N)); eba[b, a] = 1
                P += slot_embed(eab, 1, model) @ slot_embed(eba, 2, model)
        assert np.allclose(P, permutation(1, 2, model))

    def test_same_slot_rejected(self, tiny):
        model, _ = tiny
        with pytest.raises(ValueError):
            permutation(2, 2, model)


class TestHamiltonians:
    def test_n1_is_twisted_diagonal(self):
        model = random_model(3, 1, seed=4)
        H = gaudin_hamiltonian(1, model)
        assert np.allclose(H, model.hbar * model.g0)

    def test_commuting_family(self):
        for N, n, seed in [(2, 3, 0), (3, 2, 1), (2, 4, 2), (3, 3, 3)]:
            model = random_model(N, n, seed=seed)
            Hs = [gaudin_hamiltonian(i, model) for i in range(1, n + 1)]
            Ms = [charge(a, model) for a in range(1, N + 1)]
            scale = max(np.linalg.norm(H) for H in Hs)
            for i in range(n):
                for j in range(i + 1, n):
                    comm = Hs[i] @ Hs[j] - Hs[j] @ Hs[i]
                    assert np.linalg.norm(comm) <= 1e-10 * scale**2
                for M in Ms:
                    comm = Hs[i] @ M - M @ Hs[i]
                    assert np.linalg.norm(comm) <= 1e-10 * scale * n

    def test_product_state_eigenvalue(self, small):
        model, _ = small
        hb = model.hbar
        for a in range(model.N):
            vec = np.zeros(model.dim)
            vec[basis_index((a,) * model.n, model)] = 1.0
            for i in range(1, model.n + 1):
                out = gaudin_hamiltonian(i, model) @ vec
                expected = hb * model.twist[a] + sum(
                    hb**2 / (model.x[i - 1] - model.x[j])
                    for j in range(model.n)
                    if j != i - 1
                )
                assert np.allclose(out, expected * vec)

    def test_sector_blocks_exact(self, small):
        model, _ = small
        H = gaudin_hamiltonian(2, model)
        for m in sectors(model):
            idx = sector_basis(m, model)
            rest = np.setdiff1d(np.arange(model.dim), idx)
            if len(rest):
                assert np.all(H[np.ix_(rest, idx)] == 0)


class TestCharge:
    def test_sum_is_n_identity(self, small):
        model, _ = small
        total = sum(charge(a, model) for a in range(1, model.N + 1))
        assert np.allclose(total, model.n * np.eye(model.dim))

    def test_product_state(self, tiny):
        model, _ = tiny
        vec = np.zeros(model.dim)
        vec[basis_index((1, 1), model)] = 1.0
        assert np.allclose(charge(2, model) @ vec, model.n * vec)
        assert np.allclose(charge(1, model) @ vec, 0.0)

    def test_letter_count(self, tiny):
        model, _ = tiny
        ket01 = np.zeros(4)
        ket01[basis_index((0, 1), model)] = 1.0
        assert np.allclose(charge(1, model) @ ket01, 1.0 * ket01)


class TestSectors:
    def test_pure_sector_single_vector(self, small):
        model, _ = small
        idx = sector_basis((model.n, 0), model)
        assert len(idx) == 1
        assert basis_letters(int(idx[0]), model) == (0,) * model.n

    def test_mixed_sector(self, tiny):
        model, _ = tiny
        idx = sector_basis((1, 1), model)
        assert len(idx) == 2

    def test_completeness(self, medium):
        model, _ = medium
        assert sum(len(sector_basis(m, model)) for m in sectors(model)) == model.dim

    def test_content_mismatch(self, tiny):
        model, _ = tiny
        with pytest.raises(ValueError):
            sector_basis((3, 0), model)


class TestJointDiagonalize:
    def test_n1_spectrum(self):
        model = random_model(3, 1, seed=5)
        spec = joint_diagonalize(model)
        key = lambda z: (z.real, z.imag)
        got = sorted((complex(s.H_values[0]) for s in spec), key=key)
        want = sorted((complex(model.hbar * k) for k in model.twist), key=key)
        for g, w in zip(got, want):
            assert g == pytest.approx(w)

    def test_sum_rule_per_state(self, tiny):
        model, spec = tiny
        for state in spec:
            lhs = np.sum(state.H_values)
            rhs = model.hbar * sum(
                k * m for k, m in zip(model.twist, state.M_values)
            )
            assert lhs == pytest.approx(rhs)

    def test_total_trace_oracle(self, small):
        # sum of all H_i eigenvalues over the full space = trace of sum_i H_i
        model, spec = small
        total = sum(np.sum(s.H_values) for s in spec)
        want = sum(
            np.trace(gaudin_hamiltonian(i, model)) for i in range(1, model.n + 1)
        )
        assert total == pytest.approx(want)
        # and the trace itself: permutations contribute only via diagonal
        direct = model.N ** (model.n - 1) * model.hbar * np.sum(
            np.asarray(model.twist)
        ) * model.n
        assert want == pytest.approx(direct)

    def test_residual_certificates(self, medium):
        model, spec = medium
        assert len(spec) == model.dim
        assert max(s.residual for s in spec) <= model.tol

    def test_eigenvector_property(self, tiny):
        model, spec = tiny
        for i in range(1, model.n + 1):
            H = gaudin_hamiltonian(i, model)
            for state in spec:
                v = state.vector
                assert np.linalg.norm(H @ v - state.H_values[i - 1] * v) < 1e-8
