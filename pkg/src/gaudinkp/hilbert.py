"""Operators on the tensor space V = (C^N)^(x n).

Basis convention: the computational basis of V is indexed by base-N strings
(c_1, ..., c_n) with slot 1 the most significant digit, matching chained
np.kron with slot 1 as the leftmost factor.  Letters run 0..N-1 internally;
the public slot and letter arguments are 1-based as is usual for these
models.

All operators are dense complex matrices (N^n <= a few hundred at desk
scale); "TensorOperator" below is just an annotation alias for ndarray.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

TensorOperator = np.ndarray


class DegenerateCombinationError(RuntimeError):
    """Random linear combination failed to separate a sector's spectrum."""


@dataclass(frozen=True)
class GaudinModel:
    """Problem instance: N, n, hbar, distinct marked points, distinct twist.

    n = 0 (no marked points, one-dimensional state space) is allowed so the
    transfer-matrix constructions can be exercised in their degenerate case.
    """

    N: int
    n: int
    hbar: complex
    marked_points: tuple
    twist: tuple
    tol: float = 1e-9

    def __post_init__(self):
        if self.N < 2:
            raise ValueError("need N >= 2")
        if self.n < 0:
            raise ValueError("need n >= 0")
        if self.hbar == 0:
            raise ValueError("hbar must be nonzero")
        x = tuple(complex(v) for v in self.marked_points)
        k = tuple(complex(v) for v in self.twist)
        if len(x) != self.n:
            raise ValueError(f"expected {self.n} marked points, got {len(x)}")
        if len(k) != self.N:
            raise ValueError(f"expected {self.N} twist eigenvalues, got {len(k)}")
        for i in range(len(x)):
            for j in range(i + 1, len(x)):
                if x[i] == x[j]:
                    raise ValueError("marked points must be pairwise distinct")
        if any(v == 0 for v in k):
            raise ValueError("twist eigenvalues must be nonzero")
        for i in range(len(k)):
            for j in range(i + 1, len(k)):
                if k[i] == k[j]:
                    raise ValueError("twist eigenvalues must be pairwise distinct")
        object.__setattr__(self, "marked_points", x)
        object.__setattr__(self, "twist", k)
        object.__setattr__(self, "hbar", complex(self.hbar))

    @property
    def dim(self) -> int:
        return self.N**self.n

    @property
    def g0(self) -> np.ndarray:
        return np.diag(np.asarray(self.twist, dtype=complex))

    @property
    def x(self) -> np.ndarray:
        return np.asarray(self.marked_points, dtype=complex)


def random_model(N: int, n: int, seed: int = 7, hbar=1.0,
                 spread: float = 1.5, min_gap: float = 0.35) -> GaudinModel:
    """Deterministic random instance with well-separated parameters."""
    rng = np.random.default_rng(seed)

    def sample(count, lo_abs):
        while True:
            vals = spread * (rng.uniform(-1, 1, count) + 1j * rng.uniform(-1, 1, count))
            ok = all(abs(v) > lo_abs for v in vals)
            for i in range(count):
                for j in range(i + 1, count):
                    ok = ok and abs(vals[i] - vals[j]) > min_gap
            if ok:
                return tuple(vals)

    x = sample(n, 0.0) if n else ()
    k = tuple(v / abs(v) * (0.45 + 0.9 * abs(v) / (2 * spread)) for v in sample(N, 0.2))
    return GaudinModel(N=N, n=n, hbar=hbar, marked_points=x, twist=k)


# -- basis bookkeeping --------------------------------------------------------


def basis_letters(index: int, model: GaudinModel) -> tuple:
    """Letters (c_1..c_n), 0-based, of one computational basis vector."""
    out = []
    for _ in range(model.n):
        out.append(index % model.N)
        index //= model.N
    return tuple(reversed(out))


def basis_index(letters, model: GaudinModel) -> int:
    idx = 0
    for c in letters:
        idx = idx * model.N + c
    return idx


# -- elementary constructions -------------------------------------------------


def slot_embed(g, i: int, model: GaudinModel) -> TensorOperator:
    """g acting in slot i (1-based): I^(i-1) (x) g (x) I^(n-i)."""
    if not 1 <= i <= model.n:
        raise ValueError(f"slot {i} out of range 1..{model.n}")
    g = np.asarray(g, dtype=complex)
    left = np.eye(model.N ** (i - 1), dtype=complex)
    right = np.eye(model.N ** (model.n - i), dtype=complex)
    return np.kron(np.kron(left, g), right)


def elementary(a: int, b: int, N: int) -> np.ndarray:
    e = np.zeros((N, N), dtype=complex)
    e[a - 1, b - 1] = 1.0
    return e


def permutation(i: int, j: int, model: GaudinModel) -> TensorOperator:
    """P_ij: swap of tensor factors i and j (an involution)."""
    if i == j:
        raise ValueError("permutation needs two distinct slots")
    dim = model.dim
    P = np.zeros((dim, dim), dtype=complex)
    for col in range(dim):
        letters = list(basis_letters(col, model))
        letters[i - 1], letters[j - 1] = letters[j - 1], letters[i - 1]
        P[basis_index(letters, model), col] = 1.0
    return P


def gaudin_hamiltonian(i: int, model: GaudinModel) -> TensorOperator:
    """H_i = hbar g0^(i) + hbar^2 sum_{j != i} P_ij / (x_i - x_j)."""
    if not 1 <= i <= model.n:
        raise ValueError(f"slot {i} out of range 1..{model.n}")
    hb = model.hbar
    H = hb * slot_embed(model.g0, i, model)
    for j in range(1, model.n + 1):
        if j == i:
            continue
        H += hb**2 * permutation(i, j, model) / (model.x[i - 1] - model.x[j - 1])
    return H


def charge(a: int, model: GaudinModel) -> TensorOperator:
    """M_a = sum_l e_aa^(l): counts occurrences of letter a (1-based)."""
    if not 1 <= a <= model.N:
        raise ValueError(f"letter {a} out of range 1..{model.N}")
    diag = np.array(
        [basis_letters(idx, model).count(a - 1) for idx in range(model.dim)],
        dtype=complex,
    )
    return np.diag(diag)


# -- sectors ------------------------------------------------------------------


def sectors(model: GaudinModel):
    """All contents m = (m_1..m_N) with m_a >= 0 and sum m_a = n, lex order."""
    out = []
    for m in product(range(model.n + 1), repeat=model.N):
        if sum(m) == model.n:
            out.append(m)
    return out


def sector_basis(m, model: GaudinModel) -> np.ndarray:
    """Indices of basis vectors with letter content m."""
    m = tuple(int(v) for v in m)
    if len(m) != model.N or any(v < 0 for v in m) or sum(m) != model.n:
        raise ValueError(f"invalid sector content {m} for N={model.N}, n={model.n}")
    idx = [
        i
        for i in range(model.dim)
        if tuple(basis_letters(i, model).count(a) for a in range(model.N)) == m
    ]
    return np.asarray(idx, dtype=int)


# -- joint diagonalization ------------------------------------------------


@dataclass
class EigenState:
    """One joint eigenstate of the commuting Gaudin family."""

    vector: np.ndarray          # unit vector in C^(N^n)
    H_values: np.ndarray        # n complex eigenvalues
    M_values: tuple             # sector content (m_1..m_N)
    residual: float             # max_i ||H_i v - h_i v||

    def __repr__(self):
        return f"EigenState(m={self.M_values}, H={np.round(self.H_values, 6)})"


@dataclass
class JointSpectrum:
    model: GaudinModel
    states: list = field(default_factory=list)

    def __iter__(self):
        return iter(self.states)

    def __len__(self):
        return len(self.states)

    def in_sector(self, m):
        m = tuple(int(v) for v in m)
        return [s for s in self.states if s.M_values == m]


def joint_diagonalize(model: GaudinModel, seed: int = 0, retries: int = 8) -> JointSpectrum:
    """Diagonalize the commuting family {H_i} sector by sector.

    Within each sector a random real combination sum_i c_i H_i is
    diagonalized; individual eigenvalues are read off by Rayleigh quotients
    and certified by residuals.  A combination whose residuals exceed the
    model tolerance is retried with fresh coefficients.
    """
    rng = np.random.default_rng(seed)
    Hs = [gaudin_hamiltonian(i, model) for i in range(1, model.n + 1)]
    scales = [max(np.linalg.norm(H), 1.0) for H in Hs]
    spectrum = JointSpectrum(model=model)

    for m in sectors(model):
        idx = sector_basis(m, model)
        Hr = [H[np.ix_(idx, idx)] for H in Hs]
        if model.n == 0:
            spectrum.states.append(
                EigenState(np.ones(1, dtype=complex), np.empty(0, dtype=complex), m, 0.0)
            )
            continue
        last_err = None
        for _ in range(retries):
            c = rng.standard_normal(model.n)
            M = sum(ci * Hi for ci, Hi in zip(c, Hr))
            _, vecs = np.linalg.eig(M)
            found = []
            worst = 0.0
            ok = True
            for col in range(vecs.shape[1]):
                v = vecs[:, col]
                v = v / np.linalg.norm(v)
                hvals = np.array([np.vdot(v, Hi @ v) for Hi in Hr])
                res = max(
                    np.linalg.norm(Hi @ v - hv * v) / sc
                    for Hi, hv, sc in zip(Hr, hvals, scales)
                )
                worst = max(worst, res)
                if res > model.tol:
                    ok = False
                    break
                full = np.zeros(model.dim, dtype=complex)
                full[idx] = v
                found.append(EigenState(full, hvals, m, res))
            if ok:
                found.sort(
                    key=lambda s: tuple(
                        (round(val.real, 9), round(val.imag, 9)) for val in s.H_values
                    )
                )
                spectrum.states.extend(found)
                break
            last_err = worst
        else:
            raise DegenerateCombinationError(
                f"sector {m}: residual {last_err:.3e} > tol {model.tol:.1e} "
                f"after {retries} random combinations"
            )
    return spectrum
