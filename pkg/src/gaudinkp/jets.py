"""Batched first-order jets in several directions.

The ring is C[eps_1, ..., eps_s] / (eps_1^2, ..., eps_s^2): one nilpotent
generator per "active" tensor slot.  An element is stored as a numpy array
whose last axis has length 2**s and is indexed by the bitmask of the
squarefree monomial (mask 0 = the scalar body, mask 2**s - 1 = the top
monomial eps_1...eps_s).  Leading axes are free batch axes, so one Jet can
carry the values of a function at many perturbation directions at once.

The coefficient of eps_{i1}...eps_{ik} in f(g + sum_i eps_i D_i) is the
mixed directional derivative of f along D_{i1}, ..., D_{ik}; repeated
directions are allowed (the generators, not the directions, are what
square to zero).
"""

from __future__ import annotations

from functools import lru_cache
from itertools import permutations
from math import factorial

import numpy as np


@lru_cache(maxsize=None)
def _mult_table(ngen: int) -> tuple[tuple[int, int, int], ...]:
    """All (i, j, i|j) with disjoint masks i, j over `ngen` generators."""
    out = []
    for i in range(1 << ngen):
        for j in range(1 << ngen):
            if i & j == 0:
                out.append((i, j, i | j))
    return tuple(out)


def _coerce(other, ngen):
    if isinstance(other, Jet):
        if other.ngen != ngen:
            raise ValueError("jet generator counts differ")
        return other.coeff
    arr = np.asarray(other, dtype=complex)
    c = np.zeros(arr.shape + (1 << ngen,), dtype=complex)
    c[..., 0] = arr
    return c


class Jet:
    """One (batched) element of the squarefree jet ring."""

    __slots__ = ("coeff", "ngen")

    def __init__(self, coeff, ngen: int):
        coeff = np.asarray(coeff, dtype=complex)
        if coeff.shape[-1] != 1 << ngen:
            raise ValueError("coefficient axis does not match generator count")
        self.coeff = coeff
        self.ngen = ngen

    # -- constructors ------------------------------------------------------

    @classmethod
    def constant(cls, value, ngen: int, batch: tuple = ()) -> "Jet":
        c = np.zeros(batch + (1 << ngen,), dtype=complex)
        c[..., 0] = value
        return cls(c, ngen)

    @classmethod
    def variable(cls, value, index: int, ngen: int, batch: tuple = ()) -> "Jet":
        """value + eps_index (a first-order probe along one generator)."""
        c = np.zeros(batch + (1 << ngen,), dtype=complex)
        c[..., 0] = value
        c[..., 1 << index] = 1.0
        return cls(c, ngen)

    # -- ring structure ----------------------------------------------------

    def __add__(self, other):
        return Jet(self.coeff + _coerce(other, self.ngen), self.ngen)

    __radd__ = __add__

    def __sub__(self, other):
        return Jet(self.coeff - _coerce(other, self.ngen), self.ngen)

    def __rsub__(self, other):
        return Jet(_coerce(other, self.ngen) - self.coeff, self.ngen)

    def __neg__(self):
        return Jet(-self.coeff, self.ngen)

    def __mul__(self, other):
        if isinstance(other, Jet):
            a, b = self.coeff, _coerce(other, self.ngen)
            shape = np.broadcast_shapes(a.shape, b.shape)
            out = np.zeros(shape, dtype=complex)
            for i, j, k in _mult_table(self.ngen):
                out[..., k] += a[..., i] * b[..., j]
            return Jet(out, self.ngen)
        # scalars (and plain arrays) multiply every coefficient
        return Jet(self.coeff * np.asarray(other, dtype=complex)[..., None], self.ngen)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Jet):
            return self * other.reciprocal()
        return Jet(self.coeff / np.asarray(other, dtype=complex)[..., None], self.ngen)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise ValueError("only nonnegative integer powers")
        out = Jet.constant(1.0, self.ngen, batch=self.coeff.shape[:-1])
        base = self
        for _ in range(k):
            out = out * base
        return out

    # -- accessors ---------------------------------------------------------

    @property
    def body(self):
        return self.coeff[..., 0]

    @property
    def top(self):
        """Coefficient of eps_1...eps_s: the full mixed partial."""
        return self.coeff[..., -1]

    def nilpotent(self) -> "Jet":
        c = self.coeff.copy()
        c[..., 0] = 0.0
        return Jet(c, self.ngen)

    # -- transcendental / inverse ------------------------------------------

    def reciprocal(self) -> "Jet":
        b = self.coeff[..., 0]
        if np.any(b == 0):
            raise ZeroDivisionError("jet body vanishes; element is not a unit")
        eta = (self.nilpotent() / b).coeff
        out = np.zeros_like(self.coeff)
        out[..., 0] = 1.0
        term = out.copy()
        for _ in range(self.ngen):
            term = self._raw_mul(term, -eta)
            out = out + term
        return Jet(out / b[..., None], self.ngen)

    def exp(self) -> "Jet":
        eta = self.nilpotent().coeff
        out = np.zeros(self.coeff.shape, dtype=complex)
        out[..., 0] = 1.0
        term = out.copy()
        for m in range(1, self.ngen + 1):
            term = self._raw_mul(term, eta) / m
            out = out + term
        return Jet(out * np.exp(self.coeff[..., 0])[..., None], self.ngen)

    def _raw_mul(self, a, b):
        shape = np.broadcast_shapes(a.shape, b.shape)
        out = np.zeros(shape, dtype=complex)
        for i, j, k in _mult_table(self.ngen):
            out[..., k] += a[..., i] * b[..., j]
        return out

    def __repr__(self):
        return f"Jet(ngen={self.ngen}, batch={self.coeff.shape[:-1]})"


# -- matrices of jets --------------------------------------------------------
#
# A jet matrix is a plain ndarray of shape (N, N) + batch + (2**s,).  Keeping
# the raw array lets the inner loops run one vectorized op per mask triple
# instead of one per matrix entry.


def jm_from_scalar(g, ngen: int, batch: tuple = ()):
    g = np.asarray(g, dtype=complex)
    N = g.shape[0]
    out = np.zeros((N, N) + batch + (1 << ngen,), dtype=complex)
    out[..., 0] = g.reshape((N, N) + (1,) * len(batch))
    return out


def jm_mul(A, B, ngen: int):
    out = np.zeros(np.broadcast_shapes(A.shape, B.shape), dtype=complex)
    for i, j, k in _mult_table(ngen):
        out[..., k] += np.einsum("ab...,bc...->ac...", A[..., i], B[..., j])
    return out


def jm_trace(A, ngen: int) -> Jet:
    return Jet(np.einsum("aa...->...", A), ngen)


def jm_power_traces(A, kmax: int, ngen: int) -> list[Jet]:
    """[tr A, tr A^2, ..., tr A^kmax]."""
    traces = []
    P = A
    for k in range(1, kmax + 1):
        traces.append(jm_trace(P, ngen))
        if k < kmax:
            P = jm_mul(P, A, ngen)
    return traces


def jm_det(A, ngen: int) -> Jet:
    """Leibniz-expansion determinant (division-free; fine for small N)."""
    N = A.shape[0]
    total = None
    for perm in permutations(range(N)):
        sign = _perm_sign(perm)
        term = Jet(A[0, perm[0]], ngen)
        for r in range(1, N):
            term = term * Jet(A[r, perm[r]], ngen)
        total = term * sign if total is None else total + term * sign
    return total


def _perm_sign(perm) -> int:
    sign = 1
    seen = [False] * len(perm)
    for i in range(len(perm)):
        if seen[i]:
            continue
        j, clen = i, 0
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            clen += 1
        if clen % 2 == 0:
            sign = -sign
    return sign


def finite_difference_partial(f, g, directions, h: float = 1e-5):
    """Mixed partial of scalar f at matrix g along `directions`, by nested
    central differences with one Richardson step.  Test oracle only."""

    def nested(step):
        if not directions:
            return f(g)

        def deriv(gmat, dirs, s):
            d = dirs[0]
            if len(dirs) == 1:
                return (f(gmat + s * d) - f(gmat - s * d)) / (2 * s)
            return (deriv(gmat + s * d, dirs[1:], s) - deriv(gmat - s * d, dirs[1:], s)) / (2 * s)

        return deriv(g, list(directions), step)

    c1 = nested(h)
    c2 = nested(h / 2)
    return (4 * c2 - c1) / 3


def factorial_product(alpha) -> float:
    out = 1.0
    for a in alpha:
        out *= factorial(a)
    return out
