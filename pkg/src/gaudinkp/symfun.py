"""Symmetric-function kernel.

Everything here is written in terms of scaled power sums y_k = tr(g^k)/k,
which is the variable set the rest of the package feeds in.  The generating
identity exp(sum_k y_k z^k) = sum_m h_m(y) z^m defines the complete
homogeneous polynomials; Schur polynomials come from the Jacobi-Trudi
determinant det h_{lam_i - i + j}.

The recurrences are written ring-generically (only +, *, and division by a
positive integer), so the same code runs on complex scalars, jets, and the
little exact polynomial helper used for Schur monomial expansions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from math import factorial

import numpy as np


class TruncationError(ValueError):
    """Not enough stored power sums / time entries for the requested degree."""


# -- partitions ---------------------------------------------------------------


class YoungDiagram:
    """A partition: weakly decreasing positive parts.  Canonicalized on
    construction (sorted, zeros stripped); the empty diagram is allowed."""

    __slots__ = ("parts",)

    def __init__(self, parts=()):
        parts = tuple(int(p) for p in parts if int(p) != 0)
        if any(p < 0 for p in parts):
            raise ValueError("negative part in partition")
        self.parts = tuple(sorted(parts, reverse=True))

    @property
    def length(self) -> int:
        return len(self.parts)

    @property
    def weight(self) -> int:
        return sum(self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)

    def __getitem__(self, i):
        return self.parts[i]

    def __eq__(self, other):
        return isinstance(other, YoungDiagram) and self.parts == other.parts

    def __hash__(self):
        return hash(self.parts)

    def __repr__(self):
        return f"YoungDiagram{self.parts}"


def partitions_of(weight: int):
    """All partitions of `weight`, as YoungDiagrams, largest part first."""

    def gen(rem, maxpart):
        if rem == 0:
            yield ()
            return
        for p in range(min(rem, maxpart), 0, -1):
            for tail in gen(rem - p, p):
                yield (p,) + tail

    return [YoungDiagram(t) for t in gen(weight, weight)]


def partitions_up_to(weight: int):
    out = []
    for w in range(weight + 1):
        out.extend(partitions_of(w))
    return out


# -- time vectors -------------------------------------------------------------


@dataclass(frozen=True)
class TimeVector:
    """Finite truncation (t_1..t_K) of the KP times, with its Planck scale.

    Entries beyond K are implicitly zero; K >= 1.
    """

    hbar: complex
    entries: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.hbar == 0:
            raise ValueError("hbar must be nonzero")
        entries = tuple(complex(t) for t in self.entries)
        if len(entries) < 1:
            raise ValueError("need at least one time entry (K >= 1)")
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=complex)

    @classmethod
    def zero(cls, hbar, order: int) -> "TimeVector":
        return cls(hbar, (0.0,) * order)

    def replace_entry(self, k: int, value) -> "TimeVector":
        """New vector with t_k (1-based) set to `value`."""
        if not 1 <= k <= self.order:
            raise TruncationError(f"t_{k} is beyond truncation order {self.order}")
        e = list(self.entries)
        e[k - 1] = complex(value)
        return TimeVector(self.hbar, tuple(e))


def miwa_shift(t: TimeVector, z, sign: int) -> TimeVector:
    """t -> t +- hbar [z^{-1}]: entry k becomes t_k +- (hbar/k) z^{-k}."""
    z = complex(z)
    if z == 0:
        raise ZeroDivisionError("Miwa shift needs a nonzero z")
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    shifted = tuple(
        tk + sign * t.hbar / (k * z**k) for k, tk in enumerate(t.entries, start=1)
    )
    return TimeVector(t.hbar, shifted)


def xi(t: TimeVector, z) -> complex:
    """sum_{k<=K} t_k z^k."""
    z = complex(z)
    return sum(tk * z**k for k, tk in enumerate(t.entries, start=1))


# -- complete homogeneous / Schur --------------------------------------------


def h_list(y, mmax: int, one=1.0):
    """[h_0, ..., h_mmax] from power sums y = (y_1, ..., y_K), K >= mmax.

    Ring-generic: y entries may be complex numbers or Jets.  `one` seeds the
    recurrence (pass a ring unit when the scalars cannot promote ints).
    """
    y = list(y)
    if mmax > len(y):
        raise TruncationError(
            f"h_{mmax} needs power sums up to y_{mmax}, only {len(y)} stored"
        )
    hs = [one]
    for m in range(1, mmax + 1):
        acc = None
        for k in range(1, m + 1):
            term = (k * y[k - 1]) * hs[m - k]
            acc = term if acc is None else acc + term
        hs.append(acc * (1.0 / m))
    return hs


def complete_homogeneous(y, k: int) -> complex:
    """h_k(y): coefficient of z^k in exp(sum y_j z^j); zero for k < 0."""
    if k < 0:
        return 0.0
    return complex(h_list([complex(v) for v in y], k)[k])


def jacobi_trudi(h_at, lam: YoungDiagram, one=1.0):
    """det_{i,j=1..l} h_{lam_i - i + j} with entries fetched via h_at(index).

    h_at must return the ring zero for negative indices.
    """
    l = lam.length
    if l == 0:
        return one
    total = None
    for perm in permutations(range(l)):
        sign = 1
        # inversion count
        for i in range(l):
            for j in range(i + 1, l):
                if perm[i] > perm[j]:
                    sign = -sign
        term = None
        dead = False
        for i in range(l):
            idx = lam[i] - (i + 1) + (perm[i] + 1)
            if idx < 0:
                dead = True
                break
            entry = h_at(idx)
            term = entry if term is None else term * entry
        if dead:
            continue
        term = term * sign
        total = term if total is None else total + term
    if total is None:
        return one * 0.0
    return total


def schur(y, lam: YoungDiagram) -> complex:
    """Schur polynomial s_lam(y) via Jacobi-Trudi; s_empty = 1."""
    lam = lam if isinstance(lam, YoungDiagram) else YoungDiagram(lam)
    if lam.length == 0:
        return 1.0
    mmax = lam[0] + lam.length - 1
    hs = h_list([complex(v) for v in y], mmax)
    return complex(jacobi_trudi(lambda i: hs[i], lam))


def power_sums_of_matrix(g, kmax: int) -> np.ndarray:
    """y_k = tr(g^k)/k for k = 1..kmax."""
    g = np.asarray(g, dtype=complex)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise ValueError("matrix must be square")
    out = np.empty(kmax, dtype=complex)
    P = np.eye(g.shape[0], dtype=complex)
    for k in range(1, kmax + 1):
        P = P @ g
        out[k - 1] = np.trace(P) / k
    return out


def character(g, lam: YoungDiagram) -> complex:
    """chi_lam(g) = s_lam(y(g)); vanishes automatically when l(lam) > N."""
    lam = lam if isinstance(lam, YoungDiagram) else YoungDiagram(lam)
    if lam.length == 0:
        return 1.0
    y = power_sums_of_matrix(g, lam[0] + lam.length)
    return schur(y, lam)


# -- exact monomial expansions ------------------------------------------------
#
# Small exact polynomial ring in the variables y_1..y_K (weight of y_k is k),
# truncated at a weighted degree.  Used to expand s_lam into y-monomials for
# the master-T derivative formulas; sizes are tiny so dicts are fine.


class WeightedPoly:
    """Polynomial in y_1..y_K as {exponent tuple: coefficient}, truncated at
    weighted degree `cutoff` (y_k carries weight k)."""

    __slots__ = ("K", "cutoff", "terms")

    def __init__(self, K: int, cutoff: int, terms=None):
        self.K = K
        self.cutoff = cutoff
        self.terms = dict(terms or {})

    @classmethod
    def constant(cls, value, K, cutoff):
        return cls(K, cutoff, {(0,) * K: complex(value)} if value != 0 else {})

    @classmethod
    def generator(cls, k, K, cutoff):
        """The variable y_k (1-based)."""
        e = [0] * K
        e[k - 1] = 1
        return cls(K, cutoff, {tuple(e): 1.0})

    def _wdeg(self, expo):
        return sum((k + 1) * a for k, a in enumerate(expo))

    def __add__(self, other):
        if not isinstance(other, WeightedPoly):
            other = WeightedPoly.constant(other, self.K, self.cutoff)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return WeightedPoly(self.K, self.cutoff, out)

    __radd__ = __add__

    def __mul__(self, other):
        if not isinstance(other, WeightedPoly):
            out = {e: c * complex(other) for e, c in self.terms.items()}
            return WeightedPoly(self.K, self.cutoff, out)
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if self._wdeg(e) > self.cutoff:
                    continue
                out[e] = out.get(e, 0.0) + c1 * c2
        return WeightedPoly(self.K, self.cutoff, out)

    __rmul__ = __mul__

    def __repr__(self):
        return f"WeightedPoly({self.terms})"


def schur_monomials(lam: YoungDiagram) -> dict:
    """Expansion of s_lam(y) as {exponent tuple over (y_1..y_|lam|): coeff}.

    Exponent tuples have length |lam|; only weighted degree |lam| survives.
    """
    lam = lam if isinstance(lam, YoungDiagram) else YoungDiagram(lam)
    w = lam.weight
    if w == 0:
        return {(): 1.0}
    K = w
    ys = [WeightedPoly.generator(k, K, w) for k in range(1, K + 1)]
    one = WeightedPoly.constant(1.0, K, w)
    hs = h_list(ys, lam[0] + lam.length - 1, one=one)
    zero = WeightedPoly.constant(0.0, K, w)
    poly = jacobi_trudi(lambda i: hs[i] if i < len(hs) else zero, lam, one=one)
    # keep only the homogeneous weighted-degree-|lam| part (the rest is exact 0
    # up to rounding in the rational arithmetic done in floats)
    out = {}
    for e, c in poly.terms.items():
        if sum((k + 1) * a for k, a in enumerate(e)) == w and abs(c) > 1e-12:
            out[e] = c
    return out


def multinomial(n: int, ms) -> int:
    out = factorial(n)
    for m in ms:
        out //= factorial(m)
    return out
