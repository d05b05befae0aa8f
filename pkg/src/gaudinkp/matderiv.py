"""Matrix-derivative engine.

The derivative d maps a scalar function f of an N x N matrix g to the
matrix-valued function whose (a, b) entry is df/dg_{ba}; placing the result
in tensor slot i of V = (C^N)^(x n) gives d_i.  The ordered factor chain

    (x - x_n + hbar d_n) ... (x - x_1 + hbar d_1) f(g)  at  g = g0

expands as a sum over subsets S of {1..n}: every d_i acts on the same scalar
f, and the elementary operators it leaves behind are g-independent, so the
product collapses to

    sum_S  hbar^{|S|}  prod_{i not in S} (x - x_i)  d_S f(g0),

with d_S f assembled from the mixed partials of f with respect to matrix
entries, one entry pick (a_i, b_i) per slot in S.  The mixed partials are
obtained exactly from the jet ring in gaudinkp.jets: batch over all N^{2|S|}
direction assignments, one nilpotent generator per slot.  The partial tensor
only depends on |S|, so it is computed once per subset size.

Closed-form evaluation classes cover the function family actually used:
characters chi_lam(g), exponentials exp((1/hbar) sum_k t_k tr g^k),
determinant factors det(zI - g)^{+-1}, and their products; plus two
channelled evaluators that return whole coefficient families at once
(powers of w = z^{-1}, or monomials in the times t).
"""

from __future__ import annotations

import numpy as np

from .hilbert import GaudinModel, TensorOperator
from .jets import Jet, jm_det, jm_power_traces
from .symfun import TimeVector, YoungDiagram, h_list, jacobi_trudi


# -- probing and assembly -----------------------------------------------------


def _probe_matrix(g0: np.ndarray, s: int) -> np.ndarray:
    """g0 + sum_p eps_p e_{b_p a_p}, batched over all N^(2s) assignments.

    Batch index beta decomposes as digits (a_1, b_1, ..., a_s, b_s) with a_1
    slowest; (a_p, b_p) are the indices of the slot operator e_{a b} that the
    p-th derivative will produce, so the probe direction is e_{b_p a_p}.
    """
    N = g0.shape[0]
    B = N ** (2 * s)
    arr = np.zeros((N, N, B, 1 << s), dtype=complex)
    arr[..., 0] = g0[:, :, None]
    if s:
        digits = np.unravel_index(np.arange(B), (N,) * (2 * s))
        for pos in range(s):
            a = digits[2 * pos]
            b = digits[2 * pos + 1]
            arr[b, a, np.arange(B), 1 << pos] = 1.0
    return arr


def _embed_channels(P: np.ndarray, slots, n: int, N: int) -> np.ndarray:
    """Embed (C, N^s, N^s) acting on `slots` (0-based), identity elsewhere."""
    s = len(slots)
    C = P.shape[0]
    rest = [q for q in range(n) if q not in slots]
    r = n - s
    I = np.eye(N**r, dtype=complex)
    O = np.einsum("cij,kl->cikjl", P, I)
    O = O.reshape((C,) + (N,) * (2 * n)) if n else O.reshape(C, 1, 1)
    if n:
        order = list(slots) + rest
        inv = np.argsort(order)
        perm = [0] + [1 + q for q in inv] + [1 + n + q for q in inv]
        O = O.transpose(perm).reshape(C, N**n, N**n)
    return O


def _assemble(partials: np.ndarray, slots, n: int, N: int) -> np.ndarray:
    """Mixed partials (C, N^(2s)) for `slots` -> operators (C, N^n, N^n)."""
    s = len(slots)
    C = partials.shape[0]
    if s == 0:
        return partials[:, 0][:, None, None] * np.eye(N**n, dtype=complex)[None]
    P = partials.reshape((C,) + (N,) * (2 * s))
    perm = [0] + [1 + 2 * i for i in range(s)] + [2 + 2 * i for i in range(s)]
    P = P.transpose(perm).reshape(C, N**s, N**s)
    return _embed_channels(P, slots, n, N)


# -- function classes ----------------------------------------------------------


class MatrixFunction:
    """Scalar function of an N x N matrix, evaluable on jet matrices."""

    matrix_valued = False

    def eval_jet(self, gjet: np.ndarray, ngen: int) -> Jet:
        raise NotImplementedError

    def channels(self, gjet: np.ndarray, ngen: int) -> np.ndarray:
        return self.eval_jet(gjet, ngen).coeff[None]

    def __call__(self, g) -> complex:
        g = np.asarray(g, dtype=complex)
        val = self.eval_jet(_probe_matrix(g, 0), 0)
        return complex(val.coeff[..., 0].reshape(-1)[0])

    def __mul__(self, other):
        return Product(self, other)


class Character(MatrixFunction):
    """chi_lam(g) through power sums and Jacobi-Trudi."""

    def __init__(self, lam):
        self.lam = lam if isinstance(lam, YoungDiagram) else YoungDiagram(lam)

    def eval_jet(self, gjet, ngen):
        lam = self.lam
        one = Jet.constant(1.0, ngen, batch=gjet.shape[2:-1])
        if lam.length == 0:
            return one
        kmax = lam[0] + lam.length - 1
        traces = jm_power_traces(gjet, kmax, ngen)
        ys = [t / k for k, t in enumerate(traces, start=1)]
        hs = h_list(ys, kmax, one=one)
        return jacobi_trudi(lambda i: hs[i], lam, one=one)


class ExpTimes(MatrixFunction):
    """exp((1/hbar) sum_{k<=K} t_k tr g^k)."""

    def __init__(self, times: TimeVector):
        self.times = times

    def eval_jet(self, gjet, ngen):
        t = self.times
        traces = jm_power_traces(gjet, t.order, ngen)
        acc = None
        for tk, tr in zip(t.entries, traces):
            if tk == 0:
                continue
            term = tr * (tk / t.hbar)
            acc = term if acc is None else acc + term
        if acc is None:
            return Jet.constant(1.0, ngen, batch=gjet.shape[2:-1])
        return acc.exp()


class DetFactor(MatrixFunction):
    """det(zI - g)^{exponent} for a fixed numeric z, exponent +-1."""

    def __init__(self, z, exponent: int = 1):
        if exponent not in (1, -1):
            raise ValueError("exponent must be +1 or -1")
        self.z = complex(z)
        self.exponent = exponent

    def eval_jet(self, gjet, ngen):
        N = gjet.shape[0]
        zi = np.zeros_like(gjet)
        zi[..., 0] = self.z * np.eye(N).reshape((N, N) + (1,) * (gjet.ndim - 3))
        M = zi - gjet
        d = jm_det(M, ngen)
        if self.exponent == -1:
            # near-singularity relative to the Hadamard bound of zI - g
            body = M[..., 0]
            hadamard = np.prod(np.sqrt(np.sum(np.abs(body) ** 2, axis=1)), axis=0)
            if np.any(np.abs(d.body) < 1e-12 * hadamard):
                raise ZeroDivisionError(
                    f"det({self.z} I - g) is singular to working precision"
                )
            return d.reciprocal()
        return d


class Product(MatrixFunction):
    def __init__(self, *factors):
        self.factors = factors

    def eval_jet(self, gjet, ngen):
        out = None
        for f in self.factors:
            val = f.eval_jet(gjet, ngen)
            out = val if out is None else out * val
        return out


class TracePower(MatrixFunction):
    """tr g^k (derivative rule: d tr g^k = k g^{k-1})."""

    def __init__(self, k: int):
        self.k = k

    def eval_jet(self, gjet, ngen):
        return jm_power_traces(gjet, self.k, ngen)[-1]


class PowerOfTrace(MatrixFunction):
    """(tr g)^k (derivative rule: d (tr g)^k = k (tr g)^{k-1} I)."""

    def __init__(self, k: int):
        self.k = k

    def eval_jet(self, gjet, ngen):
        return jm_power_traces(gjet, 1, ngen)[0] ** self.k


class MatrixPower(MatrixFunction):
    """g^k as a matrix-valued function; engine-test only."""

    matrix_valued = True

    def __init__(self, k: int):
        self.k = k

    def eval_jet(self, gjet, ngen):
        from .jets import jm_mul

        out = gjet
        for _ in range(self.k - 1):
            out = jm_mul(out, gjet, ngen)
        return out


# -- channelled evaluators ------------------------------------------------------


class CharSeries:
    """Coefficients of w^m in det(I - w g)^{exponent} exp((1/hbar) sum t_k tr g^k).

    det(I - w g) = sum_{m<=N} h_m(-y) w^m with y_k = tr(g^k)/k, and its
    reciprocal follows from the order-N linear recurrence of a power-series
    inverse, so no series ring is needed.  Channels run m = 0..orders-1.
    With w = z^{-1} this is z^{-N} det(zI - g) (exponent +1).
    """

    def __init__(self, times, exponent: int, orders: int):
        if exponent not in (1, -1):
            raise ValueError("exponent must be +1 or -1")
        self.times = times
        self.exponent = exponent
        self.orders = orders

    def channels(self, gjet, ngen):
        N = gjet.shape[0]
        t = self.times
        kmax = max(N, t.order)
        traces = jm_power_traces(gjet, kmax, ngen)
        one = Jet.constant(1.0, ngen, batch=gjet.shape[2:-1])
        ys = [tr / k for k, tr in enumerate(traces, start=1)]
        dets = h_list([-y for y in ys[:N]], N, one=one)  # det(I - wg) coefficients
        if self.exponent == 1:
            coeffs = dets[: self.orders]
            zero = one * 0.0
            coeffs = coeffs + [zero] * (self.orders - len(coeffs))
        else:
            coeffs = [one]
            for m in range(1, self.orders):
                acc = None
                for j in range(1, min(N, m) + 1):
                    term = dets[j] * coeffs[m - j]
                    acc = term if acc is None else acc + term
                coeffs.append(-acc)
        expf = ExpTimes(t).eval_jet(gjet, ngen)
        return np.stack([(c * expf).coeff for c in coeffs])


class TimeMonomials:
    """Taylor channels of exp((1/hbar) sum t_k tr g^k) in the times.

    Channel alpha carries prod_k (tr g^k)^{alpha_k} / (alpha_k! hbar^{alpha_k}),
    i.e. the exact coefficient of t^alpha; monomials are truncated at weighted
    degree sum_k k alpha_k <= cutoff and ordered deterministically.
    """

    def __init__(self, hbar, cutoff: int, K: int | None = None):
        self.hbar = complex(hbar)
        self.cutoff = cutoff
        self.K = K if K is not None else cutoff
        self.alphas = weighted_monomials(self.K, cutoff)

    def channels(self, gjet, ngen):
        from math import factorial

        traces = jm_power_traces(gjet, self.K, ngen) if self.K else []
        one = Jet.constant(1.0, ngen, batch=gjet.shape[2:-1])
        # power cache: powers[k][e] = (tr g^{k+1})^e
        powers = []
        for k in range(self.K):
            emax = self.cutoff // (k + 1)
            row = [one]
            for _ in range(emax):
                row.append(row[-1] * traces[k])
            powers.append(row)
        out = []
        for alpha in self.alphas:
            term = one
            denom = 1.0
            for k, e in enumerate(alpha):
                if e:
                    term = term * powers[k][e]
                    denom *= factorial(e) * self.hbar**e
            out.append((term / denom).coeff)
        return np.stack(out)


def weighted_monomials(K: int, cutoff: int) -> list:
    """Exponent tuples alpha (length K) with sum_k k alpha_k <= cutoff."""

    def gen(k, budget):
        if k == K:
            yield ()
            return
        w = k + 1
        for e in range(budget // w + 1):
            for tail in gen(k + 1, budget - w * e):
                yield (e,) + tail

    return sorted(gen(0, cutoff), key=lambda a: (sum(k * e for k, e in enumerate(a, 1)), a))


# -- public derivative operations ----------------------------------------------


def matrix_derivative(f: MatrixFunction, g) -> np.ndarray:
    """d f at g: entry (a, b) is df/dg_{ba}.

    For matrix-valued f the result acts on C^N (x) C^N, assembled as
    sum_ab e_ab (x) (directional derivative of f along e_ba).
    """
    g = np.asarray(g, dtype=complex)
    N = g.shape[0]
    gjet = _probe_matrix(g, 1)
    val = f.eval_jet(gjet, 1)
    if f.matrix_valued:
        top = val[..., 1]  # raw jet matrix (N, N, B)
        return top.reshape(N, N, N, N).transpose(2, 0, 3, 1).reshape(N * N, N * N)
    top = val.coeff[..., 1]
    return top.reshape(N, N)


def iterated_derivative(f: MatrixFunction, slots, g, model: GaudinModel) -> TensorOperator:
    """d_{slots} f(g) embedded in End(V); slots are 1-based and distinct.

    The slot order is immaterial (mixed partials commute); the generator
    bookkeeping follows the order given, which the tests exploit.
    """
    slots = [int(i) for i in slots]
    if len(set(slots)) != len(slots):
        raise ValueError("slots must be distinct")
    for i in slots:
        if not 1 <= i <= model.n:
            raise ValueError(f"slot {i} out of range 1..{model.n}")
    if f.matrix_valued:
        raise ValueError("iterated derivatives are defined for scalar f only")
    g = np.asarray(g, dtype=complex)
    s = len(slots)
    gjet = _probe_matrix(g, s)
    val = f.eval_jet(gjet, s)
    partials = val.coeff[..., -1][None]
    return _assemble(partials, [i - 1 for i in slots], model.n, model.N)[0]


def _partials_by_size(evaluator, g0: np.ndarray, n: int) -> list:
    out = []
    for s in range(n + 1):
        gjet = _probe_matrix(g0, s)
        vals = evaluator.channels(gjet, s)  # (C, B, 2^s)
        out.append(vals[..., -1])
    return out


def apply_factor_chain_channels(evaluator, x, model: GaudinModel) -> np.ndarray:
    """(x - x_n + hbar d_n) ... (x - x_1 + hbar d_1) applied channel-wise.

    Returns (C, N^n, N^n).
    """
    N, n = model.N, model.n
    x = complex(x)
    parts = _partials_by_size(evaluator, model.g0, n)
    out = None
    for mask in range(1 << n):
        slots = [i for i in range(n) if mask >> i & 1]
        s = len(slots)
        coef = model.hbar**s
        for i in range(n):
            if not mask >> i & 1:
                coef *= x - model.marked_points[i]
        ops = _assemble(parts[s], slots, n, N)
        contrib = coef * ops
        out = contrib if out is None else out + contrib
    return out


def apply_factor_chain_channels_xpoly(evaluator, model: GaudinModel) -> np.ndarray:
    """Same chain with the x-dependence kept exact.

    Returns (n+1, C, N^n, N^n): operator coefficients of x^p, p ascending.
    """
    from numpy.polynomial import polynomial as npoly

    N, n = model.N, model.n
    parts = _partials_by_size(evaluator, model.g0, n)
    C = parts[0].shape[0]
    out = np.zeros((n + 1, C, N**n, N**n), dtype=complex)
    for mask in range(1 << n):
        slots = [i for i in range(n) if mask >> i & 1]
        s = len(slots)
        roots = [model.marked_points[i] for i in range(n) if not mask >> i & 1]
        pc = npoly.polyfromroots(roots) if roots else np.ones(1, dtype=complex)
        ops = model.hbar**s * _assemble(parts[s], slots, n, N)
        for p, cp in enumerate(pc):
            out[p] += cp * ops
    return out


def apply_factor_chain(f: MatrixFunction, x, model: GaudinModel) -> TensorOperator:
    """Scalar-function chain; returns one End(V) operator."""
    return apply_factor_chain_channels(f, x, model)[0]
