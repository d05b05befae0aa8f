"""Gaudin transfer matrices and the master T-operator.

Conventions: the polynomial normalization applies the factor chain to the
character directly; the rational normalization divides by prod_i (x - x_i).
The master T-operator is the chain applied to exp((1/hbar) sum_k t_k tr g^k)
and generates all transfer matrices through its Taylor coefficients in t.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from .hilbert import EigenState, GaudinModel, JointSpectrum, TensorOperator
from .matderiv import (
    Character,
    CharSeries,
    ExpTimes,
    TimeMonomials,
    apply_factor_chain,
    apply_factor_chain_channels,
    apply_factor_chain_channels_xpoly,
)
from .symfun import TimeVector, TruncationError, YoungDiagram, schur_monomials


def _check_times(t: TimeVector, model: GaudinModel) -> TimeVector:
    if not isinstance(t, TimeVector):
        return TimeVector(model.hbar, tuple(t))
    if t.hbar != model.hbar:
        raise ValueError("time vector and model disagree about hbar")
    return t


def transfer_matrix(lam, x, model: GaudinModel,
                    normalization: str = "polynomial") -> TensorOperator:
    """T_lam(x) (polynomial) or its rational form T_lam(x) / prod(x - x_i)."""
    lam = lam if isinstance(lam, YoungDiagram) else YoungDiagram(lam)
    x = complex(x)
    op = apply_factor_chain(Character(lam), x, model)
    if normalization == "polynomial":
        return op
    if normalization == "rational":
        denom = np.prod([x - xi for xi in model.marked_points]) if model.n else 1.0
        if denom == 0:
            raise ZeroDivisionError(
                "rational normalization is singular at a marked point"
            )
        return op / denom
    raise ValueError(f"unknown normalization {normalization!r}")


@dataclass(frozen=True)
class TransferMatrix:
    """Evaluator wrapper: x -> T_lam(x) in a fixed normalization."""

    lam: YoungDiagram
    model: GaudinModel
    normalization: str = "polynomial"

    def __call__(self, x) -> TensorOperator:
        return transfer_matrix(self.lam, x, self.model, self.normalization)


def master_t(x, t, model: GaudinModel) -> TensorOperator:
    """T(x, t): the chain applied to exp((1/hbar) sum_k t_k tr g^k) at g0.

    The trace exponential is exact (g0 is diagonal); truncation exists only
    in the time vector itself.
    """
    t = _check_times(t, model)
    return apply_factor_chain(ExpTimes(t), complex(x), model)


@dataclass(frozen=True)
class MasterT:
    model: GaudinModel

    def __call__(self, x, t) -> TensorOperator:
        return master_t(x, t, self.model)


def master_t_xpoly(t, model: GaudinModel) -> np.ndarray:
    """Operator coefficients of x^p in T(x, t), p = 0..n ascending."""
    t = _check_times(t, model)
    return apply_factor_chain_channels_xpoly(ExpTimes(t), model)[:, 0]


def master_t_taylor(model: GaudinModel, cutoff: int, x=None, K: int | None = None):
    """Taylor expansion of T(x, t) in t at t = 0.

    Returns (alphas, ops): exponent tuples of weighted degree <= cutoff and,
    per tuple, the operator coefficient of t^alpha.  With x=None the ops come
    back as x-polynomial coefficient stacks (n+1, D, D) instead.
    """
    ev = TimeMonomials(model.hbar, cutoff, K=K)
    if x is None:
        ops = apply_factor_chain_channels_xpoly(ev, model)
        ops = np.moveaxis(ops, 0, 1)  # (C, n+1, D, D)
    else:
        ops = apply_factor_chain_channels(ev, complex(x), model)
    return ev.alphas, ops


def time_prefactor(t, model: GaudinModel) -> complex:
    """exp((1/hbar) sum_k t_k tr g0^k), the scalar factor of every eigenvalue."""
    t = _check_times(t, model)
    k = np.asarray(model.twist, dtype=complex)
    traces = np.array([np.sum(k ** j) for j in range(1, t.order + 1)])
    return complex(np.exp(np.dot(t.as_array(), traces) / model.hbar))


def transfer_from_master(lam, x, model: GaudinModel, budget: int = 6) -> TensorOperator:
    """T_lam(x) recovered from time derivatives of the master T-operator:
    apply the Schur differential polynomial in hbar * {d/dt_1, d/dt_2 / 2, ...}
    to the exact Taylor expansion of T(x, t) at t = 0."""
    lam = lam if isinstance(lam, YoungDiagram) else YoungDiagram(lam)
    w = lam.weight
    if w > budget:
        raise TruncationError(f"|lam| = {w} exceeds derivative budget {budget}")
    alphas, ops = master_t_taylor(model, cutoff=w, x=complex(x), K=max(w, 1))
    coeff_map = {tuple(a): op for a, op in zip(alphas, ops)}
    out = np.zeros((model.dim, model.dim), dtype=complex)
    for alpha, c in schur_monomials(lam).items():
        key = list(alpha) + [0] * (max(w, 1) - len(alpha))
        weight = c
        for k, e in enumerate(alpha, start=1):
            weight *= (model.hbar / k) ** e * factorial(e)
        out += weight * coeff_map[tuple(key)]
    return out


def generating_series(x, sign: int, model: GaudinModel, depth: int) -> list:
    """Coefficients of T(x, +-hbar [z^{-1}]) as a series at z = infinity.

    sign=+1: T(x, +hbar[z^{-1}]) = sum_s z^{-s} T_{(s)}(x); returns the
    one-row operators T_{(s)}, s = 0..depth.
    sign=-1: T(x, -hbar[z^{-1}]) = sum_a (-z)^{-a} T_{(1^a)}(x); returns the
    one-column operators T_{(1^a)}, a = 0..depth (identically zero past a=N,
    which the series reproduces by cancellation, not truncation).
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    t0 = TimeVector.zero(model.hbar, 1)
    ev = CharSeries(t0, exponent=(-1 if sign == +1 else +1), orders=depth + 1)
    ops = apply_factor_chain_channels(ev, complex(x), model)
    if sign == +1:
        return [ops[m] for m in range(depth + 1)]
    return [(-1.0) ** a * ops[a] for a in range(depth + 1)]


# -- eigenvalue-level tau functions --------------------------------------------


@dataclass
class TauEvaluation:
    """One eigenstate's tau: monic-in-x polynomial data at a fixed time."""

    state: EigenState
    coeffs: np.ndarray        # ascending, length n+1, with the prefactor stripped
    roots: np.ndarray
    fit_residual: float
    prefactor: complex
    ok: bool


def state_value(op: TensorOperator, state: EigenState) -> complex:
    """Eigenvalue of a family member on a joint eigenstate (Rayleigh form)."""
    v = state.vector
    return complex(np.vdot(v, op @ v) / np.vdot(v, v))


def default_x_grid(model: GaudinModel, count: int | None = None) -> np.ndarray:
    """Interpolation nodes on a circle enclosing the marked points."""
    n = model.n
    count = count if count is not None else n + 2
    if n:
        c = np.mean(model.x)
        rho = 2.0 * max(abs(model.x - c)) + 1.0
    else:
        c, rho = 0.0, 1.0
    return c + rho * np.exp(2j * np.pi * np.arange(count) / count)


def tau_eigenvalues(spectrum: JointSpectrum, t, model: GaudinModel,
                    x_grid=None, fit_tol: float = 1e-8) -> list:
    """Per joint eigenstate: fit the degree-n monic polynomial tau(x, t).

    The master T is evaluated at n+2 points; the degree-n polynomial is
    interpolated from n+1 of them and certified at the remaining point(s),
    so the polynomiality claim is checked rather than assumed.
    """
    t = _check_times(t, model)
    n = model.n
    grid = np.asarray(x_grid, dtype=complex) if x_grid is not None else default_x_grid(model)
    if len(grid) < n + 2:
        raise ValueError(f"need at least {n + 2} interpolation points")
    ops = [master_t(x, t, model) for x in grid]
    pref = time_prefactor(t, model)
    out = []
    for state in spectrum:
        vals = np.array([state_value(op, state) for op in ops]) / pref
        V = np.vander(grid[: n + 1], n + 1, increasing=True)
        coeffs = np.linalg.solve(V, vals[: n + 1])
        scale = max(np.max(np.abs(vals)), 1e-300)
        resid = max(
            abs(np.polyval(coeffs[::-1], xq) - vq) for xq, vq in zip(grid[n + 1:], vals[n + 1:])
        ) / scale
        resid = max(resid, abs(coeffs[-1] - 1.0))
        roots = np.roots(coeffs[::-1]) if n else np.empty(0, dtype=complex)
        out.append(
            TauEvaluation(
                state=state,
                coeffs=coeffs,
                roots=roots,
                fit_residual=float(resid),
                prefactor=pref,
                ok=bool(resid <= fit_tol),
            )
        )
    return out
