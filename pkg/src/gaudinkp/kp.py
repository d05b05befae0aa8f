"""KP-side verification for the master T-operator's eigenvalues.

Every check here runs per joint eigenstate: the family is commuting, so the
eigenvalue of the master T on a joint eigenstate is a scalar tau function,
and that scalar is where the KP structure is falsifiable at desk scale.

Miwa-shifted taus are never produced by substituting shifted times into a
truncated time vector.  The full infinite shift resums in closed form:

    tau(x, t - hbar[z^{-1}])  =  chain[ det(I - z^{-1} g) exp((1/hbar) sum t_k tr g^k) ]
    tau(x, t + hbar[z^{-1}])  =  chain[ det(I - z^{-1} g)^{-1} exp(...) ]

so the minus shift is an exact polynomial of degree N in w = z^{-1}, and the
plus shift is a w-series that converges for |z| > max |k_a|.  The bilinear
residue pairs those series against the entire series of exp((1/hbar)
xi(t - t', z)) and reads off the coefficient of z^{-1}, which is the contour
integral around infinity up to 2 pi i.
"""

from __future__ import annotations

import warnings

import numpy as np
from numpy.polynomial import polynomial as npoly

from .hilbert import EigenState, GaudinModel
from .master import state_value, time_prefactor
from .matderiv import CharSeries, apply_factor_chain_channels, apply_factor_chain_channels_xpoly
from .symfun import TimeVector, xi


class WindowError(ValueError):
    """Series window too small for a trustworthy residue."""


class TauPoleError(ZeroDivisionError):
    """Evaluation at a zero of tau (a Calogero-Moser particle position)."""


def _times(t, model) -> TimeVector:
    if isinstance(t, TimeVector):
        if t.hbar != model.hbar:
            raise ValueError("time vector and model disagree about hbar")
        return t
    return TimeVector(model.hbar, tuple(t))


def shifted_tau_ops(t, shift_sign: int, orders: int, x, model: GaudinModel) -> np.ndarray:
    """Operator coefficients of w^m in T(x, t + shift_sign * hbar [z^{-1}]).

    shift_sign=-1 gives the degree-N polynomial (det factor), shift_sign=+1
    the reciprocal series.  Returns (orders, D, D).
    """
    t = _times(t, model)
    if shift_sign not in (+1, -1):
        raise ValueError("shift_sign must be +1 or -1")
    ev = CharSeries(t, exponent=(+1 if shift_sign == -1 else -1), orders=orders)
    return apply_factor_chain_channels(ev, complex(x), model)


def shifted_tau_state(state: EigenState, t, shift_sign: int, orders: int, x,
                      model: GaudinModel) -> np.ndarray:
    ops = shifted_tau_ops(t, shift_sign, orders, x, model)
    return np.array([state_value(op, state) for op in ops])


def exp_xi_coeffs(dt: TimeVector, orders: int) -> np.ndarray:
    """Taylor coefficients E_m of exp((1/hbar) xi(dt, z)) in z, m = 0..orders-1."""
    c = dt.as_array() / dt.hbar  # xi'(z)-related: xi = sum c_k hbar ... here plain sum c_k z^k
    E = np.zeros(orders, dtype=complex)
    E[0] = 1.0
    for m in range(1, orders):
        acc = 0.0
        for k in range(1, min(dt.order, m) + 1):
            acc += k * c[k - 1] * E[m - k]
        E[m] = acc / m
    return E


def _residue_from_series(minus, plus, E, window):
    prod = npoly.polymul(minus, plus)[:window]
    terms = E[: window - 1] * prod[1:window]
    return complex(np.sum(terms)), terms


def bilinear_residues(states, x, t, t_prime, window: int, model: GaudinModel,
                      tail_tol: float = 1e-9, stability: bool = False) -> list:
    """Bilinear residues for many eigenstates at one (x, t, t') sample.

    The operator-valued series are built once and projected per state.  With
    stability=True the series run to 2*window and each entry also carries the
    doubled-window residue.  Refuses (WindowError) when the terms near the
    window edge have not decayed below tail_tol times the largest term, since
    the reported residue would then be unreliable.
    """
    t = _times(t, model)
    tp = _times(t_prime, model)
    N = model.N
    if window < N + 2:
        raise WindowError(f"window {window} below minimum {N + 2}")
    wmax = 2 * window if stability else window
    order = max(t.order, tp.order)
    pad = lambda tv: tuple(tv.entries) + (0.0,) * (order - tv.order)
    dt = TimeVector(model.hbar, tuple(a - b for a, b in zip(pad(t), pad(tp))))

    minus_ops = shifted_tau_ops(t, -1, N + 1, x, model)
    plus_ops = shifted_tau_ops(tp, +1, wmax, x, model)
    E = exp_xi_coeffs(dt, wmax)
    out = []
    for state in states:
        minus = np.array([state_value(op, state) for op in minus_ops])
        plus = np.array([state_value(op, state) for op in plus_ops])
        residue, terms = _residue_from_series(minus, plus, E, window)
        scale = float(np.max(np.abs(terms))) if len(terms) else 0.0
        if scale > 0:
            tail = float(np.max(np.abs(terms[-3:])))
            if tail > tail_tol * scale:
                raise WindowError(
                    f"window {window} too small: edge terms at {tail / scale:.2e} "
                    f"of the peak have not decayed below {tail_tol:.1e}"
                )
        entry = {"residue": residue, "scale": scale, "terms": terms}
        if stability:
            entry["residue_doubled"] = _residue_from_series(minus, plus, E, 2 * window)[0]
        out.append(entry)
    return out


def bilinear_residue(state: EigenState, x, t, t_prime, window: int,
                     model: GaudinModel, full_output: bool = False,
                     tail_tol: float = 1e-9):
    """Coefficient of z^{-1} in exp((1/hbar)xi(t-t',z)) tau(x,t-hbar[1/z]) tau(x,t'+hbar[1/z]).

    Must vanish for every eigenstate; see bilinear_residues for the batch
    form and the window refusal contract.
    """
    entry = bilinear_residues([state], x, t, t_prime, window, model,
                              tail_tol=tail_tol)[0]
    if full_output:
        return entry
    return entry["residue"]


# -- Baker-Akhiezer function ---------------------------------------------------


def ba_coefficients(state: EigenState, x, t, model: GaudinModel,
                    tau_floor: float = 1e-10) -> np.ndarray:
    """Coefficients phi_0..phi_N of the z^{-1}-polynomial e^{-(xz+xi)/hbar} psi.

    phi_0 = 1 identically (the m = 0 coefficient of the shifted tau is tau
    itself); a tau zero at this x is reported as a pole.
    """
    t = _times(t, model)
    vals = shifted_tau_state(state, t, -1, model.N + 1, x, model)
    tau = vals[0]
    if abs(tau) < tau_floor * max(np.max(np.abs(vals)), 1.0):
        raise TauPoleError(
            f"tau({x}) ~ {tau:.3e}: x sits at (or near) a particle position"
        )
    return vals / tau


def ba_function(state: EigenState, x, t, z, model: GaudinModel) -> complex:
    """psi(x, t; z) = e^{(xz + xi(t,z))/hbar} tau(x, t - hbar[z^{-1}]) / tau(x, t)."""
    t = _times(t, model)
    z = complex(z)
    if z == 0:
        raise ZeroDivisionError("z must be nonzero")
    phi = ba_coefficients(state, x, t, model)
    w = 1.0 / z
    poly = complex(npoly.polyval(w, phi))
    pref = np.exp((complex(x) * z + xi(t, z)) / model.hbar)
    return complex(pref * poly)


# -- the t_2 linear problem ------------------------------------------------------


def _state_xpoly_coeffs(state: EigenState, t, model: GaudinModel) -> np.ndarray:
    """a[p, m]: coefficient of x^p in the w^m coefficient of the shifted tau."""
    t = _times(t, model)
    ev = CharSeries(t, exponent=+1, orders=model.N + 1)
    ops = apply_factor_chain_channels_xpoly(ev, model)  # (n+1, C, D, D)
    n1, C = ops.shape[0], ops.shape[1]
    out = np.empty((n1, C), dtype=complex)
    for p in range(n1):
        for m in range(C):
            out[p, m] = state_value(ops[p, m], state)
    return out


def _psi_parts(a: np.ndarray, x, z, t: TimeVector, hbar):
    """psi, psi', psi'' (exact in x) and tau, tau', tau'' from coefficient table a."""
    x = complex(x)
    w = 1.0 / z
    # G(x) = sum_m w^m A_m(x);  tau(x) = A_0(x)
    gcoef = a @ (w ** np.arange(a.shape[1]))
    tcoef = a[:, 0]
    d1 = npoly.polyder(gcoef)
    d2 = npoly.polyder(gcoef, 2)
    t1 = npoly.polyder(tcoef)
    t2 = npoly.polyder(tcoef, 2)
    G = npoly.polyval(x, gcoef)
    Gp = npoly.polyval(x, d1) if len(d1) else 0.0
    Gpp = npoly.polyval(x, d2) if len(d2) else 0.0
    tau = npoly.polyval(x, tcoef)
    taup = npoly.polyval(x, t1) if len(t1) else 0.0
    taupp = npoly.polyval(x, t2) if len(t2) else 0.0
    if tau == 0:
        raise TauPoleError("tau vanishes at the evaluation point")
    phi = G / tau
    phip = Gp / tau - G * taup / tau**2
    phipp = (Gpp / tau - 2 * Gp * taup / tau**2
             - G * taupp / tau**2 + 2 * G * taup**2 / tau**3)
    theta = z / hbar
    pref = np.exp(theta * x + xi(t, z) / hbar)
    psi = pref * phi
    psip = pref * (theta * phi + phip)
    psipp = pref * (theta**2 * phi + 2 * theta * phip + phipp)
    return psi, psip, psipp, tau, taup, taupp


def linear_problem_residual(state: EigenState, x, t, z, step: float,
                            model: GaudinModel) -> float:
    """|hbar d_{t2} psi - hbar^2 d_x^2 psi - 2 u psi| / |psi|.

    x-derivatives are exact (the closed-form x-dependence is polynomial); the
    t_2 derivative uses central differences with the given step, so the
    residual of the true identity is O(step^2).
    """
    t = _times(t, model)
    if t.order < 2:
        t = TimeVector(model.hbar, tuple(t.entries) + (0.0,) * (2 - t.order))
    z = complex(z)
    hb = model.hbar

    a0 = _state_xpoly_coeffs(state, t, model)
    psi, _, psipp, tau, taup, taupp = _psi_parts(a0, x, z, t, hb)
    u = hb**2 * (taupp / tau - (taup / tau) ** 2)

    tp = t.replace_entry(2, t.entries[1] + step)
    tm = t.replace_entry(2, t.entries[1] - step)
    psi_p = _psi_parts(_state_xpoly_coeffs(state, tp, model), x, z, tp, hb)[0]
    psi_m = _psi_parts(_state_xpoly_coeffs(state, tm, model), x, z, tm, hb)[0]
    if abs(psi_p - psi_m) < 1e-12 * max(abs(psi_p), abs(psi_m), 1e-300):
        warnings.warn("t2 step is at the rounding floor; residual is noise-dominated")
    dpsi_dt2 = (psi_p - psi_m) / (2 * step)

    resid = hb * dpsi_dt2 - hb**2 * psipp - 2 * u * psi
    return float(abs(resid) / max(abs(psi), 1e-300))


def log_tau_ddx(state: EigenState, x, t, model: GaudinModel) -> complex:
    """u(x, t) = hbar^2 d_x^2 log tau, from the exact x-polynomial."""
    t = _times(t, model)
    a = _state_xpoly_coeffs(state, t, model)
    _, _, _, tau, taup, taupp = _psi_parts(a, x, 1.0, t, model.hbar)
    return complex(model.hbar**2 * (taupp / tau - (taup / tau) ** 2))
