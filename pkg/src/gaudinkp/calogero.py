"""Classical rational Calogero-Moser system with coupling hbar^2.

Phase space is complex throughout (the quantum eigenvalues that seed it are
complex); nothing here assumes reality.  Conventions:

    Y_ik = -p_i delta_ik - hbar (1 - delta_ik) / (x_i - x_k)
    T_ik = -delta_ik sum_{j != i} 2 hbar / (x_i - x_j)^2
           + 2 hbar (1 - delta_ik) / (x_i - x_k)^2
    xdot_i = 2 p_i,    pdot_i = -4 sum_{j != i} hbar^2 / (x_i - x_j)^3

so Ydot = [T, Y] along the flow, H_2 = tr Y^2 generates it, and the higher
commuting flows use H_k = tr Y^k.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly


class CollisionError(RuntimeError):
    """Trajectory approached a coordinate collision."""

    def __init__(self, msg, last_good_time=None):
        super().__init__(msg)
        self.last_good_time = last_good_time


@dataclass(frozen=True)
class CMPhasePoint:
    """State (x_1..x_n, p_1..p_n) with the coupling scale hbar."""

    x: tuple
    p: tuple
    hbar: complex = 1.0

    def __post_init__(self):
        x = tuple(complex(v) for v in self.x)
        p = tuple(complex(v) for v in self.p)
        if len(x) != len(p):
            raise ValueError("coordinate and momentum counts differ")
        for i in range(len(x)):
            for j in range(i + 1, len(x)):
                if x[i] == x[j]:
                    raise ValueError("coordinates must be pairwise distinct")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "hbar", complex(self.hbar))

    @property
    def n(self) -> int:
        return len(self.x)

    def arrays(self):
        return np.asarray(self.x, dtype=complex), np.asarray(self.p, dtype=complex)


def lax_matrices(s: CMPhasePoint):
    """The Lax pair (Y, T); row sums of T vanish by construction."""
    x, p = s.arrays()
    n, hb = s.n, s.hbar
    Y = -np.diag(p)
    T = np.zeros((n, n), dtype=complex)
    for i in range(n):
        for k in range(n):
            if i == k:
                continue
            d = x[i] - x[k]
            Y[i, k] = -hb / d
            T[i, k] = 2 * hb / d**2
        T[i, i] = -np.sum(T[i, :])
    return Y, T


def lax_from_data(x, p, hbar) -> np.ndarray:
    """Y alone, from raw arrays (used inside integrators)."""
    x = np.asarray(x, dtype=complex)
    p = np.asarray(p, dtype=complex)
    n = len(x)
    Y = -np.diag(p)
    for i in range(n):
        for k in range(n):
            if i != k:
                Y[i, k] = -hbar / (x[i] - x[k])
    return Y


def eom_rhs(s: CMPhasePoint):
    """(xdot, pdot) of the inverse-cube flow."""
    x, p = s.arrays()
    hb = s.hbar
    xdot = 2 * p
    pdot = np.zeros(s.n, dtype=complex)
    for i in range(s.n):
        for j in range(s.n):
            if j != i:
                pdot[i] += -4 * hb**2 / (x[i] - x[j]) ** 3
    return xdot, pdot


def hamiltonian_gradients(x, p, hbar, k: int):
    """(dH_k/dx, dH_k/dp) for H_k = tr Y^k, analytically via dY entries."""
    n = len(x)
    Y = lax_from_data(x, p, hbar)
    P = np.linalg.matrix_power(Y, k - 1) if k >= 1 else np.eye(n, dtype=complex)
    dp = -k * np.diag(P)
    dx = np.zeros(n, dtype=complex)
    for i in range(n):
        acc = 0.0
        for b in range(n):
            if b != i:
                acc += P[b, i] / (x[i] - x[b]) ** 2
        for a in range(n):
            if a != i:
                acc -= P[i, a] / (x[a] - x[i]) ** 2
        dx[i] = k * hbar * acc
    return dx, dp


@dataclass
class Trajectory:
    times: np.ndarray
    xs: np.ndarray                      # (steps+1, n)
    ps: np.ndarray
    hbar: complex
    conserved: np.ndarray               # (steps+1, kmax): tr Y^k samples
    drift: np.ndarray = field(init=False)

    def __post_init__(self):
        ref = self.conserved[0]
        scale = np.maximum(np.abs(ref), 1.0)
        self.drift = np.abs(self.conserved - ref) / scale

    @property
    def final(self) -> CMPhasePoint:
        return CMPhasePoint(tuple(self.xs[-1]), tuple(self.ps[-1]), self.hbar)


def _rk4(x, p, dt, rhs):
    k1x, k1p = rhs(x, p)
    k2x, k2p = rhs(x + dt / 2 * k1x, p + dt / 2 * k1p)
    k3x, k3p = rhs(x + dt / 2 * k2x, p + dt / 2 * k2p)
    k4x, k4p = rhs(x + dt * k3x, p + dt * k3p)
    return (
        x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x),
        p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p),
    )


def _min_gap(x) -> float:
    n = len(x)
    if n < 2:
        return np.inf
    return min(abs(x[i] - x[j]) for i in range(n) for j in range(i + 1, n))


def _flow(s0: CMPhasePoint, rhs, t_final: float, dt: float,
          collision_factor: float, kmax: int) -> Trajectory:
    x, p = s0.arrays()
    hb = s0.hbar
    scale = max(1.0, max(abs(v) for v in x) if s0.n else 1.0)
    threshold = collision_factor * scale
    steps = int(round(t_final / dt))
    times = np.arange(steps + 1) * dt
    xs = np.empty((steps + 1, s0.n), dtype=complex)
    ps = np.empty_like(xs)
    cons = np.empty((steps + 1, kmax), dtype=complex)

    def record(j):
        xs[j], ps[j] = x, p
        Y = lax_from_data(x, p, hb)
        P = np.eye(s0.n, dtype=complex)
        for k in range(kmax):
            P = P @ Y
            cons[j, k] = np.trace(P)

    record(0)
    for j in range(1, steps + 1):
        x, p = _rk4(x, p, dt, rhs)
        if _min_gap(x) < threshold:
            raise CollisionError(
                f"coordinates within {threshold:.2e} at t = {times[j]:.6g}",
                last_good_time=times[j - 1],
            )
        record(j)
    return Trajectory(times, xs, ps, hb, cons)


def integrate(s0: CMPhasePoint, t_final: float, dt: float,
              collision_factor: float = 1e-6, kmax: int | None = None) -> Trajectory:
    """RK4 on the inverse-cube equations of motion, with conservation log."""

    hb = s0.hbar

    def rhs(x, p):
        xdot = 2 * p
        pdot = np.zeros(len(x), dtype=complex)
        for i in range(len(x)):
            for j in range(len(x)):
                if j != i:
                    pdot[i] += -4 * hb**2 / (x[i] - x[j]) ** 3
        return xdot, pdot

    return _flow(s0, rhs, t_final, dt, collision_factor, kmax or max(s0.n, 1))


def hierarchy_flow(s0: CMPhasePoint, k: int, t_k: float, dt: float,
                   collision_factor: float = 1e-6) -> Trajectory:
    """Flow of the commuting Hamiltonian H_k = tr Y^k (k >= 1).

    Hamilton's equations xdot = dH_k/dp, pdot = -dH_k/dx; k = 2 is the
    inverse-cube flow itself, k = 1 a rigid translation.  Negative t_k runs
    the flow backwards; Trajectory.times then measure |t_k|.
    """
    if k < 1:
        raise ValueError("flow index must be >= 1")
    hb = s0.hbar
    direction = 1.0 if t_k >= 0 else -1.0

    def rhs(x, p):
        dx, dp = hamiltonian_gradients(x, p, hb, k)
        return direction * dp, -direction * dx

    return _flow(s0, rhs, abs(t_k), dt, collision_factor, max(s0.n, k))


# -- characteristic polynomial --------------------------------------------------


def char_poly_direct(Y: np.ndarray) -> np.ndarray:
    """Coefficients J_0..J_n of det(zI - Y) = sum_k J_k z^{n-k}.

    Direct route: the determinant is evaluated at n+1 nodes and the degree-n
    polynomial interpolated, so no eigenvalue solve is involved.
    """
    Y = np.asarray(Y, dtype=complex)
    n = Y.shape[0]
    rho = 1.0 + np.linalg.norm(Y, ord="fro")
    nodes = rho * np.exp(2j * np.pi * np.arange(n + 1) / (n + 1))
    vals = np.array([np.linalg.det(z * np.eye(n) - Y) for z in nodes])
    V = np.vander(nodes, n + 1, increasing=True)
    asc = np.linalg.solve(V, vals)
    return asc[::-1]  # J_k multiplies z^{n-k}


def partial_matchings(n: int):
    """All sets of disjoint unordered index pairs from {0..n-1}."""

    def rec(avail):
        if not avail:
            yield ()
            return
        i = avail[0]
        for m in rec(avail[1:]):
            yield m
        for pos in range(1, len(avail)):
            j = avail[pos]
            rest = avail[1:pos] + avail[pos + 1:]
            for m in rec(rest):
                yield ((i, j),) + m

    return list(rec(tuple(range(n))))


def char_poly_matching(s: CMPhasePoint) -> np.ndarray:
    """det(zI - Y) by the finite expansion of the pair-derivative exponential:

        exp( sum_{i<j} hbar^2 d_{p_i} d_{p_j} / (x_i-x_j)^2 ) prod_l (z + p_l)

    Each momentum derivative consumes its linear factor, so only partial
    matchings survive and the sum is exact.  Returns J_0..J_n as above.
    """
    x, p = s.arrays()
    n, hb = s.n, s.hbar
    asc = np.zeros(n + 1, dtype=complex)
    for matching in partial_matchings(n):
        used = {i for pair in matching for i in pair}
        weight = 1.0
        for (i, j) in matching:
            weight *= hb**2 / (x[i] - x[j]) ** 2
        rest = [-p[l] for l in range(n) if l not in used]
        poly = npoly.polyfromroots(rest) if rest else np.ones(1, dtype=complex)
        asc[: len(poly)] += weight * poly
    return asc[::-1]


def trace_powers(Y: np.ndarray, kmax: int) -> np.ndarray:
    """[tr Y^0, tr Y^1, ..., tr Y^kmax]."""
    n = Y.shape[0]
    out = np.empty(kmax + 1, dtype=complex)
    P = np.eye(n, dtype=complex)
    out[0] = n
    for k in range(1, kmax + 1):
        P = P @ Y
        out[k] = np.trace(P)
    return out


def newton_identity_residual(s: CMPhasePoint) -> float:
    """|sum_{k=0..n} J_{n-k} tr Y^k| with J from the direct characteristic
    polynomial (H_0 = n); vanishes by Newton's formula."""
    Y, _ = lax_matrices(s)
    J = char_poly_direct(Y)
    H = trace_powers(Y, s.n)
    acc = sum(J[s.n - k] * H[k] for k in range(s.n + 1))
    scale = max(1.0, float(np.max(np.abs(J)) * np.max(np.abs(H))))
    return float(abs(acc) / scale)


def xy_commutator(s: CMPhasePoint) -> np.ndarray:
    """[X, Y] - hbar (I - ones ones^T); identically zero."""
    x, _ = s.arrays()
    Y, _ = lax_matrices(s)
    X = np.diag(x)
    ones = np.ones((s.n, s.n), dtype=complex)
    return X @ Y - Y @ X - s.hbar * (np.eye(s.n) - ones)


def tau_determinant(x, t, X0: np.ndarray, Y0: np.ndarray, twist_traces) -> complex:
    """exp((1/hbar) sum_k t_k tr g0^k) det(xI - X0 + sum_k k t_k Y0^{k-1}).

    `t` is a TimeVector (its hbar is used); twist_traces[k-1] = tr g0^k.
    """
    n = X0.shape[0]
    M = complex(x) * np.eye(n, dtype=complex) - np.asarray(X0, dtype=complex)
    P = np.eye(n, dtype=complex)
    for k, tk in enumerate(t.entries, start=1):
        M = M + k * tk * P
        P = P @ Y0
    pref = np.exp(sum(tk * tr for tk, tr in zip(t.entries, twist_traces)) / t.hbar)
    return complex(pref * np.linalg.det(M))
