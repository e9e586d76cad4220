"""Multi-slit Loewner dynamics with capacity weights and conserved fields.

The chain g_t solves  dg/dt = sum_j 2 nu_j(t) / (g - x_j(t))  with driving

    dx_j/dt = nu_j U_j(x, xi) + sum_{k != j} 2 nu_k / (x_j - x_k),

while the charges and any tracked points are advected by the same flow.
Along the flow the field

    N_t(z) = g'(z) prod_j (g(z) - x_j(t)) / prod_l (g(z) - xi_l(t))^2

is conserved (with a (g(z)-u)^(2m-n-2) prefactor when u is finite), which
the integrator monitors as an accuracy and correctness check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import Configuration, Uniformization, is_infinity
from .stationary import _residual_values, drift_values


class StationarityError(ValueError):
    pass


@dataclass(frozen=True)
class LoewnerHistory:
    """Dense trajectory of the driving data and tracked monitor points."""

    times: np.ndarray          # (T,)
    x: np.ndarray              # (T, n)
    xi: np.ndarray             # (T, m) complex
    g: np.ndarray              # (T, K) complex, monitor images
    g_prime: np.ndarray        # (T, K) complex
    monitors: tuple[complex, ...]
    nu_description: str
    dt: float
    requested_t_end: float
    halted: str | None = None          # "collision" / "monitor_swallowed"
    swallowed: tuple[int, ...] = ()

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def m(self) -> int:
        return self.xi.shape[1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def state_at(self, index: int):
        return (float(self.times[index]), self.x[index], self.xi[index],
                self.g[index], self.g_prime[index])


@dataclass(frozen=True)
class IomReport:
    """Initial values and maximal relative drift of N_t(z) per monitor."""

    initial: tuple[complex, ...]
    max_relative_drift: tuple[float, ...]
    excluded: tuple[int, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def worst(self) -> float:
        kept = [d for i, d in enumerate(self.max_relative_drift) if i not in self.excluded]
        return max(kept, default=0.0)


def _as_nu(nu, n: int):
    if nu is None:
        vec = np.ones(n)
        return (lambda t: vec), "uniform"
    if callable(nu):
        return nu, "callable"
    vec = np.asarray(nu, dtype=float)
    if vec.shape != (n,):
        raise ValueError(f"nu must have length {n}")
    if np.any(vec < 0):
        raise ValueError("capacity weights must be nonnegative")
    return (lambda t: vec), "constant " + np.array2string(vec)


def driving_rhs(x: np.ndarray, xi: np.ndarray, nu: np.ndarray) -> np.ndarray:
    """dx_j/dt of the driving system (real vector)."""
    n = len(x)
    U = drift_values(x.astype(complex), xi).real
    out = np.zeros(n)
    for j in range(n):
        acc = nu[j] * U[j]
        for k in range(n):
            if k != j:
                acc += 2.0 * nu[k] / (x[j] - x[k])
        out[j] = acc
    return out


def _full_rhs(x, xi, g, gp, nu):
    n = len(x)
    xdot = driving_rhs(x, xi, nu)
    xidot = np.zeros_like(xi)
    for l in range(len(xi)):
        xidot[l] = sum(2.0 * nu[j] / (xi[l] - x[j]) for j in range(n))
    gdot = np.zeros_like(g)
    gpdot = np.zeros_like(gp)
    for i in range(len(g)):
        gdot[i] = sum(2.0 * nu[j] / (g[i] - x[j]) for j in range(n))
        gpdot[i] = gp[i] * (-sum(2.0 * nu[j] / (g[i] - x[j]) ** 2 for j in range(n)))
    return xdot, xidot, gdot, gpdot


def evolve(cfg: Configuration, nu=None, t_end: float = 0.1, dt: float = 1e-4,
           monitors=()) -> LoewnerHistory:
    """Integrate the driving system with classical 4th-order fixed steps.

    The input must be a stationary half-plane configuration with u at
    infinity; the step is halved automatically whenever the minimal gap
    among the x shrinks by another factor of ten, and integration halts
    before t_end on a collision (gap < 1e-5) or a swallowed monitor.
    """
    if cfg.uniformization is not Uniformization.HALF_PLANE or not is_infinity(cfg.u):
        raise ValueError("evolution runs in the half-plane picture with u at infinity; "
                         "transport disk scenarios first")
    if dt <= 0:
        raise ValueError("dt must be positive")
    res = _residual_values(cfg.x_complex(), cfg.xi, cfg.u, cfg.n, cfg.m)
    res_max = float(np.max(np.abs(res))) if len(res) else 0.0
    if res_max >= 1e-8:
        raise StationarityError(
            f"configuration is not stationary (residual {res_max:.3g}); evolution refused")
    monitors = tuple(complex(z) for z in monitors)
    if any(z.imag == 0 for z in monitors):
        raise ValueError("monitors must lie off the real axis")

    nu_fn, nu_desc = _as_nu(nu, cfg.n)
    x = np.array([complex(v).real for v in cfg.x], dtype=float)
    xi = np.array(cfg.xi, dtype=complex)
    g = np.array(monitors, dtype=complex)
    gp = np.ones(len(monitors), dtype=complex)

    times = [0.0]
    xs, xis, gs, gps = [x.copy()], [xi.copy()], [g.copy()], [gp.copy()]
    halted = None
    swallowed: list[int] = []

    gap0 = np.min(np.diff(x)) if cfg.n > 1 else math.inf
    halve_at = gap0 / 10.0
    step = dt
    t = 0.0

    def rk4(t, h, x, xi, g, gp):
        nu1 = nu_fn(t)
        k1 = _full_rhs(x, xi, g, gp, nu1)
        nu2 = nu_fn(t + 0.5 * h)
        k2 = _full_rhs(x + 0.5 * h * k1[0], xi + 0.5 * h * k1[1],
                       g + 0.5 * h * k1[2], gp + 0.5 * h * k1[3], nu2)
        k3 = _full_rhs(x + 0.5 * h * k2[0], xi + 0.5 * h * k2[1],
                       g + 0.5 * h * k2[2], gp + 0.5 * h * k2[3], nu2)
        nu4 = nu_fn(t + h)
        k4 = _full_rhs(x + h * k3[0], xi + h * k3[1], g + h * k3[2], gp + h * k3[3], nu4)
        upd = []
        for comp in range(4):
            upd.append((h / 6.0) * (k1[comp] + 2 * k2[comp] + 2 * k3[comp] + k4[comp]))
        return x + upd[0], xi + upd[1], g + upd[2], gp + upd[3]

    while t < t_end - 1e-15:
        gap = np.min(np.diff(x)) if cfg.n > 1 else math.inf
        if gap < 1e-5:
            halted = "collision"
            break
        while gap < halve_at:
            step *= 0.5
            halve_at /= 10.0
        if monitors:
            heights = np.abs(g.imag)
            close = [int(i) for i in range(len(g))
                     if heights[i] < 1e-9 or np.min(np.abs(g[i] - x)) < 1e-6]
            if close:
                halted = "monitor_swallowed"
                swallowed.extend(close)
                break
        h = min(step, t_end - t)
        x, xi, g, gp = rk4(t, h, x, xi, g, gp)
        t += h
        times.append(t)
        xs.append(x.copy())
        xis.append(xi.copy())
        gs.append(g.copy())
        gps.append(gp.copy())

    return LoewnerHistory(
        np.array(times), np.array(xs), np.array(xis),
        np.array(gs).reshape(len(times), len(monitors)),
        np.array(gps).reshape(len(times), len(monitors)),
        monitors, nu_desc, dt, t_end, halted, tuple(sorted(set(swallowed))))


def iom_value(g, gp, x, xi, u=None):
    """The conserved field N = g' prod(g - x_j)/prod(g - xi_l)^2, with the
    (g - u)^(2m-n-2) prefactor when a finite u is supplied."""
    val = gp
    for v in x:
        val = val * (g - v)
    for v in xi:
        val = val / (g - v) ** 2
    if u is not None and not is_infinity(u):
        val = val * (g - complex(u)) ** (2 * len(xi) - len(x) - 2)
    return val


def iom_drift(history: LoewnerHistory, monitors=None) -> IomReport:
    """Max |N_t/N_0 - 1| per tracked monitor over the stored grid."""
    idx = range(len(history.monitors)) if monitors is None else [
        history.monitors.index(complex(z)) for z in monitors]
    initial, drifts, notes = [], [], []
    for i in idx:
        N = iom_value(history.g[:, i], history.g_prime[:, i],
                      [history.x[:, j] for j in range(history.n)],
                      [history.xi[:, l] for l in range(history.m)])
        N0 = N[0]
        initial.append(complex(N0))
        drifts.append(float(np.max(np.abs(N / N0 - 1.0))))
        if i in history.swallowed:
            notes.append(f"monitor {i} swallowed; drift excluded")
    return IomReport(tuple(initial), tuple(drifts), tuple(history.swallowed), tuple(notes))


def stationarity_drift(history: LoewnerHistory) -> float:
    """Max stationary-relation residual along the evolved trajectory."""
    worst = 0.0
    for i in range(len(history.times)):
        res = _residual_values(history.x[i].astype(complex), history.xi[i],
                               None if False else __INF, history.n, history.m)
        if len(res):
            worst = max(worst, float(np.max(np.abs(res))))
    return worst


@dataclass(frozen=True)
class TipCurve:
    """gamma_j(s) over sample times s, via the backward flow from x_j(s)."""

    curve_index: int
    times: np.ndarray
    tips: np.ndarray          # complex
    reliable: np.ndarray      # bool


def reconstruct_tips(history: LoewnerHistory, samples: int = 40,
                     lift: float = 1e-6, nu=None) -> list[TipCurve]:
    """Curve tips by solving dw/dr = -sum_k 2 nu_k/(w - x_k(r)) from r = s
    down to 0, started at x_j(s) lifted into the upper half-plane."""
    T = len(history.times)
    nu_fn, _ = _as_nu(nu, history.n)
    sample_idx = np.unique(np.linspace(0, T - 1, samples).astype(int))
    out = []
    for j in range(history.n):
        tips = np.zeros(len(sample_idx), dtype=complex)
        ok = np.ones(len(sample_idx), dtype=bool)
        for si, s_idx in enumerate(sample_idx):
            w = complex(history.x[s_idx, j], lift)
            good = True
            for i in range(s_idx, 0, -1):
                h = history.times[i] - history.times[i - 1]
                x1, x0 = history.x[i], history.x[i - 1]
                xm = 0.5 * (x1 + x0)
                t1 = history.times[i]

                def f(w, xr, tr):
                    return -sum(2.0 * nu_fn(tr)[k] / (w - xr[k]) for k in range(history.n))

                k1 = f(w, x1, t1)
                k2 = f(w - 0.5 * h * k1, xm, t1 - 0.5 * h)
                k3 = f(w - 0.5 * h * k2, xm, t1 - 0.5 * h)
                k4 = f(w - h * k3, x0, t1 - h)
                w = w - (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
                if w.imag <= 0:
                    good = False
                    break
            tips[si] = w
            ok[si] = good
        out.append(TipCurve(j, history.times[sample_idx].copy(), tips, ok))
    return out
