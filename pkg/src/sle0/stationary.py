"""Coulomb-gas master function, stationary relations, and charge solvers.

The stationary relations couple growth points x and screening charges xi:

    -sum_j 2/(xi_k - x_j) + sum_{l != k} 4/(xi_k - xi_l)
        + (2n - 4m + 4)/(xi_k - u) = 0,      k = 1..m,

which for u = infinity reduce to

    -sum_j 1/(xi_k - x_j) + sum_{l != k} 2/(xi_k - xi_l) = 0.

They are the critical-point equations of the master function

    Phi = prod (x_i - x_j)^2 * prod (xi_i - xi_j)^8 * prod (x_i - xi_j)^-4

(with extra u-factors at finite u).  In the underscreening regime
n+1-m > m the solutions are isolated, one per link pattern; the solver
enumerates them all.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    INFINITY,
    Configuration,
    MobiusMap,
    Regime,
    Uniformization,
    ballot_count,
    disk_config,
    disk_to_half_plane_map,
    half_plane_config,
    is_infinity,
    mobius_apply,
    regime_of,
    transport_configuration,
)


class CoincidentPointsError(ValueError):
    pass


class RegimeError(ValueError):
    """Raised when enumeration is requested outside the underscreening regime."""


# ---------------------------------------------------------------------------
# pointwise evaluations


def master_log(cfg: Configuration) -> float:
    """log|Phi| of the master function; sign and branch are not tracked."""
    xs = cfg.x_complex()
    xi = cfg.xi
    n, m = cfg.n, cfg.m
    pts = list(xs) + list(xi)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if pts[i] == pts[j]:
                raise CoincidentPointsError(
                    f"coincident points at {pts[i]:.6g}: master function undefined")
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            total += 2.0 * math.log(abs(xs[i] - xs[j]))
    for i in range(m):
        for j in range(i + 1, m):
            total += 8.0 * math.log(abs(xi[i] - xi[j]))
    for i in range(n):
        for j in range(m):
            total += -4.0 * math.log(abs(xs[i] - xi[j]))
    if not is_infinity(cfg.u):
        u = complex(cfg.u)
        for z in xs:
            if z == u:
                raise CoincidentPointsError("growth point coincides with u")
            total += 2.0 * (-2 - n + 2 * m) * math.log(abs(z - u))
        for z in xi:
            if z == u:
                raise CoincidentPointsError("charge coincides with u")
            total += 4.0 * (2 + n - 2 * m) * math.log(abs(z - u))
    return total


def _residual_values(xs, xi, u, n: int, m: int) -> np.ndarray:
    """Stationary relation left sides at each charge (complex vector)."""
    out = np.zeros(m, dtype=complex)
    for k in range(m):
        zk = xi[k]
        if is_infinity(u):
            r = -sum(1.0 / (zk - x) for x in xs)
            r += sum(2.0 / (zk - xi[l]) for l in range(m) if l != k)
        else:
            r = -sum(2.0 / (zk - x) for x in xs)
            r += sum(4.0 / (zk - xi[l]) for l in range(m) if l != k)
            r += (2.0 * n - 4.0 * m + 4.0) / (zk - complex(u))
        out[k] = r
    return out


@dataclass(frozen=True)
class StationaryResidual:
    """Per-charge residuals of the stationary relations."""

    residuals: tuple[complex, ...]
    max_abs: float

    @staticmethod
    def from_values(values) -> "StationaryResidual":
        vals = tuple(complex(v) for v in values)
        return StationaryResidual(vals, max((abs(v) for v in vals), default=0.0))


def stationary_residual(cfg: Configuration) -> StationaryResidual:
    """Evaluate the stationary relations in the form matching cfg's u.

    The residual is the parenthesized quantity in d(log Phi)/d(xi_k):
    the gradient of :func:`master_log` equals 2*r_k at finite u and 4*r_k
    in the reduced u = infinity form.
    """
    vals = _residual_values(cfg.x_complex(), cfg.xi, cfg.u, cfg.n, cfg.m)
    return StationaryResidual.from_values(vals)


@dataclass(frozen=True)
class DriftVector:
    """Boundary drifts U_j = d(log Z)/d(x_j), units 1/length."""

    values: tuple[float, ...]


def drift_values(xs, xi) -> np.ndarray:
    n = len(xs)
    out = np.zeros(n, dtype=complex)
    for j in range(n):
        s = sum(2.0 / (xs[j] - xs[k]) for k in range(n) if k != j)
        s -= sum(4.0 / (xs[j] - z) for z in xi)
        out[j] = s
    return out


def drift_vector(cfg: Configuration) -> DriftVector:
    """U_j = sum_{k != j} 2/(x_j - x_k) - sum_l 4/(x_j - xi_l).

    Imaginary parts cancel for conjugation-closed charges; anything above
    1e-9 signals a broken closure and raises.
    """
    if cfg.uniformization is not Uniformization.HALF_PLANE or not is_infinity(cfg.u):
        raise ValueError("drift vector is defined in the half-plane picture with u at infinity")
    vals = drift_values(cfg.x_complex(), cfg.xi)
    worst = float(np.max(np.abs(vals.imag))) if len(vals) else 0.0
    if worst > 1e-9:
        raise ValueError(f"drift has imaginary part {worst:.3g}: charges not conjugation-closed")
    return DriftVector(tuple(float(v) for v in vals.real))


def null_vector_values(xs, U) -> np.ndarray:
    n = len(xs)
    out = np.zeros(n)
    for j in range(n):
        acc = 0.5 * U[j] ** 2
        for k in range(n):
            if k == j:
                continue
            d = xs[k] - xs[j]
            acc += 2.0 * U[k] / d - 6.0 / d**2
        out[j] = acc
    return out


def null_vector_residual(cfg: Configuration) -> tuple[float, ...]:
    """Left sides of the quadratic system
    (1/2) U_j^2 + sum_{k != j} 2 U_k/(x_k - x_j) - sum_{k != j} 6/(x_k - x_j)^2."""
    U = drift_vector(cfg).values
    xs = [float(v) for v in np.real(cfg.x_complex())]
    return tuple(null_vector_values(xs, U))


def ward_residual(cfg: Configuration) -> tuple[float, float]:
    """(sum_j U_j, sum_j x_j U_j - [(n-2m)^2 - n - 4m]); both vanish at
    stationary configurations."""
    U = drift_vector(cfg).values
    xs = [float(v) for v in np.real(cfg.x_complex())]
    n, m = cfg.n, cfg.m
    s0 = float(sum(U))
    s1 = float(sum(x * u for x, u in zip(xs, U))) - ((n - 2 * m) ** 2 - n - 4 * m)
    return (s0, s1)


# ---------------------------------------------------------------------------
# solver


@dataclass(frozen=True)
class SolverOptions:
    seed: int = 0
    newton_tol: float = 1e-12
    max_newton_iter: int = 50
    multistarts: int = 200
    restart_budget: int = 500
    homotopy_steps: int = 32
    dedup_tol: float = 1e-6
    accept_tol: float = 1e-9
    workers: int = 1


@dataclass(frozen=True)
class Solution:
    xi: tuple[complex, ...]
    residual_max: float
    pattern: object = None  # filled in by the locus module


@dataclass(frozen=True)
class SolutionSet:
    solutions: tuple[Solution, ...]
    expected_count: int | None = None
    complete: bool = True
    warnings: tuple[str, ...] = ()
    explanation: str = ""

    def __len__(self):
        return len(self.solutions)

    def __iter__(self):
        return iter(self.solutions)


def _poly_shift(arr: np.ndarray, k: int, size: int) -> np.ndarray:
    out = np.zeros(size)
    out[k:k + len(arr)] = arr
    return out


def _polyder(c: np.ndarray) -> np.ndarray:
    if len(c) <= 1:
        return np.zeros(1)
    return c[1:] * np.arange(1, len(c))


def _hs_residual(a, da, qfull, c) -> np.ndarray:
    """Coefficients of a q'' - a' q' - c q (length n + m - 1)."""
    n = len(a) - 1
    m = len(qfull) - 1
    size = n + m - 1
    dq = _polyder(qfull)
    ddq = _polyder(dq)
    T = np.zeros(size)
    T += _poly_shift(np.convolve(a, ddq), 0, size)
    T -= _poly_shift(np.convolve(da, dq), 0, size)
    T -= _poly_shift(np.convolve(c, qfull), 0, size)
    return T


def _hs_jacobian(a, da, qfull, c) -> np.ndarray:
    n = len(a) - 1
    m = len(qfull) - 1
    size = n + m - 1
    J = np.zeros((size, m + n - 1))
    for i in range(m):  # d/dq_i
        col = np.zeros(size)
        if i >= 2:
            col += _poly_shift(a * (i * (i - 1)), i - 2, size)
        if i >= 1:
            col -= _poly_shift(da * i, i - 1, size)
        col -= _poly_shift(c, i, size)
        J[:, i] = col
    for j in range(n - 1):  # d/dc_j
        J[:, m + j] = -_poly_shift(qfull, j, size)
    return J


def _hs_newton(a, da, qfree0, c0, tol, max_iter):
    """Damped Newton on the polynomial identity; returns (qfull, ok)."""
    m = len(qfree0)
    v = np.concatenate([qfree0, c0])
    scale = max(1.0, float(np.max(np.abs(a))))

    def split(v):
        qfull = np.concatenate([v[:m], [1.0]])
        return qfull, v[m:]

    qfull, c = split(v)
    F = _hs_residual(a, da, qfull, c)
    fnorm = np.max(np.abs(F))
    for _ in range(max_iter):
        if fnorm < tol * scale:
            return qfull, True
        J = _hs_jacobian(a, da, qfull, c)
        try:
            step = np.linalg.solve(J, -F)
        except np.linalg.LinAlgError:
            return qfull, False
        lam = 1.0
        for _ in range(12):
            v_new = v + lam * step
            qfull_n, c_n = split(v_new)
            F_new = _hs_residual(a, da, qfull_n, c_n)
            fn = np.max(np.abs(F_new))
            if fn < fnorm:
                break
            lam *= 0.5
        else:
            return qfull, fnorm < 1e-8 * scale
        v, qfull, c, F, fnorm = v_new, qfull_n, c_n, F_new, fn
    return qfull, fnorm < tol * scale


def _lstsq_c(a, da, qfull):
    """Best-fit c of the identity for a trial q (initializes Newton)."""
    n = len(a) - 1
    m = len(qfull) - 1
    size = n + m - 1
    rhs = _poly_shift(np.convolve(a, _polyder(_polyder(qfull))), 0, size) \
        - _poly_shift(np.convolve(da, _polyder(qfull)), 0, size)
    M = np.zeros((size, n - 1))
    for j in range(n - 1):
        M[:, j] = _poly_shift(qfull, j, size)
    c, *_ = np.linalg.lstsq(M, rhs, rcond=None)
    return c


def _closure_from_roots(roots, tol) -> tuple[complex, ...] | None:
    """Classify roots into reals and conjugate pairs, materialized exactly.

    Returns None if the set is not conjugation-closed to tolerance."""
    reals, uppers, pool = [], [], sorted(roots, key=lambda z: (z.real, z.imag))
    used = [False] * len(pool)
    for i, z in enumerate(pool):
        if used[i]:
            continue
        if abs(z.imag) <= tol:
            reals.append(complex(z.real, 0.0))
            used[i] = True
            continue
        mate = None
        for j in range(i + 1, len(pool)):
            if not used[j] and abs(pool[j] - z.conjugate()) <= tol:
                mate = j
                break
        if mate is None:
            return None
        used[i] = used[mate] = True
        rep = z if z.imag > 0 else z.conjugate()
        uppers.append(rep)
    out = list(reals)
    for rep in uppers:
        out.extend([rep, rep.conjugate()])
    return tuple(out)


def _random_q(rng, m, lo, hi, rad):
    """Random real-coefficient monic q via a conjugation-closed root draw."""
    n_pairs = int(rng.integers(0, m // 2 + 1))
    n_real = m - 2 * n_pairs
    roots = [complex(rng.uniform(lo - 0.5 * rad, hi + 0.5 * rad), 0.0) for _ in range(n_real)]
    for _ in range(n_pairs):
        roots.append(complex(rng.uniform(lo, hi), rng.uniform(0.05 * rad, rad)))
    coeffs = np.array([1.0])
    for r in roots:
        if r.imag == 0:
            coeffs = np.convolve(coeffs, [-r.real, 1.0])
        else:
            coeffs = np.convolve(coeffs, [abs(r) ** 2, -2 * r.real, 1.0])
    return np.asarray(coeffs[:-1], dtype=float), None


def _solve_m1(xs: np.ndarray) -> list[tuple[complex, ...]]:
    """m = 1 closed form: charges are the critical points of prod(z - x_j)."""
    a = np.array([1.0])
    for x in xs:
        a = np.convolve(a, [1.0, -x])  # descending
    da = np.polyder(np.poly1d(a)).coefficients
    roots = np.roots(da)
    return [(complex(r.real, 0.0),) for r in sorted(roots, key=lambda z: z.real)]


def _canonical_key(xi: tuple[complex, ...]):
    return tuple(sorted(((z.real, z.imag) for z in xi)))


def _dedup(cands: list[tuple[complex, ...]], tol: float) -> list[tuple[complex, ...]]:
    kept: list[tuple[complex, ...]] = []
    for xi in sorted(cands, key=_canonical_key):
        srt = sorted(xi, key=lambda z: (z.real, z.imag))
        dup = False
        for other in kept:
            osrt = sorted(other, key=lambda z: (z.real, z.imag))
            if max(abs(p - q) for p, q in zip(srt, osrt)) < tol:
                dup = True
                break
        if not dup:
            kept.append(xi)
    return kept


def _hs_accept(xs, qfull, opts: SolverOptions) -> tuple[complex, ...] | None:
    roots = np.roots(qfull[::-1])
    xi = _closure_from_roots([complex(r) for r in roots], 1e-7 * max(1.0, np.max(np.abs(xs))))
    if xi is None:
        return None
    pts = list(xi)
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if abs(pts[i] - pts[j]) < 10 * opts.dedup_tol:
                return None  # repeated charge: not a simple-pole solution
        if min(abs(pts[i] - x) for x in xs) < 10 * opts.dedup_tol:
            return None  # charge collides with a growth point
    vals = _residual_values([complex(x) for x in xs], xi, INFINITY, len(xs), len(xi))
    if np.max(np.abs(vals)) > opts.accept_tol:
        return None
    return xi


def _solve_half_plane_inf(xs: np.ndarray, m: int, opts: SolverOptions) -> list[tuple[complex, ...]]:
    """All charge configurations for u = infinity via the polynomial identity
    a q'' - a' q' = c q (monic q of degree m carries the charges as roots)."""
    if m == 1:
        found = [xi for xi in _solve_m1(xs)
                 if _hs_accept(xs, np.array([-xi[0].real, 1.0]), opts) is not None]
        return found

    n = len(xs)
    a = np.array([1.0])
    for x in xs:
        a = np.convolve(a, [-x, 1.0])  # ascending
    da = _polyder(a)
    lo, hi = float(np.min(xs)), float(np.max(xs))
    rad = max(hi - lo, 1.0)
    rng = np.random.default_rng(opts.seed)
    expected = ballot_count(n, m)

    def newton_from(qfree, c0):
        qfull, ok = _hs_newton(a, da, qfree, c0, opts.newton_tol, opts.max_newton_iter)
        if not ok:
            return None
        return _hs_accept(xs, qfull, opts)

    def random_start():
        qfree, _ = _random_q(rng, m, lo, hi, rad)
        qfull = np.concatenate([qfree, [1.0]])
        return qfree, _lstsq_c(a, da, qfull)

    # homotopy from a Chebyshev-spaced reference configuration
    mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) if hi > lo else 0.5
    ref = np.sort(mid + half * np.cos(np.pi * (2 * np.arange(1, n + 1) - 1) / (2 * n)))
    a_ref = np.array([1.0])
    for x in ref:
        a_ref = np.convolve(a_ref, [-x, 1.0])
    da_ref = _polyder(a_ref)

    ref_solutions: list[np.ndarray] = []
    seen_ref: list[tuple[complex, ...]] = []
    for _ in range(opts.restart_budget):
        if len(seen_ref) >= expected:
            break
        qfree, _ = _random_q(rng, m, float(ref[0]), float(ref[-1]), rad)
        qfull0 = np.concatenate([qfree, [1.0]])
        c0 = _lstsq_c(a_ref, da_ref, qfull0)
        qfull, ok = _hs_newton(a_ref, da_ref, qfree, c0, opts.newton_tol, opts.max_newton_iter)
        if not ok:
            continue
        xi = _hs_accept(ref, qfull, opts)
        if xi is None:
            continue
        if all(max(abs(p - q) for p, q in zip(sorted(xi, key=_canonical_key_pt),
                                              sorted(s, key=_canonical_key_pt))) >= opts.dedup_tol
               for s in seen_ref):
            seen_ref.append(xi)
            ref_solutions.append(qfull.copy())

    def track(qfull_ref: np.ndarray):
        q = qfull_ref[:-1].copy()
        steps = opts.homotopy_steps
        for s_i in range(1, steps + 1):
            s = s_i / steps
            x_s = (1 - s) * ref + s * xs
            a_s = np.array([1.0])
            for x in x_s:
                a_s = np.convolve(a_s, [-x, 1.0])
            da_s = _polyder(a_s)
            c_s = _lstsq_c(a_s, da_s, np.concatenate([q, [1.0]]))
            qfull, ok = _hs_newton(a_s, da_s, q, c_s, opts.newton_tol, opts.max_newton_iter)
            if not ok:
                return None
            q = qfull[:-1]
        return _hs_accept(xs, np.concatenate([q, [1.0]]), opts)

    starts = [random_start() for _ in range(opts.multistarts)]

    def run_multistart(start):
        qfree, c0 = start
        return newton_from(qfree, c0)

    if opts.workers > 1:
        with ThreadPoolExecutor(max_workers=opts.workers) as pool:
            tracked = list(pool.map(track, ref_solutions))
            randoms = list(pool.map(run_multistart, starts))
    else:
        tracked = [track(qr) for qr in ref_solutions]
        randoms = [run_multistart(s) for s in starts]

    found = [xi for xi in tracked + randoms if xi is not None]
    found = _dedup(found, opts.dedup_tol)

    extra = 0
    while len(found) < expected and extra < opts.restart_budget:
        extra += 1
        xi = run_multistart(random_start())
        if xi is not None:
            found = _dedup(found + [xi], opts.dedup_tol)
    return found


def _canonical_key_pt(z: complex):
    return (z.real, z.imag)


# -- finite-u polishing ------------------------------------------------------


def _finite_u_parameterize(cfg_uniform: Uniformization, xi: tuple[complex, ...]):
    """Split charges into symmetry classes and return (pack, unpack).

    Half-plane: reals and conjugate pairs; disk: unit-circle charges (one
    angle each) and inversion pairs (inner representative)."""
    if cfg_uniform is Uniformization.HALF_PLANE:
        reals = [z for z in xi if z.imag == 0.0]
        uppers = [z for z in xi if z.imag > 0.0]

        def pack():
            return np.array([z.real for z in reals]
                            + [c for z in uppers for c in (z.real, z.imag)])

        def unpack(v):
            k = len(reals)
            out = [complex(v[i], 0.0) for i in range(k)]
            for p in range(len(uppers)):
                z = complex(v[k + 2 * p], v[k + 2 * p + 1])
                out.extend([z, z.conjugate()])
            return tuple(out)

        return pack, unpack

    circle = [z for z in xi if abs(abs(z) - 1.0) <= 1e-9]
    inner = [z for z in xi if abs(z) < 1.0 - 1e-9]

    def pack():
        return np.array([math.atan2(z.imag, z.real) for z in circle]
                        + [c for z in inner for c in (z.real, z.imag)])

    def unpack(v):
        k = len(circle)
        out = [complex(math.cos(v[i]), math.sin(v[i])) for i in range(k)]
        for p in range(len(inner)):
            z = complex(v[k + 2 * p], v[k + 2 * p + 1])
            out.extend([z, 1.0 / z.conjugate()])
        return tuple(out)

    return pack, unpack


def _polish_finite_u(cfg: Configuration, opts: SolverOptions) -> Configuration | None:
    """Damped Gauss-Newton on the pairwise relations in cfg's own
    coordinates, over the symmetry-reduced charge variables."""
    xs = cfg.x_complex()
    n, m = cfg.n, cfg.m
    pack, unpack = _finite_u_parameterize(cfg.uniformization, cfg.xi)
    v = pack()
    if len(v) == 0:
        return cfg

    def F(v):
        xi = unpack(v)
        r = _residual_values(xs, xi, cfg.u, n, m)
        return np.concatenate([r.real, r.imag])

    f = F(v)
    fnorm = np.max(np.abs(f))
    for _ in range(opts.max_newton_iter):
        if fnorm < opts.newton_tol:
            break
        J = np.zeros((len(f), len(v)))
        for i in range(len(v)):
            h = 1e-7 * max(1.0, abs(v[i]))
            vp = v.copy()
            vp[i] += h
            J[:, i] = (F(vp) - f) / h
        step, *_ = np.linalg.lstsq(J, -f, rcond=None)
        lam = 1.0
        for _ in range(12):
            v_new = v + lam * step
            f_new = F(v_new)
            fn = np.max(np.abs(f_new))
            if fn < fnorm:
                break
            lam *= 0.5
        else:
            break
        v, f, fnorm = v_new, f_new, fn
    if fnorm > opts.accept_tol:
        return None
    xi = unpack(v)
    if cfg.uniformization is Uniformization.HALF_PLANE:
        return half_plane_config([z.real for z in xs], xi, cfg.u)
    return disk_config(xs, xi, cfg.u)


def solve_stationary(x, m: int, u=INFINITY, opts: SolverOptions | None = None,
                     uniformization: Uniformization | None = None) -> SolutionSet:
    """Find all isolated charge configurations for the given growth points.

    Enumeration runs only in the underscreening regime.  The threshold
    regime returns an empty set with an explanation; overscreening raises
    (the solutions are non-isolated; only verification of supplied charges
    makes sense there).
    """
    opts = opts or SolverOptions()
    if uniformization is None:
        if is_infinity(u):
            uniformization = Uniformization.HALF_PLANE
        elif (all(abs(abs(complex(v)) - 1.0) < 1e-9 for v in x)
              and abs(complex(u) + 1.0) < 1e-9):
            uniformization = Uniformization.DISK
        else:
            uniformization = Uniformization.HALF_PLANE

    if uniformization is Uniformization.HALF_PLANE:
        base = half_plane_config(x, (), u)
    else:
        base = disk_config(x, (), u)
    n = base.n
    regime = regime_of(n, m)
    if regime is Regime.INVALID:
        raise RegimeError(f"m = {m} exceeds n = {n}: there are no such R")
    if regime is Regime.THRESHOLD:
        return SolutionSet((), expected_count=0, complete=True,
                           explanation="no solutions exist at threshold: there are no such R")
    if regime is Regime.OVERSCREENING:
        raise RegimeError(
            "overscreening regime has non-isolated solutions; "
            "enumeration refused (supply charges for residual verification)")
    expected = ballot_count(n, m)
    if m == 0:
        return SolutionSet((Solution((), 0.0),), expected_count=1, complete=True)

    if is_infinity(base.u) and uniformization is Uniformization.HALF_PLANE:
        xs = np.array([complex(v).real for v in base.x])
        cands = _solve_half_plane_inf(xs, m, opts)
        configs = [half_plane_config(xs, xi) for xi in cands]
    else:
        # move the marked point to infinity, solve there, map back, polish
        if uniformization is Uniformization.DISK:
            to_h = disk_to_half_plane_map()
            if abs(complex(base.u) - (-1.0)) > 1e-12:
                raise RegimeError("disk solving expects the marked point at -1")
        else:
            u0 = complex(base.u)
            to_h = MobiusMap(0.0, -1.0, 1.0, -u0)
        h_cfg = transport_configuration(base, to_h, Uniformization.HALF_PLANE)
        xs_h = np.array([complex(v).real for v in h_cfg.x])
        cands_h = _solve_half_plane_inf(xs_h, m, opts)
        back = to_h.inverse()
        configs = []
        for xi_h in cands_h:
            sol_h = half_plane_config(xs_h, xi_h)
            cfg_back = transport_configuration(sol_h, back, uniformization)
            cfg_back = replace(cfg_back, x=base.x, u=base.u)  # keep exact inputs
            polished = _polish_finite_u(cfg_back, opts)
            if polished is not None:
                configs.append(polished)

    configs_xi = _dedup([c.xi for c in configs], opts.dedup_tol)
    solutions = []
    for xi in sorted(configs_xi, key=_canonical_key):
        res = _residual_values(base.x_complex(), xi, base.u, n, m)
        solutions.append(Solution(tuple(xi), float(np.max(np.abs(res)))))

    warnings = ()
    complete = len(solutions) == expected
    if not complete:
        warnings = (f"found {len(solutions)} solutions, expected {expected} "
                    f"(ballot count): set flagged incomplete",)
    return SolutionSet(tuple(solutions), expected_count=expected,
                       complete=complete, warnings=warnings)
