"""Real rational functions with prescribed critical points and poles.

For a half-plane configuration the derivative factorizes, up to a real
constant, as

    R'(z) = prod_j (z - x_j) / prod_k (z - xi_k)^2,

and R itself exists as a rational function exactly when all the simple-pole
residues B_k vanish, which is the stationary condition.  On the disk the
same object pulls back through mu(z) = i(1-z)/(1+z) and acquires an extra
(z+1)^(2m-n-2) factor at the marked point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    INFINITY,
    Configuration,
    Point,
    Uniformization,
    is_infinity,
)


class NotIntegrableError(ValueError):
    def __init__(self, max_b: float):
        super().__init__(f"derivative has no rational primitive: max |B_k| = {max_b:.3g}")
        self.max_b = max_b


class RepeatedPoleError(ValueError):
    pass


@dataclass(frozen=True)
class FactoredDerivative:
    """R'(z) = scale * (z - w0)^e * prod(z - zeros) / prod(z - poles)^2.

    The optional marked factor (w0, e) carries the boundary behaviour of
    disk pullbacks; half-plane derivatives have no marked factor."""

    zeros: tuple[complex, ...]
    poles: tuple[complex, ...]
    scale: complex = 1.0
    marked_point: complex | None = None
    marked_exponent: int = 0
    domain: Uniformization = Uniformization.HALF_PLANE
    u: Point = INFINITY

    def __call__(self, z):
        val = self.scale * np.ones_like(np.asarray(z, dtype=complex)) if isinstance(z, np.ndarray) \
            else complex(self.scale)
        for w in self.zeros:
            val = val * (z - w)
        for w in self.poles:
            d = z - w
            val = val / (d * d)
        if self.marked_point is not None and self.marked_exponent:
            val = val * (z - self.marked_point) ** self.marked_exponent
        return val

    def feature_points(self) -> tuple[complex, ...]:
        pts = self.zeros + self.poles
        if self.marked_point is not None:
            pts = pts + (self.marked_point,)
        return pts

    def rescaled(self, scale: complex) -> "FactoredDerivative":
        return FactoredDerivative(self.zeros, self.poles, scale,
                                  self.marked_point, self.marked_exponent,
                                  self.domain, self.u)


@dataclass(frozen=True)
class ResidueData:
    """Partial-fraction constants at the simple finite poles:
    f = p + sum A_k/(z - xi_k)^2 + sum B_k/(z - xi_k)."""

    A: tuple[complex, ...]
    B: tuple[complex, ...]

    @property
    def max_abs_b(self) -> float:
        return max((abs(b) for b in self.B), default=0.0)


def derivative_from_configuration(cfg: Configuration) -> FactoredDerivative:
    """Factored derivative in the half-plane normal form (u at infinity),
    with the multiplicative constant normalized to 1."""
    if cfg.uniformization is not Uniformization.HALF_PLANE or not is_infinity(cfg.u):
        raise ValueError("half-plane normal form requires u at infinity")
    return FactoredDerivative(cfg.x_complex(), tuple(cfg.xi), 1.0,
                              None, 0, Uniformization.HALF_PLANE, INFINITY)


def pullback_disk(cfg: Configuration) -> FactoredDerivative:
    """Disk-coordinate derivative

        i^(n+1) [prod (1+xi_j)^2 / prod (1+x_i)] (z+1)^(2m-n-2)
            * prod (z - x_k) / prod (z - xi_j)^2,

    reduced to a real scale when the imaginary part is negligible."""
    if cfg.uniformization is not Uniformization.DISK:
        raise ValueError("pullback_disk requires a disk configuration")
    if is_infinity(cfg.u) or abs(complex(cfg.u) + 1.0) > 1e-9:
        raise ValueError("disk pullback assumes the marked point at -1")
    n, m = cfg.n, cfg.m
    scale = 1j ** (n + 1)
    for xi in cfg.xi:
        scale *= (1 + xi) ** 2
    for z in cfg.x_complex():
        scale /= (1 + z)
    if abs(scale.imag) < 1e-10 * abs(scale):
        scale = complex(scale.real, 0.0)
    return FactoredDerivative(cfg.x_complex(), tuple(cfg.xi), scale,
                              complex(-1.0), 2 * m - n - 2,
                              Uniformization.DISK, complex(cfg.u))


def _residue_data(fd: FactoredDerivative) -> ResidueData:
    poles = fd.poles
    for i in range(len(poles)):
        for j in range(i + 1, len(poles)):
            if abs(poles[i] - poles[j]) <= 1e-10:
                raise RepeatedPoleError(
                    f"poles {poles[i]:.6g} and {poles[j]:.6g} coincide; "
                    "the expansion assumes distinct simple poles")
    A, B = [], []
    e = fd.marked_exponent if fd.marked_point is not None else 0
    for k, xi in enumerate(poles):
        a = fd.scale
        for x in fd.zeros:
            a *= (xi - x)
        for l, other in enumerate(poles):
            if l != k:
                a /= (xi - other) ** 2
        if e:
            a *= (xi - fd.marked_point) ** e
        logd = sum(1.0 / (xi - x) for x in fd.zeros)
        logd -= sum(2.0 / (xi - other) for l, other in enumerate(poles) if l != k)
        if e:
            logd += e / (xi - fd.marked_point)
        A.append(a)
        B.append(a * logd)
    return ResidueData(tuple(A), tuple(B))


def residues(cfg: Configuration) -> ResidueData:
    """A_k and B_k of the configuration's own factored derivative.

    B_k is A_k times the stationary relation at xi_k (up to a factor -2),
    so all B_k vanish exactly on stationary configurations."""
    if cfg.uniformization is Uniformization.HALF_PLANE:
        fd = derivative_from_configuration(cfg)
    else:
        fd = pullback_disk(cfg)
    return _residue_data(fd)


# ---------------------------------------------------------------------------
# primitive construction


def _poly_from_roots_c(roots) -> np.ndarray:
    """Ascending complex coefficients of prod (z - r), pairwise balanced."""
    factors = [np.array([-r, 1.0], dtype=complex) for r in roots]
    if not factors:
        return np.array([1.0 + 0.0j])
    while len(factors) > 1:
        nxt = []
        for i in range(0, len(factors) - 1, 2):
            nxt.append(np.convolve(factors[i], factors[i + 1]))
        if len(factors) % 2:
            nxt.append(factors[-1])
        factors = nxt
    return factors[0]


def _polyval_asc(coeffs, z):
    acc = 0.0 * z if isinstance(z, np.ndarray) else 0.0j
    for c in reversed(coeffs):
        acc = acc * z + c
    return acc


def _polydiv_asc(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    """Polynomial quotient (ascending coefficients); remainder discarded."""
    q, _ = np.polydiv(num[::-1], den[::-1])
    return np.atleast_1d(q)[::-1]


def _series_inverse(coeffs: np.ndarray, order: int) -> np.ndarray:
    """Power-series inverse of a polynomial with nonzero constant term."""
    inv = np.zeros(order, dtype=complex)
    inv[0] = 1.0 / coeffs[0]
    for s in range(1, order):
        acc = 0.0j
        for t in range(1, min(s, len(coeffs) - 1) + 1):
            acc += coeffs[t] * inv[s - t]
        inv[s] = -acc / coeffs[0]
    return inv


@dataclass(frozen=True)
class RationalMap:
    """A rational primitive R with its factored derivative.

    Evaluation goes through the partial-fraction form (stable near poles);
    the expanded numerator/denominator pair P/Q is kept for coefficient-level
    checks.  Coefficients are real for conjugation-symmetric data."""

    numerator: np.ndarray
    denominator: np.ndarray
    derivative_factored: FactoredDerivative
    poly_primitive: np.ndarray            # antiderivative of the polynomial part
    simple_terms: tuple[tuple[complex, complex], ...]   # (pole, coefficient/(z-pole))
    marked_terms: tuple[tuple[int, complex], ...]       # (order, coeff/(z-w0)^order)

    def __call__(self, z):
        val = _polyval_asc(self.poly_primitive, z)
        for pole, coeff in self.simple_terms:
            val = val + coeff / (z - pole)
        w0 = self.derivative_factored.marked_point
        for order, coeff in self.marked_terms:
            val = val + coeff / (z - w0) ** order
        return val

    def derivative(self, z):
        return self.derivative_factored(z)

    @property
    def is_real(self) -> bool:
        return not np.iscomplexobj(self.numerator)

    def critical_points(self) -> np.ndarray:
        """Roots of P'Q - PQ' (the critical points of R)."""
        P, Q = self.numerator.astype(complex), self.denominator.astype(complex)
        dP = np.polyder(np.poly1d(P[::-1])).coefficients[::-1]
        dQ = np.polyder(np.poly1d(Q[::-1])).coefficients[::-1]
        num = np.convolve(dP, Q)
        sub = np.convolve(P, dQ)
        size = max(len(num), len(sub))
        num = np.pad(num, (0, size - len(num)))
        sub = np.pad(sub, (0, size - len(sub)))
        w = num - sub
        while len(w) > 1 and abs(w[-1]) < 1e-12 * np.max(np.abs(w)):
            w = w[:-1]
        return np.roots(w[::-1])


def _maybe_realify(arr: np.ndarray) -> np.ndarray:
    top = np.max(np.abs(arr)) if len(arr) else 1.0
    if top == 0 or np.max(np.abs(arr.imag)) <= 1e-9 * max(1.0, top):
        return arr.real.copy()
    return arr


def primitive(fd: FactoredDerivative, cfg: Configuration | None = None,
              b_tol: float = 1e-8) -> RationalMap:
    """Integrate a factored derivative termwise; integration constant 0.

    Raises :class:`NotIntegrableError` when any simple-pole residue exceeds
    b_tol.  The result is self-checked against fd on a surrounding grid to
    1e-9 relative accuracy.
    """
    res = _residue_data(fd)
    e = fd.marked_exponent if fd.marked_point is not None else 0
    w0 = fd.marked_point

    # Laurent coefficients at the marked pole (order r = -e when e < 0)
    r = max(-e, 0)
    marked_C = np.zeros(r + 1, dtype=complex)  # marked_C[q] ~ coeff of (z-w0)^-q
    if r:
        shift_num = fd.scale * _poly_from_roots_c([x - w0 for x in fd.zeros])
        shift_den = _poly_from_roots_c([p - w0 for p in fd.poles])
        shift_den = np.convolve(shift_den, shift_den)
        inv = _series_inverse(shift_den, r)
        taylor = np.convolve(shift_num, inv)[:r]
        taylor = np.pad(taylor, (0, max(0, r - len(taylor))))
        for q in range(1, r + 1):
            marked_C[q] = taylor[r - q]

    worst = max(res.max_abs_b, abs(marked_C[1]) if r else 0.0)
    if worst > b_tol:
        raise NotIntegrableError(worst)

    # polynomial part by long division of the expanded derivative
    num = fd.scale * _poly_from_roots_c(fd.zeros)
    if e > 0:
        num = np.convolve(num, _poly_from_roots_c([w0] * e))
    den = _poly_from_roots_c(fd.poles)
    den = np.convolve(den, den)
    if e < 0:
        den = np.convolve(den, _poly_from_roots_c([w0] * (-e)))
    if len(num) - 1 >= len(den) - 1:
        p = _polydiv_asc(num, den)
    else:
        p = np.array([0.0 + 0.0j])

    int_p = np.zeros(len(p) + 1, dtype=complex)
    int_p[1:] = p / np.arange(1, len(p) + 1)

    simple = tuple((pole, -a) for pole, a in zip(fd.poles, res.A))
    marked = tuple((q - 1, -marked_C[q] / (q - 1)) for q in range(2, r + 1)
                   if marked_C[q] != 0)

    # expanded P/Q over the common denominator
    Q = _poly_from_roots_c(fd.poles)
    if r >= 2:
        Q = np.convolve(Q, _poly_from_roots_c([w0] * (r - 1)))
    P = np.convolve(int_p, Q)
    for pole, coeff in simple:
        other = _poly_from_roots_c([pl for pl in fd.poles if pl != pole])
        if r >= 2:
            other = np.convolve(other, _poly_from_roots_c([w0] * (r - 1)))
        P = _poly_add(P, coeff * other)
    for order, coeff in marked:
        other = _poly_from_roots_c(list(fd.poles) + [w0] * (r - 1 - order))
        P = _poly_add(P, coeff * other)
    P = _trim(P)
    Q = _trim(Q)

    rm = RationalMap(_maybe_realify(P), _maybe_realify(Q), fd,
                     int_p, simple, marked)

    _self_check(rm, fd)
    return rm


def _poly_add(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    size = max(len(a), len(b))
    out = np.zeros(size, dtype=complex)
    out[:len(a)] += a
    out[:len(b)] += b
    return out


def _trim(a: np.ndarray) -> np.ndarray:
    top = np.max(np.abs(a)) if len(a) else 0.0
    while len(a) > 1 and abs(a[-1]) <= 1e-13 * max(top, 1.0):
        a = a[:-1]
    return a


def _grid_around(fd: FactoredDerivative, count: int = 24) -> np.ndarray:
    pts = np.array(fd.feature_points(), dtype=complex)
    center = pts.mean() if len(pts) else 0.0
    rad = max((abs(p - center) for p in pts), default=1.0)
    theta = np.linspace(0, 2 * np.pi, count, endpoint=False) + 0.123
    ring = center + 1.9 * max(rad, 0.5) * np.exp(1j * theta)
    return ring


def _self_check(rm: RationalMap, fd: FactoredDerivative, tol: float = 1e-9):
    grid = _grid_around(fd)
    # derivative of the partial-fraction form
    val = _polyval_asc(np.polyder(np.poly1d(rm.poly_primitive.astype(complex)[::-1])).coefficients[::-1], grid)
    for pole, coeff in rm.simple_terms:
        val = val - coeff / (grid - pole) ** 2
    w0 = fd.marked_point
    for order, coeff in rm.marked_terms:
        val = val - order * coeff / (grid - w0) ** (order + 1)
    ref = fd(grid)
    rel = np.max(np.abs(val - ref) / (1.0 + np.abs(ref)))
    if rel > tol:
        raise ArithmeticError(f"primitive self-check failed: relative error {rel:.3g}")
    # and of the expanded P/Q
    P = rm.numerator.astype(complex)
    Q = rm.denominator.astype(complex)
    dP = np.polyder(np.poly1d(P[::-1])).coefficients[::-1] if len(P) > 1 else np.array([0.0j])
    dQ = np.polyder(np.poly1d(Q[::-1])).coefficients[::-1] if len(Q) > 1 else np.array([0.0j])
    qv = _polyval_asc(Q, grid)
    quot = (_polyval_asc(dP, grid) * qv - _polyval_asc(P, grid) * _polyval_asc(dQ, grid)) / qv**2
    rel2 = np.max(np.abs(quot - ref) / (1.0 + np.abs(ref)))
    if rel2 > 1e-7:
        raise ArithmeticError(f"P/Q expansion check failed: relative error {rel2:.3g}")


def rational_map_from_configuration(cfg: Configuration) -> RationalMap:
    """Convenience: factored derivative plus primitive for a configuration,
    in its own uniformization."""
    if cfg.uniformization is Uniformization.HALF_PLANE:
        fd = derivative_from_configuration(cfg)
    else:
        fd = pullback_disk(cfg)
    return primitive(fd, cfg)
