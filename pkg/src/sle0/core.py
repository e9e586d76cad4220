"""Shared domain types: configurations, Mobius maps, link patterns.

A curve system of type (n, m) is specified by n boundary growth points,
m screening charges (the finite poles of the associated rational function)
and a marked boundary point u.  Two uniformizations are supported: the
upper half-plane with u = infinity, and the unit disk with u = -1, related
by the Mobius map mu(z) = i(1-z)/(1+z).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from enum import Enum
from math import comb
from typing import Iterable, Sequence, Union


class _Infinity:
    """Tagged point at infinity.  Never represented by a large float."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (_Infinity, ())


INFINITY = _Infinity()

Point = Union[complex, _Infinity]

CLOSURE_TOL = 1e-10
COLLISION_TOL = 1e-10
UNIT_MODULUS_TOL = 1e-12


def is_infinity(z) -> bool:
    return isinstance(z, _Infinity)


class Uniformization(Enum):
    HALF_PLANE = "half_plane"
    DISK = "disk"


class Regime(Enum):
    """Screening regime of an (n, m) system.

    Underscreening (n+1-m > m) has finitely many charge configurations,
    one per link pattern; at threshold (n+1-m = m) there are none; in the
    overscreening range (0 <= n+1-m < m) they form continuous families.
    """

    UNDERSCREENING = "underscreening"
    THRESHOLD = "threshold"
    OVERSCREENING = "overscreening"
    INVALID = "invalid"


def regime_of(n: int, m: int) -> Regime:
    if m > n:
        return Regime.INVALID
    gap = n + 1 - m
    if gap > m:
        return Regime.UNDERSCREENING
    if gap == m:
        return Regime.THRESHOLD
    return Regime.OVERSCREENING


# ---------------------------------------------------------------------------
# polynomials with real coefficients


@dataclass(frozen=True)
class RealPolynomial:
    """Dense real polynomial, coefficients in ascending degree order."""

    coefficients: tuple[float, ...]

    MAX_DEGREE = 64

    def __post_init__(self):
        coeffs = tuple(float(c) for c in self.coefficients)
        while len(coeffs) > 1 and coeffs[-1] == 0.0:
            coeffs = coeffs[:-1]
        if not coeffs:
            coeffs = (0.0,)
        if len(coeffs) - 1 > self.MAX_DEGREE:
            raise ValueError(f"degree {len(coeffs) - 1} exceeds {self.MAX_DEGREE}")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    @property
    def is_zero(self) -> bool:
        return self.coefficients == (0.0,)

    def __call__(self, z):
        # Horner in the given (possibly complex) argument
        acc = 0.0 * z + 0.0
        for c in reversed(self.coefficients):
            acc = acc * z + c
        return acc

    def derivative(self) -> "RealPolynomial":
        c = self.coefficients
        if len(c) == 1:
            return RealPolynomial((0.0,))
        return RealPolynomial(tuple(k * c[k] for k in range(1, len(c))))

    def __mul__(self, other: "RealPolynomial") -> "RealPolynomial":
        a, b = self.coefficients, other.coefficients
        out = [0.0] * (len(a) + len(b) - 1)
        for i, ai in enumerate(a):
            for j, bj in enumerate(b):
                out[i + j] += ai * bj
        return RealPolynomial(tuple(out))

    def __add__(self, other: "RealPolynomial") -> "RealPolynomial":
        a, b = self.coefficients, other.coefficients
        n = max(len(a), len(b))
        return RealPolynomial(
            tuple((a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0) for i in range(n))
        )

    @staticmethod
    def from_roots(roots: Sequence[float]) -> "RealPolynomial":
        """Product of linear factors (z - r), multiplied pairwise balanced."""
        factors = [RealPolynomial((-float(r), 1.0)) for r in roots]
        if not factors:
            return RealPolynomial((1.0,))
        while len(factors) > 1:
            nxt = []
            for i in range(0, len(factors) - 1, 2):
                nxt.append(factors[i] * factors[i + 1])
            if len(factors) % 2:
                nxt.append(factors[-1])
            factors = nxt
        return factors[0]


# ---------------------------------------------------------------------------
# Mobius maps


@dataclass(frozen=True)
class MobiusMap:
    """z -> (a z + b) / (c z + d) with ad - bc != 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))

    @property
    def determinant(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def is_invertible(self) -> bool:
        return abs(self.determinant) > 0.0

    def __call__(self, z: Point) -> Point:
        return mobius_apply(self, z)

    def compose(self, other: "MobiusMap") -> "MobiusMap":
        """self after other: (self . other)(z) = self(other(z))."""
        return MobiusMap(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    @staticmethod
    def identity() -> "MobiusMap":
        return MobiusMap(1, 0, 0, 1)

    def has_real_coefficients(self, tol: float = 1e-12) -> bool:
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        return all(
            abs(v.imag) <= tol * scale for v in (self.a, self.b, self.c, self.d)
        )


def mobius_apply(map: MobiusMap, z: Point) -> Point:
    """Apply a Mobius map projectively; the point at infinity is tagged."""
    if not map.is_invertible:
        raise ValueError("Mobius map is degenerate (ad - bc = 0)")
    if is_infinity(z):
        if map.c == 0:
            return INFINITY
        return map.a / map.c
    z = complex(z)
    den = map.c * z + map.d
    if den == 0:
        return INFINITY
    return (map.a * z + map.b) / den


def disk_to_half_plane_map() -> MobiusMap:
    """mu(z) = i(1 - z)/(1 + z), sending the unit disk onto the upper
    half-plane with mu(-1) = infinity."""
    return MobiusMap(-1j, 1j, 1, 1)


# ---------------------------------------------------------------------------
# configurations


def _pair_by_involution(values, partner, tol):
    """Split `values` into fixed points of the involution and matched pairs.

    Returns (fixed, pairs, unmatched): `pairs` holds one representative per
    matched pair; `unmatched` holds values whose partner is missing.
    """
    fixed, reps, pool = [], [], list(values)
    used = [False] * len(pool)
    for i, v in enumerate(pool):
        if used[i]:
            continue
        if abs(v - partner(v)) <= tol:
            used[i] = True
            fixed.append(v)
            continue
        mate = None
        for j in range(i + 1, len(pool)):
            if not used[j] and abs(pool[j] - partner(v)) <= tol:
                mate = j
                break
        if mate is not None:
            used[i] = used[mate] = True
            reps.append(v)
    unmatched = [v for i, v in enumerate(pool) if not used[i]]
    return fixed, reps, unmatched


@dataclass(frozen=True)
class Configuration:
    """An (n, m) boundary data set in one of the two uniformizations.

    x holds the growth points (reals on the half-plane, unit-modulus
    complex on the disk), xi the screening charges, u the marked point.
    Build through :func:`half_plane_config` / :func:`disk_config`, which
    normalize ordering and materialize the symmetry partners of xi exactly.
    """

    uniformization: Uniformization
    x: tuple
    xi: tuple[complex, ...]
    u: Point

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def m(self) -> int:
        return len(self.xi)

    @property
    def regime(self) -> Regime:
        return regime_of(self.n, self.m)

    def x_complex(self) -> tuple[complex, ...]:
        return tuple(complex(v) for v in self.x)

    def finite_points(self) -> tuple[complex, ...]:
        pts = self.x_complex() + tuple(self.xi)
        if not is_infinity(self.u):
            pts = pts + (complex(self.u),)
        return pts

    def feature_scale(self) -> float:
        """Largest pairwise distance among x and xi, floored at 1."""
        pts = self.x_complex() + tuple(self.xi)
        best = 0.0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = max(best, abs(pts[i] - pts[j]))
        return max(best, 1.0)

    def min_feature_distance(self) -> float:
        pts = self.x_complex() + tuple(self.xi)
        best = math.inf
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = min(best, abs(pts[i] - pts[j]))
        return best if best < math.inf else 1.0


def half_plane_config(x: Iterable[float], xi: Iterable[complex] = (), u: Point = INFINITY) -> Configuration:
    """Half-plane configuration with x sorted increasing and xi closed under
    conjugation (conjugate partners are materialized exactly)."""
    vals = [complex(v) for v in x]
    if any(abs(v.imag) > 1e-9 for v in vals):
        raise ValueError("half-plane growth points must be real")
    xs = tuple(sorted(v.real for v in vals))
    reals, uppers, unmatched = _pair_by_involution(
        [complex(v) for v in xi], lambda z: z.conjugate(), CLOSURE_TOL
    )
    xi_out = [complex(v.real, 0.0) for v in reals]
    for v in uppers:
        rep = v if v.imag > 0 else v.conjugate()
        xi_out.extend([rep, rep.conjugate()])
    xi_out.extend(unmatched)
    if is_infinity(u):
        u_out: Point = INFINITY
    else:
        u_out = complex(u)
        if abs(u_out.imag) <= 1e-14:
            u_out = complex(u_out.real, 0.0)
    return Configuration(Uniformization.HALF_PLANE, xs, tuple(xi_out), u_out)


def _unit_snap(z: complex, tol: float = 1e-9) -> complex:
    r = abs(z)
    if r > 0 and abs(r - 1.0) <= tol:
        return z / r
    return z


def disk_config(x: Iterable[complex], xi: Iterable[complex] = (), u: Point = -1.0) -> Configuration:
    """Disk configuration: x snapped to the unit circle and sorted by
    principal argument; xi closed under inversion through the circle
    (z -> 1/conj(z)), the disk image of half-plane conjugation symmetry."""
    xs = tuple(sorted((_unit_snap(complex(v), UNIT_MODULUS_TOL) for v in x), key=lambda z: cmath.phase(z)))
    snapped = [_unit_snap(complex(v)) for v in xi]
    circle, inner_reps, unmatched = _pair_by_involution(
        snapped, lambda z: 1.0 / z.conjugate() if z != 0 else complex(math.inf), CLOSURE_TOL
    )
    xi_out = list(circle)
    for v in inner_reps:
        rep = v if abs(v) < 1.0 else 1.0 / v.conjugate()
        xi_out.extend([rep, 1.0 / rep.conjugate()])
    xi_out.extend(unmatched)
    u_out: Point = INFINITY if is_infinity(u) else complex(u)
    return Configuration(Uniformization.DISK, xs, tuple(xi_out), u_out)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple[Check, ...]
    regime: Regime
    warnings: tuple[str, ...] = ()
    notes: tuple[str, ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def _xi_symmetry_ok(cfg: Configuration, tol: float = CLOSURE_TOL) -> tuple[bool, str]:
    if cfg.uniformization is Uniformization.HALF_PLANE:
        partner = lambda z: z.conjugate()
        label = "conjugate"
    else:
        partner = lambda z: 1.0 / z.conjugate() if z != 0 else complex(math.inf)
        label = "inversion partner"
    remaining = list(cfg.xi)
    while remaining:
        v = remaining.pop()
        p = partner(v)
        if abs(v - p) <= tol:
            continue
        hit = None
        for i, w in enumerate(remaining):
            if abs(w - p) <= tol:
                hit = i
                break
        if hit is None:
            return False, f"{label} of {v:.6g} missing"
        remaining.pop(hit)
    return True, ""


def validate_configuration(cfg: Configuration) -> ValidationReport:
    """Check all configuration invariants; failures are reported, not raised.

    The threshold regime n+1-m = m is flagged with a warning (no curve
    systems exist there) and overscreening with an informational note.
    """
    checks: list[Check] = []
    xs = cfg.x_complex()
    n, m = cfg.n, cfg.m

    dup = min(
        (abs(xs[i] - xs[j]) for i in range(n) for j in range(i + 1, n)),
        default=math.inf,
    )
    checks.append(Check("x_distinct", dup > COLLISION_TOL,
                        "" if dup > COLLISION_TOL else f"min gap {dup:.3g}"))

    if cfg.uniformization is Uniformization.HALF_PLANE:
        on_bdry = all(abs(z.imag) == 0.0 for z in xs)
        checks.append(Check("x_real", on_bdry))
        ordered = all(xs[i].real < xs[i + 1].real for i in range(n - 1))
        checks.append(Check("x_increasing", ordered))
        u_ok = is_infinity(cfg.u) or abs(complex(cfg.u).imag) == 0.0
        checks.append(Check("u_on_boundary", u_ok))
    else:
        mods = [abs(abs(z) - 1.0) for z in xs]
        checks.append(Check("x_unit_modulus", all(d <= UNIT_MODULUS_TOL for d in mods),
                            "" if all(d <= UNIT_MODULUS_TOL for d in mods) else f"max |.|-1 = {max(mods):.3g}"))
        args = [cmath.phase(z) for z in xs]
        checks.append(Check("x_counterclockwise", all(args[i] < args[i + 1] for i in range(n - 1))))
        u_ok = (not is_infinity(cfg.u)) and abs(abs(complex(cfg.u)) - 1.0) <= 1e-9
        checks.append(Check("u_on_boundary", u_ok))

    sym_ok, sym_detail = _xi_symmetry_ok(cfg)
    checks.append(Check("xi_symmetry_closed", sym_ok, sym_detail))

    checks.append(Check("m_le_n", m <= n, "" if m <= n else "no such systems for m > n"))

    coll = math.inf
    for xi in cfg.xi:
        for z in xs:
            coll = min(coll, abs(xi - z))
        if not is_infinity(cfg.u):
            coll = min(coll, abs(xi - complex(cfg.u)))
    checks.append(Check("xi_avoids_x_and_u", coll > COLLISION_TOL,
                        "" if coll > COLLISION_TOL else f"min distance {coll:.3g}"))

    regime = regime_of(n, m)
    warnings: list[str] = []
    notes: list[str] = []
    if regime is Regime.THRESHOLD:
        warnings.append("threshold regime n+1-m = m: there are no such R")
    elif regime is Regime.OVERSCREENING:
        notes.append("overscreening regime: charge configurations form continuous families")
    return ValidationReport(tuple(checks), regime, tuple(warnings), tuple(notes))


class TransportError(ValueError):
    pass


def transport_configuration(cfg: Configuration, map: MobiusMap,
                            target: Uniformization | None = None) -> Configuration:
    """Map x, xi and u pointwise and re-normalize in the target uniformization.

    The target is inferred from the image points when not given: real images
    mean the half-plane, unit-modulus images the disk.
    """
    if not map.is_invertible:
        raise TransportError("degenerate Mobius map")
    xs = [mobius_apply(map, z) for z in cfg.x_complex()]
    xis = [mobius_apply(map, z) for z in cfg.xi]
    u = mobius_apply(map, cfg.u)
    if any(is_infinity(z) for z in xs + xis):
        raise TransportError("a growth point or charge maps to infinity")

    finite = [complex(z) for z in xs + xis] + ([] if is_infinity(u) else [complex(u)])
    for i in range(len(finite)):
        for j in range(i + 1, len(finite)):
            if abs(finite[i] - finite[j]) <= COLLISION_TOL:
                raise TransportError(
                    f"image points collide: {finite[i]:.6g} ~ {finite[j]:.6g}")

    if target is None:
        if all(abs(complex(z).imag) <= 1e-9 for z in xs):
            target = Uniformization.HALF_PLANE
        elif all(abs(abs(complex(z)) - 1.0) <= 1e-9 for z in xs):
            target = Uniformization.DISK
        else:
            raise TransportError("image not recognizably on a supported boundary")

    if target is Uniformization.HALF_PLANE:
        return half_plane_config([complex(z).real for z in xs], xis, u)
    if is_infinity(u):
        raise TransportError("disk uniformization needs a finite marked point")
    return disk_config(xs, xis, u)


# ---------------------------------------------------------------------------
# link patterns


@dataclass(frozen=True)
class LinkPattern:
    """m noncrossing arcs among boundary points 1..n, remaining points
    joined to the marked point by rays that no arc covers."""

    arcs: tuple[tuple[int, int], ...]
    rays: tuple[int, ...]

    def __post_init__(self):
        arcs = tuple(sorted(tuple(sorted(a)) for a in self.arcs))
        object.__setattr__(self, "arcs", arcs)
        object.__setattr__(self, "rays", tuple(sorted(self.rays)))

    @property
    def n(self) -> int:
        return 2 * len(self.arcs) + len(self.rays)

    def is_valid(self, n: int | None = None) -> bool:
        members = sorted([i for a in self.arcs for i in a] + list(self.rays))
        if members != list(range(1, (n or self.n) + 1)):
            return False
        for (a, b) in self.arcs:
            if a == b:
                return False
            for (c, d) in self.arcs:
                if (a, b) < (c, d) and (a < c < b < d or c < a < d < b):
                    return False
            for r in self.rays:
                if a < r < b:
                    return False
        return True

    def describe(self) -> str:
        parts = [f"{a}-{b}" for a, b in self.arcs] + [f"{r}^" for r in self.rays]
        return "{" + ", ".join(parts) + "}"


def ballot_count(n: int, m: int) -> int:
    """Number of (n, m) link patterns: C(n, m) - C(n, m-1)."""
    if m < 0 or 2 * m > n:
        return 0
    return comb(n, m) - (comb(n, m - 1) if m >= 1 else 0)


def enumerate_link_patterns(n: int, m: int) -> list[LinkPattern]:
    """Exhaustively enumerate (n, m) patterns by backtracking.

    A point may open an arc, close the innermost open arc, or carry a ray;
    rays are only allowed where no arc is currently open, which is exactly
    the planarity constraint with the marked point on the boundary.
    """
    if not (0 <= 2 * m <= n):
        raise ValueError(f"need 0 <= 2m <= n, got (n, m) = ({n}, {m})")
    out: list[LinkPattern] = []
    arcs: list[tuple[int, int]] = []
    rays: list[int] = []
    stack: list[int] = []

    def walk(i: int):
        if i > n:
            if not stack and len(arcs) == m:
                out.append(LinkPattern(tuple(arcs), tuple(rays)))
            return
        # prune: not enough points left to close open arcs / place arcs
        remaining = n - i + 1
        if len(stack) > remaining:
            return
        if len(arcs) < m or stack:
            # open a new arc
            if len(arcs) + len(stack) < m:
                stack.append(i)
                walk(i + 1)
                stack.pop()
            # close the innermost open arc
            if stack:
                j = stack.pop()
                arcs.append((j, i))
                walk(i + 1)
                arcs.pop()
                stack.append(j)
        if not stack:
            rays.append(i)
            walk(i + 1)
            rays.pop()

    walk(1)
    return out
