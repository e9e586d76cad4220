"""Tracing the real locus of R as flow lines from the critical points.

The locus through a critical point x_j is the level set
Im R(z) = Im R(x_j) (zero in the half-plane picture).  The flow
z' = 1/R'(z) keeps Im R constant and moves Re R monotonically, so the
tracer follows the unit-speed field conj(R')/|R'|, re-correcting onto the
level set after every step.  Simple poles lie on the locus and are crossed
by a point reflection through the pole.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .core import Configuration, LinkPattern, Regime, Uniformization, is_infinity
from .rational import RationalMap, rational_map_from_configuration


class SeedError(RuntimeError):
    pass


class PatternError(RuntimeError):
    def __init__(self, message: str, trace_indices: tuple[int, ...] = ()):
        super().__init__(message)
        self.trace_indices = trace_indices


class TerminalKind(Enum):
    BOUNDARY = "boundary"
    MARKED = "marked"
    ESCAPED = "escaped"
    STEP_LIMIT = "step_limit"


@dataclass(frozen=True)
class Terminal:
    kind: TerminalKind
    index: int | None = None  # nearest critical index for BOUNDARY


@dataclass(frozen=True)
class TraceOptions:
    seed_factor: float = 1e-4          # epsilon = seed_factor * min feature gap
    step_fraction: float = 0.02        # h = step_fraction * nearest feature distance
    min_step: float = 1e-6
    max_step_fraction: float = 0.05    # cap h at this fraction of the domain scale
    escape_factor: float = 1e3         # escape radius over domain scale
    snap_factor: float = 50.0          # boundary snap / marked-point radius over epsilon
    max_steps: int = 1_000_000
    corrector_steps: int = 3
    seed_corrector_steps: int = 10
    store_every: int = 1


@dataclass(frozen=True)
class Trace:
    start_index: int
    points: tuple[complex, ...]
    terminal: Terminal
    passed_poles: tuple[int, ...]
    level: float  # Im R along the trace


def _min_gap(points) -> float:
    best = math.inf
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = min(best, abs(points[i] - points[j]))
    return best if best < math.inf else 1.0


def _domain_scale(points) -> float:
    best = 0.0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            best = max(best, abs(points[i] - points[j]))
    return max(best, 1.0)


def trace_from(R: RationalMap, j: int, opts: TraceOptions | None = None) -> Trace:
    """Trace the locus branch leaving critical point j into the domain.

    The polyline starts at the critical point, runs along the level set
    Im R = Im R(x_j), and terminates at the boundary near another critical
    point, at the marked point, at the escape radius, or at the step limit.
    """
    opts = opts or TraceOptions()
    fd = R.derivative_factored
    zeros = fd.zeros
    poles = fd.poles
    if not (0 <= j < len(zeros)):
        raise IndexError(f"critical index {j} out of range")
    xj = complex(zeros[j])
    features = list(zeros) + list(poles)
    eps = opts.seed_factor * _min_gap(features) if len(features) > 1 else opts.seed_factor
    scale = _domain_scale(features)
    snap_radius = opts.snap_factor * eps
    in_disk = fd.domain is Uniformization.DISK
    u = fd.u

    level = float(R(xj).imag)

    def boundary_dist(z: complex) -> float:
        return (1.0 - abs(z)) if in_disk else z.imag

    def deriv(z: complex) -> complex:
        return complex(R.derivative(z))

    def unit_field(z: complex) -> complex:
        d = deriv(z)
        a = abs(d)
        if a == 0.0:
            raise ArithmeticError(f"R' vanishes at {z:.6g} away from the seed")
        return d.conjugate() / a

    def correct(z: complex, direction: complex, max_steps: int) -> complex:
        # Newton on s -> Im R(z + s*direction) - level
        for _ in range(max_steps):
            g = float(R(z).imag) - level
            if abs(g) <= 1e-12 * (1.0 + abs(complex(R(z)).real)):
                break
            slope = (deriv(z) * direction).imag
            if slope == 0.0:
                break
            z = z - (g / slope) * direction
        return z

    # seed just inside the domain; the interior locus branch is orthogonal
    # to the boundary at a simple boundary critical point
    inward = (-xj / abs(xj)) if in_disk else 1j
    z = xj + eps * inward
    z = correct(z, 1j * unit_field(z), opts.seed_corrector_steps)
    if abs(float(R(z).imag) - level) > 1e-6 * (1.0 + abs(complex(R(z)).real)):
        raise SeedError(f"seed for critical point {j} failed to land on the locus")
    if boundary_dist(z) <= 0:
        raise SeedError(f"seed for critical point {j} left the domain")

    sign = 1.0
    f0 = unit_field(z)
    if (f0.conjugate() * (z - xj)).real < 0:
        sign = -1.0

    pts: list[complex] = [xj, z]
    passed: list[int] = []
    skip_pole = -1
    skip_until = 0.0
    terminal: Terminal | None = None

    steps = 0
    while steps < opts.max_steps:
        steps += 1

        # termination checks
        if not is_infinity(u) and abs(z - complex(u)) < snap_radius:
            terminal = Terminal(TerminalKind.MARKED)
            break
        if boundary_dist(z) < 0.5 * eps and abs(z - xj) > snap_radius:
            dists = [abs(z - complex(w)) for w in zeros]
            k = int(np.argmin(dists))
            if dists[k] <= snap_radius:
                pts.append(complex(zeros[k]))
                terminal = Terminal(TerminalKind.BOUNDARY, k)
                break
            raise PatternError(
                f"trace {j} hit the boundary {dists[k]:.3g} away from any critical point",
                (j,))
        if not in_disk and abs(z) > opts.escape_factor * scale:
            terminal = Terminal(TerminalKind.ESCAPED)
            break

        dist = min(abs(z - w) for w in features)
        if fd.marked_point is not None:
            dist = min(dist, abs(z - fd.marked_point))
        h = min(max(opts.step_fraction * dist, opts.min_step),
                opts.max_step_fraction * scale)

        # cross a simple pole by point reflection along the incoming line
        hopped = False
        for k, pole in enumerate(poles):
            if k == skip_pole and abs(z - pole) < skip_until:
                continue
            if abs(z - pole) < 3.0 * h:
                z_new = 2.0 * pole - z
                if (boundary_dist(z_new) > 0) or in_disk and abs(z_new) < 1.0:
                    passed.append(k)
                    skip_pole, skip_until = k, 5.0 * abs(z_new - pole)
                    z = correct(z_new, 1j * unit_field(z_new), opts.corrector_steps)
                    pts.append(z)
                    hopped = True
                break
        if hopped:
            continue

        def vf(w: complex) -> complex:
            return sign * unit_field(w)

        k1 = vf(z)
        k2 = vf(z + 0.5 * h * k1)
        k3 = vf(z + 0.5 * h * k2)
        k4 = vf(z + h * k3)
        z_pred = z + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        z = correct(z_pred, 1j * vf(z_pred), opts.corrector_steps)
        if steps % opts.store_every == 0:
            pts.append(z)

    if terminal is None:
        terminal = Terminal(TerminalKind.STEP_LIMIT)
    return Trace(j, tuple(pts), terminal, tuple(passed), level)


def trace_all(cfg: Configuration, R: RationalMap | None = None,
              opts: TraceOptions | None = None) -> list[Trace]:
    """One trace per critical point, in the configuration's own coordinates."""
    R = R or rational_map_from_configuration(cfg)
    return [trace_from(R, j, opts) for j in range(cfg.n)]


def extract_pattern(traces: list[Trace], cfg: Configuration) -> LinkPattern:
    """Build the link pattern realized by a full set of traces.

    Traces meeting another critical point pair into arcs (the pairing must
    be symmetric); traces reaching the marked point, or escaping when u is
    at infinity, become rays.  In the underscreening regime the arc count
    must equal m.
    """
    n = cfg.n
    if len(traces) != n:
        raise PatternError(f"need one trace per critical point ({len(traces)} of {n})")
    by_start = {t.start_index: t for t in traces}
    if set(by_start) != set(range(n)):
        raise PatternError("traces do not cover the critical points exactly once")

    arcs: set[tuple[int, int]] = set()
    rays: list[int] = []
    for t in traces:
        kind = t.terminal.kind
        if kind is TerminalKind.BOUNDARY:
            k = t.terminal.index
            if k == t.start_index:
                raise PatternError(f"trace {t.start_index} returned to its own start",
                                   (t.start_index,))
            back = by_start[k]
            if not (back.terminal.kind is TerminalKind.BOUNDARY
                    and back.terminal.index == t.start_index):
                raise PatternError(
                    f"asymmetric pairing: trace {t.start_index} ends at {k} "
                    f"but trace {k} does not return", (t.start_index, k))
            arcs.add(tuple(sorted((t.start_index + 1, k + 1))))
        elif kind is TerminalKind.MARKED:
            rays.append(t.start_index + 1)
        elif kind is TerminalKind.ESCAPED:
            if not is_infinity(cfg.u):
                raise PatternError(
                    f"trace {t.start_index} escaped although u is finite",
                    (t.start_index,))
            rays.append(t.start_index + 1)
        else:
            raise PatternError(f"trace {t.start_index} hit the step limit",
                               (t.start_index,))

    pattern = LinkPattern(tuple(arcs), tuple(rays))
    if not pattern.is_valid(n):
        raise PatternError(f"traces produce a non-planar pairing {pattern.describe()}")
    if cfg.regime is Regime.UNDERSCREENING and len(pattern.arcs) != cfg.m:
        raise PatternError(
            f"{len(pattern.arcs)} arcs realized but m = {cfg.m} expected",
            tuple(t.start_index for t in traces))
    return pattern


def realized_pattern(cfg: Configuration, opts: TraceOptions | None = None) -> LinkPattern:
    """Trace the configuration and extract its link pattern."""
    return extract_pattern(trace_all(cfg, opts=opts), cfg)


def locus_residual(R: RationalMap, trace: Trace) -> float:
    """max |Im R - level| / (1 + |Re R|) along the polyline interior."""
    worst = 0.0
    for z in trace.points[1:-1]:
        val = complex(R(z))
        worst = max(worst, abs(val.imag - trace.level) / (1.0 + abs(val.real)))
    return worst
