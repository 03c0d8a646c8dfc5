"""Acceptance sets: membership oracles with structural flags.

An acceptance set is a subset of the position space of a fixed market,
represented by a membership predicate plus tri-state structural flags
(``True`` = known to hold, ``False`` = known to fail, ``None`` = unknown).
Flags are trusted by downstream numerics — e.g. the gauge solver only uses
bisection when ``star_shaped`` is declared — so constructors propagate them
conservatively and ``check_property`` provides sampling falsifiers to audit
declarations.

Set constructors cover sub-level sets of functionals, scalar scaling,
unions/intersections, the Minkowski sum with the constants line
(``add_constants``), star hulls, and law-invariant hulls on uniform spaces.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Callable

import numpy as np

from . import market
from .market import MarketSpace, MarketError

if TYPE_CHECKING:  # pragma: no cover - type-only import, avoids a cycle
    from .duality import Polytope


class SetError(ValueError):
    """Raised for invalid set constructions or arguments."""


@dataclass(frozen=True)
class SetFlags:
    """Tri-state structural knowledge about an acceptance set."""

    star_shaped: bool | None = None
    convex: bool | None = None
    closed: bool | None = None
    stable_scalar_add: bool | None = None
    radially_bounded_nonconst: bool | None = None
    law_invariant: bool | None = None
    contains_zero: bool | None = None


def _and3(a: bool | None, b: bool | None) -> bool | None:
    """Conjunction in three-valued logic (unknown-propagating)."""
    if a is False or b is False:
        return False
    if a is True and b is True:
        return True
    return None


@dataclass(frozen=True, eq=False)
class AcceptanceSet:
    """A membership oracle over positions of one market space."""

    space: MarketSpace
    membership: Callable[[np.ndarray], bool]
    flags: SetFlags = field(default_factory=SetFlags)
    exact_form: "Polytope | None" = None
    label: str = ""

    def contains(self, x) -> bool:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.space.n,):
            raise SetError(f"position has shape {x.shape}, space has {self.space.n} outcomes")
        return bool(self.membership(x))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------

def sublevel_set(space: MarketSpace, functional, k: float, label: str = "") -> AcceptanceSet:
    """Sub-level set ``{ x : D(x) <= k }`` of a functional at level ``k > 0``.

    ``functional`` is any object with ``eval(space, x) -> float`` and an
    ``axioms`` record (see :mod:`minkdev.deviations`); its axioms decide the
    flags via the standard sub-level correspondences: positive homogeneity
    (any positive degree) gives star-shapedness, translation insensitivity
    gives stability under scalar addition, nonnegativity of the functional
    gives radial boundedness at non-constants and ``0`` membership.
    Non-finite functional values are treated as non-membership.
    """
    if not (k > 0.0) or not math.isfinite(k):
        raise SetError(f"sub-level threshold must be finite and positive, got {k}")
    ax = functional.axioms
    degree = getattr(functional, "homogeneity_degree", None)

    def member(x: np.ndarray) -> bool:
        v = functional.eval(space, x)
        return math.isfinite(v) and v <= k

    flags = SetFlags(
        star_shaped=True if (ax.nonnegative and degree is not None and degree > 0) else None,
        convex=True if ax.convex else None,
        closed=True,
        stable_scalar_add=True if ax.translation_insensitive else None,
        radially_bounded_nonconst=True if ax.nonnegative else None,
        law_invariant=True if ax.law_invariant else None,
        contains_zero=True if ax.nonnegative else None,
    )
    return AcceptanceSet(
        space=space,
        membership=member,
        flags=flags,
        label=label or f"sublevel({getattr(functional, 'label', 'D')}, {k:g})",
    )


def scale_set(A: AcceptanceSet, lam: float) -> AcceptanceSet:
    """The scaled set ``lam * A`` (membership: ``x / lam in A``), ``lam > 0``."""
    if not (lam > 0.0) or not math.isfinite(lam):
        raise SetError(f"scaling factor must be finite and positive, got {lam}")
    inner = A.membership
    flags = replace(A.flags, stable_scalar_add=None if A.flags.stable_scalar_add is None else A.flags.stable_scalar_add)
    return AcceptanceSet(
        space=A.space,
        membership=lambda x: inner(x / lam),
        flags=flags,
        label=f"{lam:g}*({A.label})" if A.label else "",
    )


def combine(op: str, A: AcceptanceSet, B: AcceptanceSet) -> AcceptanceSet:
    """Union or intersection of two sets on the same space.

    Intersections of convex sets stay convex; unions of star-shaped sets
    stay star-shaped but convexity may be lost, so it degrades to unknown.
    """
    if A.space is not B.space and not np.array_equal(A.space.probs, B.space.probs):
        raise SetError("combine requires sets over the same market space")
    fa, fb = A.flags, B.flags
    ma, mb = A.membership, B.membership
    if op == "union":
        flags = SetFlags(
            star_shaped=_and3(fa.star_shaped, fb.star_shaped),
            convex=None if _and3(fa.convex, fb.convex) is not False else False,
            closed=_and3(fa.closed, fb.closed),
            stable_scalar_add=_and3(fa.stable_scalar_add, fb.stable_scalar_add),
            radially_bounded_nonconst=_and3(fa.radially_bounded_nonconst, fb.radially_bounded_nonconst),
            law_invariant=_and3(fa.law_invariant, fb.law_invariant),
            contains_zero=True if (fa.contains_zero is True or fb.contains_zero is True) else _and3(fa.contains_zero, fb.contains_zero),
        )
        member = lambda x: ma(x) or mb(x)
        tag = "|"
    elif op == "intersection":
        flags = SetFlags(
            star_shaped=_and3(fa.star_shaped, fb.star_shaped),
            convex=_and3(fa.convex, fb.convex),
            closed=_and3(fa.closed, fb.closed),
            stable_scalar_add=_and3(fa.stable_scalar_add, fb.stable_scalar_add),
            radially_bounded_nonconst=True
            if (fa.radially_bounded_nonconst is True or fb.radially_bounded_nonconst is True)
            else _and3(fa.radially_bounded_nonconst, fb.radially_bounded_nonconst),
            law_invariant=_and3(fa.law_invariant, fb.law_invariant),
            contains_zero=_and3(fa.contains_zero, fb.contains_zero),
        )
        member = lambda x: ma(x) and mb(x)
        tag = "&"
    else:
        raise SetError(f"unknown combine op {op!r}")
    return AcceptanceSet(
        space=A.space,
        membership=member,
        flags=flags,
        label=f"({A.label}){tag}({B.label})" if A.label and B.label else "",
    )


@dataclass(frozen=True)
class ShiftSearchConfig:
    """Controls the scalar-shift search used by :func:`add_constants`.

    The membership question "is there a constant ``c`` with ``x - c in A``"
    is decided by probing deterministic candidate shifts (the entries of
    ``x``, its mean, median and midrange — exact minimisers for the
    piecewise-linear and quadratic families) followed by a uniform grid
    centred on the midrange.  ``c_max`` caps the reachable shift magnitude;
    beyond it the search reports non-membership.
    """

    grid_points: int = 256
    c_max: float = 1e6
    c_radius: float | None = None  # None: max(1, 2 * range of x)


def add_constants(A: AcceptanceSet, config: ShiftSearchConfig | None = None) -> AcceptanceSet:
    """The Minkowski sum ``A + R`` of a set with the constants line."""
    config = config or ShiftSearchConfig()
    inner = A.membership
    space = A.space
    probs = space.probs

    def member(x: np.ndarray) -> bool:
        lo, hi = float(np.min(x)), float(np.max(x))
        mid = 0.5 * (lo + hi)
        cands = [mid, float(probs @ x), float(np.median(x))]
        cands.extend(float(v) for v in x)
        for c in cands:
            if abs(c) <= config.c_max and inner(x - c):
                return True
        radius = config.c_radius if config.c_radius is not None else max(1.0, 2.0 * (hi - lo))
        radius = min(radius, config.c_max)
        for c in np.linspace(mid - radius, mid + radius, config.grid_points):
            if abs(c) <= config.c_max and inner(x - float(c)):
                return True
        return False

    flags = SetFlags(
        star_shaped=A.flags.star_shaped if A.flags.star_shaped is True else None,
        convex=A.flags.convex,
        closed=None,
        stable_scalar_add=True,
        radially_bounded_nonconst=None,
        law_invariant=A.flags.law_invariant,
        contains_zero=True if A.flags.contains_zero is True else None,
    )
    return AcceptanceSet(
        space=space,
        membership=member,
        flags=flags,
        label=f"({A.label})+R" if A.label else "",
    )


def star_hull(A: AcceptanceSet, resolution: int = 256, lam_min: float = 1e-6) -> AcceptanceSet:
    """The star hull ``st(A) = [0, 1] A``.

    Membership of ``z != 0`` holds iff some ``lam in (0, 1]`` has
    ``z / lam in A``; the search scans a geometric grid of ``resolution``
    points on ``[lam_min, 1]``.  Membership of ``0`` falls back to
    ``0 in A``.
    """
    if resolution < 2:
        raise SetError(f"star hull resolution must be at least 2, got {resolution}")
    inner = A.membership
    grid = np.geomspace(lam_min, 1.0, resolution)[::-1]

    def member(z: np.ndarray) -> bool:
        if not np.any(z):
            return inner(z)
        return any(inner(z / float(lam)) for lam in grid)

    flags = SetFlags(
        star_shaped=True,
        convex=A.flags.convex if A.flags.convex is True and A.flags.contains_zero is True else None,
        closed=None,
        stable_scalar_add=None,
        radially_bounded_nonconst=A.flags.radially_bounded_nonconst,
        law_invariant=A.flags.law_invariant,
        contains_zero=A.flags.contains_zero,
    )
    return AcceptanceSet(
        space=A.space,
        membership=member,
        flags=flags,
        label=f"st({A.label})" if A.label else "",
    )


def law_invariant_hull(A: AcceptanceSet) -> AcceptanceSet:
    """Largest law-invariant subset of ``A`` on a uniform space.

    A position belongs iff every outcome permutation of it belongs to ``A``.
    Requires uniform probabilities (permutations preserve the law only then)
    and a small outcome count so the full orbit can be enumerated.
    """
    space = A.space
    if not space.is_uniform(tol=1e-12):
        raise SetError("law-invariant hull requires a uniform space")
    if space.n > market.MAX_PERMUTATION_OUTCOMES:
        raise SetError(
            f"law-invariant hull enumerates n! permutations; n={space.n} exceeds "
            f"the cap of {market.MAX_PERMUTATION_OUTCOMES}"
        )
    inner = A.membership
    perms = [np.asarray(p, dtype=int) for p in itertools.permutations(range(space.n))]

    def member(x: np.ndarray) -> bool:
        return all(inner(x[p]) for p in perms)

    flags = SetFlags(
        star_shaped=A.flags.star_shaped,
        convex=A.flags.convex,
        closed=A.flags.closed,
        stable_scalar_add=A.flags.stable_scalar_add,
        radially_bounded_nonconst=A.flags.radially_bounded_nonconst,
        law_invariant=True,
        contains_zero=A.flags.contains_zero,
    )
    return AcceptanceSet(
        space=space,
        membership=member,
        flags=flags,
        label=f"lawhull({A.label})" if A.label else "",
    )


def ball_set(space: MarketSpace, p: float, radius: float = 1.0, center=None, label: str = "") -> AcceptanceSet:
    """Probability-weighted ``L^p`` ball ``{ x : ||x - center||_p <= radius }``."""
    if not (radius > 0.0) or not math.isfinite(radius):
        raise SetError(f"radius must be finite and positive, got {radius}")
    c = np.zeros(space.n) if center is None else market.as_position(space, center)
    centered_at_zero = not np.any(c)

    def member(x: np.ndarray) -> bool:
        return market.lp_norm(space, x - c, p) <= radius

    flags = SetFlags(
        star_shaped=True if centered_at_zero else None,
        convex=True,
        closed=True,
        stable_scalar_add=False,
        radially_bounded_nonconst=True if centered_at_zero else None,
        law_invariant=True if (centered_at_zero and space.is_uniform()) else None,
        contains_zero=bool(market.lp_norm(space, -c, p) <= radius),
    )
    return AcceptanceSet(space=space, membership=member, flags=flags,
                         label=label or f"ball(p={p:g}, r={radius:g})")


# ---------------------------------------------------------------------------
# Property falsifiers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SamplerConfig:
    """Sampling budget and ranges for the property falsifiers."""

    trials: int = 200
    coord_range: float = 4.0
    seed: int = 0
    lambda_points: int = 9
    shift_values: tuple[float, ...] = (-10.0, -1.0, -0.25, 0.25, 1.0, 10.0)
    ray_cap: float = 1e6
    ray_points: int = 64


@dataclass(frozen=True)
class PropertyReport:
    """Outcome of one sampled property check."""

    property: str
    passed: bool
    trials: int
    counterexample: dict | None = None


PROPERTY_NAMES = (
    "star_shaped",
    "strongly_star_shaped",
    "convex",
    "stable_scalar_add",
    "radially_bounded_nonconst",
    "absorbing",
    "law_invariant",
    "comonotone_convex",
    "complement_comonotone_convex",
    "anti_monotone_dispersive",
)


def _sample_member(A: AcceptanceSet, rng: np.random.Generator, coord_range: float, attempts: int = 60):
    """Rejection-sample one member of ``A`` (or None)."""
    n = A.space.n
    for _ in range(attempts):
        x = rng.uniform(-coord_range, coord_range, size=n)
        if A.membership(x):
            return x
        # Pull random points toward the origin; helps small sets.
        for shrink in (0.25, 0.05):
            if A.membership(x * shrink):
                return x * shrink
    return None


def check_property(A: AcceptanceSet, prop: str, config: SamplerConfig | None = None) -> PropertyReport:
    """Search for a counterexample to ``prop`` on sampled positions.

    A passing report means no counterexample was found within the sampling
    budget; it is evidence, not proof.  A failing report carries a
    replayable counterexample (positions and scalars).
    """
    config = config or SamplerConfig()
    rng = np.random.default_rng(config.seed)
    n = A.space.n
    lam_grid = np.linspace(0.0, 1.0, config.lambda_points)[1:]  # skip 0

    def fail(trial: int, **kw) -> PropertyReport:
        ce = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in kw.items()}
        ce["trial"] = trial
        ce["seed"] = config.seed
        return PropertyReport(property=prop, passed=False, trials=trial + 1, counterexample=ce)

    if prop == "star_shaped":
        for t in range(config.trials):
            x = _sample_member(A, rng, config.coord_range)
            if x is None:
                continue
            for lam in lam_grid:
                if not A.membership(lam * x):
                    return fail(t, x=x, lam=float(lam))
    elif prop == "strongly_star_shaped":
        # Along every sampled ray membership must be a single interval:
        # at most one switch in each direction over a geometric scale grid.
        scales = np.geomspace(1.0 / config.ray_cap, config.ray_cap, config.ray_points)
        for t in range(config.trials):
            x = rng.uniform(-config.coord_range, config.coord_range, size=n)
            if not np.any(x):
                continue
            pattern = [A.membership(s * x) for s in scales]
            # Star-shapedness about 0 forces membership to be non-increasing
            # along the ray: once a scale leaves the set, larger scales stay out.
            if any(not pattern[i] and pattern[i + 1] for i in range(len(pattern) - 1)):
                return fail(t, x=x, pattern=[int(b) for b in pattern])
    elif prop == "convex":
        for t in range(config.trials):
            x = _sample_member(A, rng, config.coord_range)
            y = _sample_member(A, rng, config.coord_range)
            if x is None or y is None:
                continue
            for lam in (0.25, 0.5, 0.75):
                if not A.membership(lam * x + (1 - lam) * y):
                    return fail(t, x=x, y=y, lam=lam)
    elif prop == "stable_scalar_add":
        for t in range(config.trials):
            x = _sample_member(A, rng, config.coord_range)
            if x is None:
                continue
            for c in config.shift_values:
                if not A.membership(x + c):
                    return fail(t, x=x, c=c)
    elif prop == "radially_bounded_nonconst":
        for t in range(config.trials):
            x = _sample_member(A, rng, config.coord_range)
            if x is None or np.ptp(x) < 1e-9:
                continue
            if A.membership(x * config.ray_cap):
                return fail(t, x=x, scale=config.ray_cap)
    elif prop == "absorbing":
        for t in range(config.trials):
            x = rng.uniform(-config.coord_range, config.coord_range, size=n)
            if not any(A.membership(x * s) for s in np.geomspace(1.0, 1e-10, 41)):
                return fail(t, x=x)
    elif prop == "law_invariant":
        if not A.space.is_uniform():
            raise SetError("law invariance is only checked on uniform spaces")
        perms = [np.asarray(p, dtype=int) for p in itertools.permutations(range(n))]
        for t in range(config.trials):
            x = _sample_member(A, rng, config.coord_range)
            if x is None:
                continue
            for p in perms:
                if not A.membership(x[p]):
                    return fail(t, x=x, perm=[int(i) for i in p])
    elif prop in ("comonotone_convex", "complement_comonotone_convex"):
        if prop == "comonotone_convex":
            member = A.membership
        else:
            member = lambda z: not A.membership(z)
        for t in range(config.trials):
            x, y = market.sample_comonotone_pair(rng, A.space, scale=config.coord_range)
            # scale the pair jointly until both land in the target region
            found = None
            for s in np.geomspace(4.0, 1e-4, 25):
                if member(x * s) and member(y * s):
                    found = s
                    break
            if found is None:
                continue
            xs, ys = x * found, y * found
            for lam in (0.25, 0.5, 0.75):
                z = lam * xs + (1 - lam) * ys
                if not member(z):
                    return fail(t, x=xs, y=ys, lam=lam)
    elif prop == "anti_monotone_dispersive":
        # If x is accepted, anything less dispersed than x must be accepted.
        for t in range(config.trials):
            x = _sample_member(A, rng, config.coord_range)
            if x is None:
                continue
            lam = rng.uniform(0.0, 1.0)
            shift = rng.uniform(-1.0, 1.0)
            y = shift + expectation_center(A.space, x) + lam * (x - expectation_center(A.space, x))
            if not market.dispersive_leq(A.space, y, x):
                continue
            if not A.membership(y):
                return fail(t, x=x, y=y, lam=float(lam), shift=float(shift))
    else:
        raise SetError(f"unknown property {prop!r}; known: {PROPERTY_NAMES}")

    return PropertyReport(property=prop, passed=True, trials=config.trials)


def expectation_center(space: MarketSpace, x: np.ndarray) -> float:
    return float(space.probs @ x)


def audit_flags(A: AcceptanceSet, config: SamplerConfig | None = None) -> list[PropertyReport]:
    """Run falsifiers for every flag declared ``True`` on ``A``."""
    mapping = {
        "star_shaped": "star_shaped",
        "convex": "convex",
        "stable_scalar_add": "stable_scalar_add",
        "radially_bounded_nonconst": "radially_bounded_nonconst",
        "law_invariant": "law_invariant",
    }
    reports = []
    for flag, prop in mapping.items():
        if getattr(A.flags, flag) is True:
            if prop == "law_invariant" and not A.space.is_uniform():
                continue
            reports.append(check_property(A, prop, config))
    return reports


# ---------------------------------------------------------------------------
# JSON set descriptions
# ---------------------------------------------------------------------------

def set_from_json(space: MarketSpace, doc, measure_parser=None) -> AcceptanceSet:
    """Build an acceptance set from a JSON description.

    Supported kinds::

        {"kind": "sublevel", "measure": {...}, "k": 1.0}
        {"kind": "ball", "p": 2, "radius": 1.0, "center": [...]}
        {"kind": "halfspaces", "rows": [[...], ...], "rhs": [...]}
        {"kind": "scale", "of": {...}, "factor": 2.0}
        {"kind": "combine", "op": "union"|"intersection", "of": [{...}, {...}]}
        {"kind": "add_constants", "of": {...}}
        {"kind": "star_hull", "of": {...}, "resolution": 256}
        {"kind": "law_invariant_hull", "of": {...}}

    ``measure_parser`` maps a measure description to a functional; by default
    the builtin deviation measures are used.
    """
    if measure_parser is None:
        from .deviations import measure_from_json as measure_parser  # local: avoids cycle
    if not isinstance(doc, dict) or "kind" not in doc:
        raise SetError('set description must be an object with a "kind"')
    kind = doc["kind"]
    label = str(doc.get("label", ""))
    if kind == "sublevel":
        D = measure_parser(doc["measure"])
        return sublevel_set(space, D, float(doc.get("k", 1.0)), label=label)
    if kind == "ball":
        p = math.inf if doc.get("p") in ("inf", None) else float(doc["p"])
        return ball_set(space, p, float(doc.get("radius", 1.0)), doc.get("center"), label=label)
    if kind == "halfspaces":
        from .duality import Polytope  # local: avoids a module cycle
        P = Polytope.from_halfspaces(space, np.asarray(doc["rows"], float), np.asarray(doc["rhs"], float))
        return P.as_acceptance_set(label=label)
    if kind == "scale":
        return scale_set(set_from_json(space, doc["of"], measure_parser), float(doc["factor"]))
    if kind == "combine":
        parts = [set_from_json(space, d, measure_parser) for d in doc["of"]]
        if len(parts) < 2:
            raise SetError("combine needs at least two operands")
        out = parts[0]
        for part in parts[1:]:
            out = combine(doc["op"], out, part)
        return out
    if kind == "add_constants":
        return add_constants(set_from_json(space, doc["of"], measure_parser))
    if kind == "star_hull":
        return star_hull(set_from_json(space, doc["of"], measure_parser), int(doc.get("resolution", 256)))
    if kind == "law_invariant_hull":
        return law_invariant_hull(set_from_json(space, doc["of"], measure_parser))
    raise SetError(f"unknown set kind {kind!r}")
