"""Deviation measures, error measures, and their closed forms.

A deviation measure is a functional on positions that is nonnegative (zero
exactly on constants) and insensitive to the addition of constants; the
generalized (sub-linear) ones are additionally positively homogeneous and
convex.  This module provides the standard catalogue in closed form:

* ``variance``, ``std_dev`` (probability-weighted), ``lower_semidev``,
* lower/upper range ``lr`` / ``ur`` and full range ``frd``,
* expected shortfall ``es(alpha)`` and the shortfall deviation
  ``esd(alpha) = es(alpha) applied to the centred position``,

together with error measures (``lp_norm(p)``, the asymmetric piecewise
linear ``kb(alpha)``, and ``sup_range = 2 ||.||_inf``) and the projection
``deviation_from_error`` that turns an error into a deviation by minimising
over constant shifts.

Quantile integrals are evaluated exactly on the step quantile function, so
shortfall values carry no quadrature error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import market
from .market import MarketSpace, MarketError


class MeasureError(ValueError):
    """Raised for invalid measure parameters or descriptions."""


@dataclass(frozen=True)
class AxiomFlags:
    """Tri-state axiom record for a functional on positions."""

    nonnegative: bool | None = None
    translation_insensitive: bool | None = None
    positive_homogeneous: bool | None = None
    convex: bool | None = None
    comonotone_additive: bool | None = None
    law_invariant: bool | None = None
    lower_range_dominated: bool | None = None


@dataclass(frozen=True)
class DeviationFunctional:
    """A named functional on positions with declared axioms.

    ``homogeneity_degree`` is the exponent ``d`` with
    ``D(lam x) = lam^d D(x)`` when one exists (2 for variance, 1 for the
    positively homogeneous measures, None when unknown); sub-level-set
    constructions use it to justify star-shapedness.
    """

    label: str
    eval_fn: Callable[[MarketSpace, np.ndarray], float]
    axioms: AxiomFlags
    homogeneity_degree: float | None = 1.0

    def eval(self, space: MarketSpace, x) -> float:
        return float(self.eval_fn(space, np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class ErrorFunctional:
    """A nonnegative functional measuring the size of a position."""

    label: str
    eval_fn: Callable[[MarketSpace, np.ndarray], float]
    axioms: AxiomFlags
    homogeneity_degree: float | None = 1.0

    def eval(self, space: MarketSpace, x) -> float:
        return float(self.eval_fn(space, np.asarray(x, dtype=float)))


# ---------------------------------------------------------------------------
# Closed forms
# ---------------------------------------------------------------------------

def _variance(space: MarketSpace, x: np.ndarray) -> float:
    centred = x - space.probs @ x
    return float(space.probs @ (centred * centred))


def _std_dev(space: MarketSpace, x: np.ndarray) -> float:
    return math.sqrt(_variance(space, x))


def _lower_semidev(space: MarketSpace, x: np.ndarray) -> float:
    mean = space.probs @ x
    neg = np.maximum(mean - x, 0.0)
    return math.sqrt(float(space.probs @ (neg * neg)))


def _lower_range(space: MarketSpace, x: np.ndarray) -> float:
    return float(space.probs @ x - np.min(x))


def _upper_range(space: MarketSpace, x: np.ndarray) -> float:
    return float(np.max(x) - space.probs @ x)


def _full_range(space: MarketSpace, x: np.ndarray) -> float:
    return float(np.max(x) - np.min(x))


def expected_shortfall(space: MarketSpace, x: np.ndarray, alpha: float) -> float:
    """``ES_alpha(x) = -(1/alpha) * integral_0^alpha F_x^{-1}(t) dt``.

    ``alpha = 0`` is read as the limit ``-ess inf x``; ``alpha = 1`` gives
    ``-E[x]``.  The integral is evaluated exactly on the step quantile.
    """
    if not 0.0 <= alpha <= 1.0:
        raise MeasureError(f"shortfall level must lie in [0, 1], got {alpha}")
    if alpha == 0.0:
        return -float(np.min(x))
    values, cum = market.sorted_distribution(space, x)
    # Exact step integral: each atom contributes its value times the overlap
    # of its cumulative segment with (0, alpha].
    seg = np.diff(np.minimum(cum, alpha), prepend=0.0)
    total = float(values @ np.maximum(seg, 0.0))
    return -total / alpha


def shortfall_deviation(space: MarketSpace, x: np.ndarray, alpha: float) -> float:
    """``ESD_alpha(x) = ES_alpha(x - E[x])``; ``alpha = 0`` is the lower range."""
    centred = x - space.probs @ x
    return expected_shortfall(space, centred, alpha)


_SUBLINEAR = AxiomFlags(
    nonnegative=True,
    translation_insensitive=True,
    positive_homogeneous=True,
    convex=True,
    comonotone_additive=False,
    law_invariant=True,
    lower_range_dominated=False,
)


def builtin_deviation(name: str, alpha: float | None = None) -> DeviationFunctional:
    """Catalogue of standard deviation measures by name.

    Names: ``variance``, ``std_dev``, ``lower_semidev``, ``lr``, ``ur``,
    ``frd``, ``es`` (needs ``alpha``; not itself a deviation — it shifts by
    ``-c`` under constant addition), ``esd`` (needs ``alpha``; ``alpha = 0``
    coincides with ``lr``).
    """
    if name == "variance":
        return DeviationFunctional(
            label="variance",
            eval_fn=_variance,
            axioms=replace(_SUBLINEAR, positive_homogeneous=False),
            homogeneity_degree=2.0,
        )
    if name == "std_dev":
        return DeviationFunctional(label="std_dev", eval_fn=_std_dev, axioms=_SUBLINEAR)
    if name == "lower_semidev":
        return DeviationFunctional(
            label="lower_semidev",
            eval_fn=_lower_semidev,
            axioms=replace(_SUBLINEAR, lower_range_dominated=True),
        )
    if name == "lr":
        return DeviationFunctional(
            label="lr",
            eval_fn=_lower_range,
            axioms=replace(_SUBLINEAR, comonotone_additive=True, lower_range_dominated=True),
        )
    if name == "ur":
        return DeviationFunctional(
            label="ur",
            eval_fn=_upper_range,
            axioms=replace(_SUBLINEAR, comonotone_additive=True),
        )
    if name == "frd":
        return DeviationFunctional(
            label="frd",
            eval_fn=_full_range,
            axioms=replace(_SUBLINEAR, comonotone_additive=True),
        )
    if name == "es":
        if alpha is None:
            raise MeasureError("es requires an alpha level")
        a = float(alpha)
        return DeviationFunctional(
            label=f"es({a:g})",
            eval_fn=lambda space, x: expected_shortfall(space, x, a),
            axioms=AxiomFlags(
                nonnegative=False,
                translation_insensitive=False,
                positive_homogeneous=True,
                convex=True,
                comonotone_additive=True,
                law_invariant=True,
                lower_range_dominated=False,
            ),
        )
    if name == "esd":
        if alpha is None:
            raise MeasureError("esd requires an alpha level")
        a = float(alpha)
        return DeviationFunctional(
            label=f"esd({a:g})",
            eval_fn=lambda space, x: shortfall_deviation(space, x, a),
            axioms=replace(_SUBLINEAR, comonotone_additive=True, lower_range_dominated=True),
        )
    raise MeasureError(f"unknown deviation measure {name!r}")


def builtin_error(name: str, p: float | None = None, alpha: float | None = None) -> ErrorFunctional:
    """Catalogue of error measures: ``lp_norm`` (parameter ``p``),
    ``kb`` (asymmetric pinball-style error, parameter ``alpha``), and
    ``sup_range = 2 ||.||_inf``."""
    nonneg_convex = AxiomFlags(
        nonnegative=True,
        translation_insensitive=False,
        positive_homogeneous=True,
        convex=True,
        law_invariant=True,
    )
    if name == "lp_norm":
        if p is None:
            raise MeasureError("lp_norm requires the exponent p")
        pp = math.inf if p == math.inf else float(p)
        return ErrorFunctional(
            label=f"lp_norm({pp:g})",
            eval_fn=lambda space, x: market.lp_norm(space, x, pp),
            axioms=nonneg_convex,
        )
    if name == "kb":
        if alpha is None:
            raise MeasureError("kb requires an alpha level")
        a = float(alpha)
        if not 0.0 < a < 1.0:
            raise MeasureError(f"kb level must lie in (0, 1), got {alpha}")
        ratio = (1.0 - a) / a

        def kb(space: MarketSpace, x: np.ndarray) -> float:
            pos = np.maximum(x, 0.0)
            neg = np.maximum(-x, 0.0)
            return float(space.probs @ (ratio * neg + pos))

        return ErrorFunctional(label=f"kb({a:g})", eval_fn=kb, axioms=nonneg_convex)
    if name == "sup_range":
        return ErrorFunctional(
            label="sup_range",
            eval_fn=lambda space, x: 2.0 * float(np.max(np.abs(x))),
            axioms=nonneg_convex,
        )
    raise MeasureError(f"unknown error measure {name!r}")


# ---------------------------------------------------------------------------
# Error -> deviation projection
# ---------------------------------------------------------------------------

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_min(f, a: float, b: float, tol: float = 1e-10) -> float:
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def minimal_shift_error(error: ErrorFunctional, space: MarketSpace, x: np.ndarray) -> float:
    """``min_c error(x - c)`` over scalar shifts.

    Candidate shifts (entries, mean, median, midrange) are probed exactly —
    they contain the minimiser for the piecewise-linear and quadratic
    builtin families — and a golden-section search over the data range
    covers convex errors generally.
    """
    x = np.asarray(x, dtype=float)
    lo, hi = float(np.min(x)), float(np.max(x))
    candidates = {float(v) for v in x}
    candidates |= {float(space.probs @ x), float(np.median(x)), 0.5 * (lo + hi)}
    best = min(error.eval(space, x - c) for c in candidates)
    if error.axioms.convex is True:
        pad = max(1.0, hi - lo)
        c_star = _golden_min(lambda c: error.eval(space, x - c), lo - pad, hi + pad)
        best = min(best, error.eval(space, x - c_star))
    return best


def deviation_from_error(error: ErrorFunctional) -> DeviationFunctional:
    """Project an error measure to a deviation: ``D(x) = min_c error(x - c)``.

    Translation insensitivity and (for convex, homogeneous errors)
    convexity/homogeneity hold by construction; nonnegativity at
    non-constants is not assumed and stays unknown until audited.
    """
    ax = AxiomFlags(
        nonnegative=None,
        translation_insensitive=True,
        positive_homogeneous=error.axioms.positive_homogeneous,
        convex=error.axioms.convex,
        comonotone_additive=None,
        law_invariant=error.axioms.law_invariant,
        lower_range_dominated=None,
    )
    return DeviationFunctional(
        label=f"proj({error.label})",
        eval_fn=lambda space, x: minimal_shift_error(error, space, x),
        axioms=ax,
        homogeneity_degree=error.homogeneity_degree,
    )


# ---------------------------------------------------------------------------
# Axiom audits and structural identities
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AxiomReport:
    axiom: str
    passed: bool
    trials: int
    worst_gap: float
    counterexample: dict | None = None


def check_axioms(
    D: DeviationFunctional,
    space: MarketSpace,
    trials: int = 200,
    seed: int = 0,
    coord_range: float = 4.0,
    tol: float = 1e-8,
) -> list[AxiomReport]:
    """Sampled audit of every axiom declared ``True`` on ``D``.

    Reports carry the worst violation gap; a returned failure includes a
    replayable counterexample.
    """
    rng = np.random.default_rng(seed)
    reports: list[AxiomReport] = []
    ax = D.axioms

    def run(axiom: str, witness) -> None:
        worst = 0.0
        ce = None
        for t in range(trials):
            gap, payload = witness(t)
            if gap > worst:
                worst = gap
                if gap > tol:
                    ce = dict(payload, trial=t, seed=seed, gap=gap)
        reports.append(AxiomReport(axiom=axiom, passed=worst <= tol, trials=trials,
                                   worst_gap=worst, counterexample=ce))

    def draw():
        return rng.uniform(-coord_range, coord_range, size=space.n)

    if ax.nonnegative is True:
        def nonneg(t):
            x = draw()
            v = D.eval(space, x)
            gap = max(0.0, -v)
            if np.ptp(x) > 1e-6 and v <= tol:
                gap = max(gap, tol * 2)  # deviation must be positive off constants
            c = rng.uniform(-coord_range, coord_range)
            gap = max(gap, abs(D.eval(space, np.full(space.n, c))))
            return gap, {"x": x.tolist()}
        run("nonnegative", nonneg)

    if ax.translation_insensitive is True:
        def translation(t):
            x = draw()
            c = rng.uniform(-2 * coord_range, 2 * coord_range)
            gap = abs(D.eval(space, x + c) - D.eval(space, x))
            return gap, {"x": x.tolist(), "c": float(c)}
        run("translation_insensitive", translation)

    if ax.positive_homogeneous is True:
        def homogeneous(t):
            x = draw()
            lam = rng.uniform(0.1, 5.0)
            base = D.eval(space, x)
            gap = abs(D.eval(space, lam * x) - lam * base) / max(1.0, lam * abs(base))
            return gap, {"x": x.tolist(), "lam": float(lam)}
        run("positive_homogeneous", homogeneous)

    if ax.convex is True:
        def convex(t):
            x, y = draw(), draw()
            lam = rng.uniform(0.0, 1.0)
            lhs = D.eval(space, lam * x + (1 - lam) * y)
            rhs = lam * D.eval(space, x) + (1 - lam) * D.eval(space, y)
            return max(0.0, lhs - rhs), {"x": x.tolist(), "y": y.tolist(), "lam": float(lam)}
        run("convex", convex)

    if ax.comonotone_additive is True:
        def comonotone(t):
            x, y = market.sample_comonotone_pair(rng, space, scale=coord_range)
            gap = abs(D.eval(space, x + y) - D.eval(space, x) - D.eval(space, y))
            return gap, {"x": x.tolist(), "y": y.tolist()}
        run("comonotone_additive", comonotone)

    if ax.law_invariant is True and space.is_uniform():
        def law(t):
            x = draw()
            perm = rng.permutation(space.n)
            gap = abs(D.eval(space, x[perm]) - D.eval(space, x))
            return gap, {"x": x.tolist(), "perm": perm.tolist()}
        run("law_invariant", law)

    if ax.lower_range_dominated is True:
        def dominated(t):
            x = draw()
            lr = float(space.probs @ x - np.min(x))
            return max(0.0, D.eval(space, x) - lr), {"x": x.tolist()}
        run("lower_range_dominated", dominated)

    return reports


def level_identity_check(
    D: DeviationFunctional,
    space: MarketSpace,
    k: float = 1.0,
    trials: int = 100,
    seed: int = 0,
    gauge_opts=None,
) -> float:
    """Max gap of ``k * gauge(sublevel(D, k)) - D`` over sampled positions.

    For a positively homogeneous deviation measure the identity is exact:
    the gauge of the level-``k`` acceptance set recovers ``D / k``.
    """
    from .gauge import DEFAULT_OPTIONS, minkowski_gauge
    from .sets import sublevel_set

    opts = gauge_opts or DEFAULT_OPTIONS
    rng = np.random.default_rng(seed)
    A = sublevel_set(space, D, k)
    worst = 0.0
    for _ in range(trials):
        x = rng.uniform(-4.0, 4.0, size=space.n)
        g = minkowski_gauge(A, x, opts).value
        d = D.eval(space, x)
        if math.isinf(g) or math.isinf(d):
            if g != d:
                worst = math.inf
            continue
        worst = max(worst, abs(k * g - d))
    return worst


@dataclass(frozen=True)
class AlgebraReport:
    identity: str
    passed: bool
    trials: int
    disagreements: int


def measure_algebra(
    D1: DeviationFunctional,
    D2: DeviationFunctional,
    space: MarketSpace,
    k: float = 1.0,
    lam: float = 2.0,
    trials: int = 200,
    seed: int = 0,
) -> list[AlgebraReport]:
    """Membership agreement checks for the sub-level-set algebra.

    * ``Acc_k(min(D1, D2)) = Acc_k(D1) union Acc_k(D2)``
    * ``Acc_k(max(D1, D2)) = Acc_k(D1) intersect Acc_k(D2)``
    * ``Acc_k(lam * D1) = (1/lam) Acc_k(D1)``
    * ``Acc_k(D1 + D2) subseteq Acc_k(D1) intersect Acc_k(D2)`` (one-sided)
    """
    rng = np.random.default_rng(seed)
    samples = [rng.uniform(-4.0, 4.0, size=space.n) for _ in range(trials)]
    reports = []

    def record(name: str, bad: int) -> None:
        reports.append(AlgebraReport(identity=name, passed=bad == 0, trials=trials, disagreements=bad))

    bad = sum(
        (min(D1.eval(space, x), D2.eval(space, x)) <= k)
        != (D1.eval(space, x) <= k or D2.eval(space, x) <= k)
        for x in samples
    )
    record("min_is_union", bad)

    bad = sum(
        (max(D1.eval(space, x), D2.eval(space, x)) <= k)
        != (D1.eval(space, x) <= k and D2.eval(space, x) <= k)
        for x in samples
    )
    record("max_is_intersection", bad)

    degree = D1.homogeneity_degree or 1.0
    bad = sum(
        (lam * D1.eval(space, x) <= k) != (D1.eval(space, np.asarray(x) * lam ** (1.0 / degree)) <= k)
        for x in samples
    )
    record("scaled_measure_is_shrunk_set", bad)

    bad = sum(
        (D1.eval(space, x) + D2.eval(space, x) <= k)
        and not (D1.eval(space, x) <= k and D2.eval(space, x) <= k)
        for x in samples
    )
    record("sum_set_inside_intersection", bad)

    return reports


# ---------------------------------------------------------------------------
# JSON measure descriptions
# ---------------------------------------------------------------------------

def measure_from_json(doc) -> DeviationFunctional:
    """Parse ``{"measure": name, "alpha"?: a}`` (or a bare name string)."""
    if isinstance(doc, str):
        doc = {"measure": doc}
    if not isinstance(doc, dict) or "measure" not in doc:
        raise MeasureError('measure description must be an object with a "measure" name')
    return builtin_deviation(doc["measure"], alpha=doc.get("alpha"))


def error_from_json(doc) -> ErrorFunctional:
    """Parse ``{"error": name, "p"?: p, "alpha"?: a}``."""
    if isinstance(doc, str):
        doc = {"error": doc}
    if not isinstance(doc, dict) or "error" not in doc:
        raise MeasureError('error description must be an object with an "error" name')
    p = doc.get("p")
    if p == "inf":
        p = math.inf
    return builtin_error(doc["error"], p=p, alpha=doc.get("alpha"))
