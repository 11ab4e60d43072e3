"""Exact and approximate axiom checkers for stochastic choice rules.

Each checker measures the smallest epsilon at which a rule satisfies
the approximate form of an axiom on the given instance(s) and reports
a witness when the requested tolerance is exceeded.  Ratio conventions
for zero probabilities are fixed globally: 0/0 contributes 0 and
x/0 with x > 0 contributes +inf.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .menus import (
    ActionId,
    Menu,
    action_str,
    diagonal_action,
    equivalent,
    power,
    product,
)
from .rules import Rule
from .spaces import SCALAR, VECTOR, Outcome, SpaceMismatchError, outcomes_equal

NEUTRALITY = "neutrality"
DECOMPOSABILITY = "decomposability"
POSITIVITY = "positivity"
CONTINUITY = "continuity"
STRONG_NEUTRALITY = "strong_neutrality"

DEFAULT_TOL = 1e-9
DEFAULT_CONTINUITY_STEPS = (1e-2, 1e-4, 1e-6)


@dataclass(frozen=True)
class AxiomReport:
    """Result of one axiom check: the minimal epsilon achieved and, when
    the tolerance was exceeded, a witness describing where."""

    axiom: str
    satisfied_at_tol: bool
    min_epsilon: float
    witness: dict | None
    instances_checked: int = 1

    def to_json(self) -> dict:
        eps = "inf" if math.isinf(self.min_epsilon) else self.min_epsilon
        return {
            "axiom": self.axiom,
            "min_epsilon": eps,
            "satisfied_at_tol": self.satisfied_at_tol,
            "witness": self.witness,
            "instances_checked": self.instances_checked,
        }


def ratio_excess(p: float, q: float) -> float:
    """max(p/q, q/p) - 1 with the global zero conventions."""
    if p == 0.0 and q == 0.0:
        return 0.0
    if p == 0.0 or q == 0.0:
        return math.inf
    return max(p / q, q / p) - 1.0


def _report(axiom, tol, eps, witness, instances=1) -> AxiomReport:
    ok = eps <= tol
    return AxiomReport(axiom, ok, eps, None if ok else witness, instances)


def neutrality_epsilon(
    rule: Rule,
    menu: Menu,
    tol: float = DEFAULT_TOL,
    outcome_tol: float | None = None,
    menu_id: str | None = None,
) -> AxiomReport:
    """Worst probability ratio among equal-outcome action pairs.

    Equal outcomes are detected per space (exact for prize streams,
    componentwise tolerance otherwise).  min_epsilon 0 means the exact
    neutrality axiom holds on this menu.
    """
    dist = rule.choose(menu)
    eps = 0.0
    witness = None
    entries = menu.entries
    for i, (a, oa) in enumerate(entries):
        for b, ob in entries[i + 1 :]:
            if not outcomes_equal(oa, ob, outcome_tol):
                continue
            r = ratio_excess(dist[a], dist[b])
            if r > eps:
                eps = r
                witness = {
                    "menu_id": menu_id,
                    "pair": [action_str(a), action_str(b)],
                    "ratio_excess": None if math.isinf(r) else r,
                }
    return _report(NEUTRALITY, tol, eps, witness)


def decomposability_epsilon(
    rule: Rule,
    m1: Menu,
    m2: Menu,
    tol: float = DEFAULT_TOL,
    menu_id: str | None = None,
) -> AxiomReport:
    """Worst multiplicative gap between the product-menu distribution and
    the independent product of the component distributions."""
    if m1.space != m2.space:
        raise SpaceMismatchError()
    d1 = rule.choose(m1)
    d2 = rule.choose(m2)
    joint = rule.choose(product(m1, m2))
    eps = 0.0
    witness = None
    for a1 in m1.actions:
        for a2 in m2.actions:
            r = ratio_excess(joint[(a1, a2)], d1[a1] * d2[a2])
            if r > eps:
                eps = r
                witness = {
                    "menu_id": menu_id,
                    "pair": [action_str(a1), action_str(a2)],
                    "ratio_excess": None if math.isinf(r) else r,
                }
    return _report(DECOMPOSABILITY, tol, eps, witness)


def positivity_check(
    rule: Rule, menu: Menu, menu_id: str | None = None
) -> AxiomReport:
    """Satisfied iff every action has strictly positive probability."""
    dist = rule.choose(menu)
    for a in menu.actions:
        if dist[a] <= 0.0:
            witness = {"menu_id": menu_id, "action": action_str(a)}
            return AxiomReport(POSITIVITY, False, math.inf, witness)
    return AxiomReport(POSITIVITY, True, 0.0, None)


def continuity_probe(
    rule: Rule,
    menu: Menu,
    action: ActionId | None = None,
    steps: tuple[float, ...] = DEFAULT_CONTINUITY_STEPS,
    menu_id: str | None = None,
) -> AxiomReport:
    """Finite continuity probe: perturb one action's outcome by each step
    and watch the choice-probability gap.

    A probe can only falsify continuity: it flags a discontinuity when
    the gap fails to shrink (ratio > 0.5) while the steps shrank by at
    least 100x.  min_epsilon is the gap at the smallest step.
    """
    if menu.space.kind not in (SCALAR, VECTOR):
        raise SpaceMismatchError()
    if action is None:
        action = menu.actions[0]
    decreasing = all(a > b for a, b in zip(steps, steps[1:]))
    if not decreasing or steps[-1] < 1e-9:
        raise ValueError("steps must be strictly decreasing and >= 1e-9")
    base = rule.choose(menu)

    def gap(step: float) -> float:
        entries = []
        for a, o in menu.entries:
            if a == action:
                if menu.space.kind == SCALAR:
                    o = Outcome(menu.space, o.value + step)
                else:
                    o = Outcome(menu.space, tuple(t + step for t in o.value))
            entries.append((a, o))
        moved = rule.choose(Menu(menu.space, tuple(entries)))
        return max(abs(moved[a] - base[a]) for a in menu.actions)

    gaps = [gap(s) for s in steps]
    eps = gaps[-1]
    if gaps[0] > 0.0:
        shrink = gaps[-1] / gaps[0]
    else:
        shrink = math.inf if gaps[-1] > 0.0 else 0.0
    flagged = steps[0] / steps[-1] >= 100.0 and shrink > 0.5
    witness = {
        "menu_id": menu_id,
        "action": action_str(action),
        "steps": list(steps),
        "gaps": gaps,
    }
    return AxiomReport(CONTINUITY, not flagged, eps, witness if flagged else None)


def strong_neutrality_bound(eps_neut: float, eps_decomp: float) -> float:
    """1 + eps_sneut <= (1 + eps_neut)(1 + eps_decomp)^2."""
    return (1.0 + eps_neut) * (1.0 + eps_decomp) ** 2 - 1.0


def strong_neutrality_epsilon(
    rule: Rule,
    m1: Menu,
    m2: Menu,
    tol: float = DEFAULT_TOL,
    eps_neut: float | None = None,
    eps_decomp: float | None = None,
    menu_id: str | None = None,
) -> AxiomReport:
    """Worst probability ratio across two equivalent menus, matched by a
    relabeling bijection.

    When epsilon estimates for the rule are supplied, the report also
    fails if the measured value exceeds the derived bound
    (1 + eps_neut)(1 + eps_decomp)^2 - 1.
    """
    bijection = equivalent(m1, m2)
    if bijection is None:
        raise ValueError("menus are not equivalent up to relabeling")
    d1 = rule.choose(m1)
    d2 = rule.choose(m2)
    eps = 0.0
    worst = None
    for a, b in bijection.items():
        r = ratio_excess(d1[a], d2[b])
        if r > eps:
            eps = r
            worst = {
                "menu_id": menu_id,
                "pair": [action_str(a), action_str(b)],
                "ratio_excess": None if math.isinf(r) else r,
            }
    limit = tol
    if eps_neut is not None and eps_decomp is not None:
        bound = strong_neutrality_bound(eps_neut, eps_decomp)
        limit = max(tol, bound + tol)
        if worst is not None:
            worst["ratio_bound"] = bound
    return _report(STRONG_NEUTRALITY, limit, eps, worst)


def cross_menu_identity_gap(
    rule: Rule, menu: Menu, a: ActionId, a2: ActionId
) -> float:
    """Deviation from the identity p(a) * p0^n = p(a2) * p1^n with
    n = o(a) - o(a2), where (p0, p1) is the rule's distribution on the
    unit binary menu {b0: 0, b1: 1}.

    Outcomes must be integers and o(a) > o(a2).  The deviation is the
    absolute log ratio of the two products: for large n the raw products
    underflow to magnitudes where an absolute gap is vacuous.  Returns 0
    when both products vanish, +inf when exactly one does.
    """
    if menu.space.kind != SCALAR:
        raise SpaceMismatchError()
    oa = menu.outcome_of(a).value
    oa2 = menu.outcome_of(a2).value
    for v in (oa, oa2):
        if abs(v - round(v)) > 1e-9:
            raise ValueError("cross-menu identity requires integer outcomes")
    n = round(oa) - round(oa2)
    if n <= 0:
        raise ValueError("requires o(a) > o(a2)")
    unit = Menu(
        menu.space,
        (("b0", Outcome(menu.space, 0.0)), ("b1", Outcome(menu.space, 1.0))),
    )
    binary = rule.choose(unit)
    p0, p1 = binary["b0"], binary["b1"]
    dist = rule.choose(menu)
    pa, pa2 = dist[a], dist[a2]
    lhs_zero = pa == 0.0 or p0 == 0.0
    rhs_zero = pa2 == 0.0 or p1 == 0.0
    if lhs_zero or rhs_zero:
        return 0.0 if (lhs_zero and rhs_zero) else math.inf
    gap = (math.log(pa) + n * math.log(p0)) - (math.log(pa2) + n * math.log(p1))
    return abs(gap)


def cross_menu_identity_check(
    rule: Rule, menu: Menu, a: ActionId, a2: ActionId, tol: float
) -> bool:
    return cross_menu_identity_gap(rule, menu, a, a2) <= tol


def power_diagonal_neutrality_epsilon(
    rule: Rule, menu: Menu, a: ActionId, a2: ActionId, n: int
) -> float:
    """Per-coordinate neutrality epsilon implied by the n-fold power:
    the diagonal probability ratio to the power 1/n, minus 1.

    For a decomposable rule whose power menus stay approximately
    neutral with parameter eps, this is at most (1+eps)^(1/n) - 1.
    """
    dist = rule.choose(power(menu, n))
    pa = dist[diagonal_action(a, n)]
    pb = dist[diagonal_action(a2, n)]
    r = ratio_excess(pa, pb)
    if math.isinf(r):
        return math.inf
    return (1.0 + r) ** (1.0 / n) - 1.0


def effective_neutrality_epsilon(eps_neut: float, eps_decomp: float) -> float:
    """Reduced neutrality parameter min{eps_neut, 2 eps_d + eps_d^2}
    available to any approximately decomposable rule."""
    if eps_neut < 0 or eps_decomp < 0:
        raise ValueError("epsilons must be nonnegative")
    return min(eps_neut, 2.0 * eps_decomp + eps_decomp**2)


def merge_reports(reports: list[AxiomReport]) -> AxiomReport:
    """Corpus aggregation: epsilons merge by maximum (the axioms
    quantify over all menus), witnesses by lexicographic order."""
    if not reports:
        raise ValueError("no reports to merge")
    axiom = reports[0].axiom
    if any(r.axiom != axiom for r in reports):
        raise ValueError("cannot merge reports for different axioms")
    eps = max(r.min_epsilon for r in reports)
    ok = all(r.satisfied_at_tol for r in reports)
    witness = None
    if not ok:
        candidates = [r.witness for r in reports if r.witness is not None]
        witness = min(candidates, key=lambda w: sorted(map(str, w.items())))
    return AxiomReport(
        axiom, ok, eps, witness, sum(r.instances_checked for r in reports)
    )
