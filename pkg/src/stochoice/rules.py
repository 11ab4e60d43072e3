"""Evaluable stochastic choice rules.

The multinomial logit family (finite beta plus the argmax/argmin
limits), logit over a general additive utility, independent additive
random utility (IARU) rules evaluated by quadrature, the uniform rule,
and two testing harnesses: tabular rules and deterministically
perturbed rules.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping

import numpy as np
from scipy.special import log_ndtr

from .menus import ActionId, Menu, action_str, canonical_key, menu_hash
from .quadrature import adaptive_simpson
from .spaces import (
    SCALAR,
    Outcome,
    SpaceMismatchError,
    Utility,
    evaluate,
)

# renormalization guard: a larger residual signals quadrature failure
NORMALIZATION_GUARD = 1e-8
ARGMAX_TIE_TOL = 1e-12


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class ChoiceDistribution:
    """Probabilities over a menu's actions; nonnegative, summing to 1."""

    probs: Mapping[ActionId, float]

    def __post_init__(self) -> None:
        if any(p < 0 for p in self.probs.values()):
            raise ValueError("negative choice probability")
        total = math.fsum(self.probs.values())
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"choice probabilities sum to {total!r}, not 1")

    def __getitem__(self, a: ActionId) -> float:
        return self.probs[a]

    def items(self):
        return self.probs.items()

    def to_json(self) -> dict:
        return {action_str(a): p for a, p in self.probs.items()}


def _softmax(utilities: np.ndarray) -> np.ndarray:
    shifted = utilities - np.max(utilities)
    e = np.exp(shifted)
    return e / np.sum(e)


def _scalar_values(menu: Menu) -> np.ndarray:
    if menu.space.kind != SCALAR:
        raise SpaceMismatchError()
    return np.array([o.value for _, o in menu.entries], dtype=float)


class Rule:
    """Base class; a rule maps menus to choice distributions."""

    def choose(self, menu: Menu) -> ChoiceDistribution:
        raise NotImplementedError


@dataclass(frozen=True)
class MNL(Rule):
    """Multinomial logit with parameter beta on scalar outcomes.

    Probabilities are proportional to exp(beta * outcome), computed with
    max subtraction.  beta = +/-inf yields the uniform distribution over
    the highest/lowest-outcome actions.
    """

    beta: float

    def choose(self, menu: Menu) -> ChoiceDistribution:
        vals = _scalar_values(menu)
        if math.isinf(self.beta):
            target = vals.max() if self.beta > 0 else vals.min()
            if all(float(v).is_integer() for v in vals):
                hit = vals == target
            else:
                hit = np.abs(vals - target) <= ARGMAX_TIE_TOL * max(1.0, abs(target))
            p = hit / hit.sum()
        else:
            p = _softmax(self.beta * vals)
        return ChoiceDistribution(dict(zip(menu.actions, p.tolist())))


@dataclass(frozen=True)
class GeneralMNL(Rule):
    """Logit with respect to an additive utility on any outcome space."""

    utility: Utility

    def choose(self, menu: Menu) -> ChoiceDistribution:
        if menu.space != self.utility.space:
            raise SpaceMismatchError()
        us = np.array([evaluate(self.utility, o) for _, o in menu.entries])
        p = _softmax(us)
        return ChoiceDistribution(dict(zip(menu.actions, p.tolist())))


@dataclass(frozen=True)
class Uniform(Rule):
    def choose(self, menu: Menu) -> ChoiceDistribution:
        p = 1.0 / len(menu)
        return ChoiceDistribution({a: p for a in menu.actions})


@dataclass(frozen=True)
class GaussianShock:
    """Centered Gaussian shock with standard deviation sigma."""

    sigma: float

    def __post_init__(self) -> None:
        if self.sigma <= 0:
            raise ValueError("shock scale must be positive")

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        z = x / self.sigma
        return -0.5 * z * z - math.log(self.sigma * math.sqrt(2.0 * math.pi))

    def log_cdf(self, x: np.ndarray) -> np.ndarray:
        return log_ndtr(x / self.sigma)

    def window(self) -> tuple[float, float]:
        # Gaussian tail mass beyond 12 sigma is far below 1e-30
        return (-12.0 * self.sigma, 12.0 * self.sigma)


@dataclass(frozen=True)
class GumbelShock:
    """Gumbel shock with cdf F(x) = exp(-exp(-beta * x))."""

    beta: float

    def __post_init__(self) -> None:
        if self.beta <= 0:
            raise ValueError("shock scale must be positive")

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        bx = self.beta * x
        return math.log(self.beta) - bx - np.exp(-bx)

    def log_cdf(self, x: np.ndarray) -> np.ndarray:
        return -np.exp(-self.beta * x)

    def window(self) -> tuple[float, float]:
        # analytic 1e-30 quantiles: the right tail decays only like
        # exp(-beta x), so a fixed multiple of the scale would truncate
        # too much mass for the normalization guard
        tail = 1e-30
        lo = -math.log(math.log(1.0 / tail)) / self.beta
        hi = -math.log(tail) / self.beta
        return (lo, hi)


ShockSpec = GaussianShock | GumbelShock


def _group_values(vals: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct outcome values with counts, grouping within 1e-12 relative.

    Equal-outcome actions share one integral, which keeps IARU exactly
    neutral and makes large power menus tractable.
    """
    order = np.argsort(vals, kind="stable")
    reps: list[float] = []
    counts: list[int] = []
    group_of = np.empty(len(vals), dtype=int)
    for idx in order:
        v = float(vals[idx])
        if reps and abs(v - reps[-1]) <= 1e-12 * max(1.0, abs(v), abs(reps[-1])):
            counts[-1] += 1
        else:
            reps.append(v)
            counts.append(1)
        group_of[idx] = len(reps) - 1
    return np.array(reps), np.array(counts), group_of


@dataclass(frozen=True)
class IARU(Rule):
    """Independent additive random utility rule on scalar outcomes.

    P[a] = P[o(a) + eps_a = max_b o(b) + eps_b] with iid shocks, i.e.
    the integral of pdf(x) * prod_{b != a} cdf(o(a) - o(b) + x) over x,
    evaluated by adaptive Simpson quadrature and renormalized.
    """

    shock: ShockSpec
    quad_tol: float = 1e-10

    def choose(self, menu: Menu) -> ChoiceDistribution:
        vals = _scalar_values(menu)
        reps, counts, group_of = _group_values(vals)
        lo, hi = self.shock.window()
        group_p = np.empty(len(reps))
        for g, v in enumerate(reps):
            exponents = counts.copy()
            exponents[g] -= 1
            deltas = v - reps

            def integrand(x: np.ndarray) -> np.ndarray:
                acc = self.shock.log_pdf(x)
                for e, dv in zip(exponents, deltas):
                    if e:
                        acc = acc + e * self.shock.log_cdf(dv + x)
                return np.exp(acc)

            group_p[g] = adaptive_simpson(integrand, lo, hi, tol=self.quad_tol)
        total = float(np.dot(counts, group_p))
        if abs(total - 1.0) > NORMALIZATION_GUARD:
            raise QuadratureError(
                f"IARU probabilities sum to {total!r} before renormalization"
            )
        probs = {
            a: float(group_p[group_of[i]] / total)
            for i, a in enumerate(menu.actions)
        }
        return ChoiceDistribution(probs)


def probit(sigma: float = 1.0, quad_tol: float = 1e-10) -> IARU:
    return IARU(GaussianShock(sigma), quad_tol)


@dataclass(frozen=True)
class Tabular(Rule):
    """Testing harness: explicit distributions for registered menus,
    delegation to a fallback rule elsewhere.

    Lookup is by canonical menu key (entry-order insensitive, outcomes
    rounded to 12 significant digits)."""

    table: Mapping[str, Mapping[str, float]]
    fallback: Rule = field(default_factory=Uniform)

    @staticmethod
    def from_entries(entries, fallback: Rule | None = None) -> "Tabular":
        table = {}
        for menu, probs in entries:
            named = {action_str(a): float(p) for a, p in probs.items()}
            if set(named) != {action_str(a) for a in menu.actions}:
                raise ValueError("tabular distribution must cover the menu's actions")
            table[canonical_key(menu)] = named
        return Tabular(table, fallback if fallback is not None else Uniform())

    def choose(self, menu: Menu) -> ChoiceDistribution:
        row = self.table.get(canonical_key(menu))
        if row is None:
            return self.fallback.choose(menu)
        return ChoiceDistribution({a: row[action_str(a)] for a in menu.actions})


_M64 = (1 << 64) - 1


def _splitmix64(z: int) -> int:
    z = (z + 0x9E3779B97F4A7C15) & _M64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _M64
    return (z ^ (z >> 31)) & _M64


@lru_cache(maxsize=None)
def _action_hash(a: ActionId) -> int:
    digest = hashlib.blake2b(action_str(a).encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big")


@dataclass(frozen=True)
class Perturbed(Rule):
    """The base rule with a deterministic per-(menu, action) utility
    shock s(a) in [-delta, delta] applied inside the softmax.

    Shocks are a pure function of (seed, canonical menu hash, action id),
    so perturbed rules are reproducible approximately-decomposable test
    subjects without stored state.
    """

    base: Rule
    delta: float
    seed: int

    def __post_init__(self) -> None:
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")

    def shock(self, menu: Menu, a: ActionId) -> float:
        return self._shock(menu_hash(menu), a)

    def _shock(self, mhash: int, a: ActionId) -> float:
        z = _splitmix64(_splitmix64((self.seed & _M64) ^ mhash) ^ _action_hash(a))
        return self.delta * (2.0 * (z / 2.0**64) - 1.0)

    def choose(self, menu: Menu) -> ChoiceDistribution:
        base = self.base.choose(menu)
        mhash = menu_hash(menu)
        weighted = {
            a: p * math.exp(self._shock(mhash, a)) if p > 0 else 0.0
            for a, p in base.items()
        }
        total = math.fsum(weighted.values())
        return ChoiceDistribution({a: w / total for a, w in weighted.items()})


@dataclass(frozen=True)
class OutcomeScaled(Rule):
    """Adapter multiplying scalar outcomes by a factor before delegating.

    With factor 1/k this realizes the denominator-clearing rule family
    used to reduce rational-outcome menus to integer ones.
    """

    base: Rule
    factor: float

    def choose(self, menu: Menu) -> ChoiceDistribution:
        scaled = Menu(
            menu.space,
            tuple(
                (a, Outcome(menu.space, o.value * self.factor))
                for a, o in menu.entries
            ),
        )
        dist = self.base.choose(scaled)
        return ChoiceDistribution({a: dist[a] for a in menu.actions})


def choose(rule: Rule, menu: Menu) -> ChoiceDistribution:
    return rule.choose(menu)


def iaru_equals_mnl_probe(
    beta: float, menus: list[Menu], tol: float
) -> tuple[bool, float]:
    """Max probability deviation between IARU(Gumbel(beta)) and MNL(beta)."""
    iaru = IARU(GumbelShock(beta))
    mnl = MNL(beta)
    worst = 0.0
    for menu in menus:
        di = iaru.choose(menu)
        dm = mnl.choose(menu)
        for a in menu.actions:
            worst = max(worst, abs(di[a] - dm[a]))
    return worst <= tol, worst


def rule_to_json(rule: Rule) -> dict:
    if isinstance(rule, MNL):
        beta = rule.beta
        if math.isinf(beta):
            return {"type": "mnl", "beta": "+inf" if beta > 0 else "-inf"}
        return {"type": "mnl", "beta": beta}
    if isinstance(rule, GeneralMNL):
        return {"type": "general_mnl", "utility": rule.utility.to_json()}
    if isinstance(rule, IARU):
        if isinstance(rule.shock, GaussianShock):
            shock = {"kind": "gaussian", "param": rule.shock.sigma}
        else:
            shock = {"kind": "gumbel", "param": rule.shock.beta}
        return {"type": "iaru", "shock": shock}
    if isinstance(rule, Uniform):
        return {"type": "uniform"}
    if isinstance(rule, Perturbed):
        return {
            "type": "perturbed",
            "base": rule_to_json(rule.base),
            "delta": rule.delta,
            "seed": rule.seed,
        }
    raise ValueError(f"rule has no JSON encoding: {type(rule).__name__}")


def rule_from_json(data: dict) -> Rule:
    kind = data["type"]
    if kind == "mnl":
        beta = data["beta"]
        if beta == "+inf":
            return MNL(math.inf)
        if beta == "-inf":
            return MNL(-math.inf)
        return MNL(float(beta))
    if kind == "general_mnl":
        return GeneralMNL(Utility.from_json(data["utility"]))
    if kind == "iaru":
        shock = data["shock"]
        if shock["kind"] == "gaussian":
            return IARU(GaussianShock(float(shock["param"])))
        if shock["kind"] == "gumbel":
            return IARU(GumbelShock(float(shock["param"])))
        raise ValueError(f"unknown shock kind: {shock['kind']!r}")
    if kind == "uniform":
        return Uniform()
    if kind == "perturbed":
        return Perturbed(rule_from_json(data["base"]), float(data["delta"]), int(data["seed"]))
    raise ValueError(f"unknown rule type: {kind!r}")
