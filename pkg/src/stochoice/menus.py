"""Menus of labeled actions, the menu product, n-fold powers, and
equivalence up to relabeling.

A menu pairs each action id with an outcome from a single space.
The product menu pairs actions and composes outcomes; powers are
left-associated since composition need not be associative.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Union

from .spaces import (
    PRIZE_STREAM,
    Outcome,
    Space,
    SpaceMismatchError,
    compose,
    outcome_from_json,
    outcome_sort_key,
    outcome_to_json,
    outcomes_equal,
    canonical_value,
)

# an action id is an atomic label or an ordered pair of action ids
ActionId = Union[str, tuple]

_RESERVED = set("(),")


@lru_cache(maxsize=None)
def action_str(a: ActionId) -> str:
    """Injective serialization: atoms verbatim, pairs as "(left,right)"."""
    if isinstance(a, str):
        return a
    left, right = a
    return f"({action_str(left)},{action_str(right)})"


def action_from_str(s: str) -> ActionId:
    if not s.startswith("("):
        return s
    # split the top-level pair at the comma with balanced parentheses
    depth = 0
    for i, ch in enumerate(s):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "," and depth == 1:
            return (action_from_str(s[1:i]), action_from_str(s[i + 1 : -1]))
    raise ValueError(f"malformed action id: {s!r}")


def _check_atoms(a: ActionId) -> None:
    if isinstance(a, str):
        if _RESERVED & set(a):
            raise ValueError(f"atomic action label may not contain ( ) , : {a!r}")
        return
    left, right = a
    _check_atoms(left)
    _check_atoms(right)


@dataclass(frozen=True, slots=True)
class Menu:
    """A finite set of labeled actions with one outcome per action.

    Entry order is preserved so reports and bijections are deterministic.
    """

    space: Space
    entries: tuple[tuple[ActionId, Outcome], ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "entries", tuple((a, o) for a, o in self.entries))
        if not self.entries:
            raise ValueError("menu needs at least one action")
        seen = set()
        for a, o in self.entries:
            _check_atoms(a)
            if a in seen:
                raise ValueError(f"duplicate action id: {action_str(a)}")
            seen.add(a)
            if o.space != self.space:
                raise SpaceMismatchError()

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def actions(self) -> tuple[ActionId, ...]:
        return tuple(a for a, _ in self.entries)

    def outcome_of(self, a: ActionId) -> Outcome:
        for aid, o in self.entries:
            if aid == a:
                return o
        raise KeyError(action_str(a))

    def to_json(self) -> dict:
        return {
            "space": self.space.to_json(),
            "actions": [
                {"id": action_str(a), "outcome": outcome_to_json(o)}
                for a, o in self.entries
            ],
        }

    @staticmethod
    def from_json(data: dict) -> "Menu":
        space = Space.from_json(data["space"])
        entries = tuple(
            (action_from_str(item["id"]), outcome_from_json(space, item["outcome"]))
            for item in data["actions"]
        )
        return Menu(space, entries)


def menu_of(space: Space, assignments: dict) -> Menu:
    """Convenience constructor from {label: raw outcome payload}."""
    return Menu(space, tuple((a, Outcome(space, v)) for a, v in assignments.items()))


def scalar_menu(assignments: dict) -> Menu:
    return menu_of(Space.scalar(), assignments)


def _trusted_menu(space: Space, entries: tuple) -> Menu:
    # bypass __post_init__ for entries whose invariants hold by
    # construction; re-validating 10^6-action power menus dominates their
    # build time otherwise
    m = object.__new__(Menu)
    object.__setattr__(m, "space", space)
    object.__setattr__(m, "entries", entries)
    return m


def product(m1: Menu, m2: Menu) -> Menu:
    """Product menu: paired actions, composed outcomes.

    Actions are ordered pairs in lexicographic order of entry indices.
    """
    if m1.space != m2.space:
        raise SpaceMismatchError()
    # pairs of distinct ids are distinct and compose preserves the space,
    # so the result needs no re-validation
    entries = tuple(
        ((a1, a2), compose(o1, o2)) for a1, o1 in m1.entries for a2, o2 in m2.entries
    )
    return _trusted_menu(m1.space, entries)


def power(m: Menu, n: int) -> Menu:
    """Left-associated n-fold product (((m x m) x m) ...); n must be >= 1.

    Left association is the documented convention because composition
    need not be associative.
    """
    if n < 1:
        raise ValueError("menu power requires n >= 1")
    return reduce(lambda acc, _: product(acc, m), range(n - 1), m)


def diagonal_action(a: ActionId, n: int) -> ActionId:
    """The id of (a, ..., a) in power(m, n), nested the same way."""
    return reduce(lambda acc, _: (acc, a), range(n - 1), a)


def default_equivalence_tol(space: Space) -> float:
    # discrete structures admit exact comparison; composed real outcomes
    # accumulate floating error
    return 0.0 if space.kind == PRIZE_STREAM else 1e-9


def equivalent(m1: Menu, m2: Menu, tol: float | None = None) -> dict | None:
    """A bijection of actions matching outcomes within tol, or None.

    Found greedily by sorting both outcome multisets; equal-outcome
    groups are interchangeable so sorted order suffices.
    """
    if m1.space != m2.space or len(m1) != len(m2):
        return None
    if tol is None:
        tol = default_equivalence_tol(m1.space)
    key = lambda entry: outcome_sort_key(entry[1])
    left = sorted(m1.entries, key=key)
    right = sorted(m2.entries, key=key)
    mapping = {}
    for (a, oa), (b, ob) in zip(left, right):
        if not outcomes_equal(oa, ob, tol):
            return None
        mapping[a] = b
    return mapping


def canonical_key(menu: Menu) -> str:
    """Order-insensitive canonical encoding (outcomes at 12 significant
    digits), used for tabular lookup and deterministic shock seeds."""
    body = sorted(f"{action_str(a)}={canonical_value(o)}" for a, o in menu.entries)
    space = menu.space
    head = f"{space.kind}/{space.d}/{space.moment_order}/{','.join(space.alphabet)}"
    return head + "#" + ";".join(body)


def menu_hash(menu: Menu) -> int:
    """64-bit digest of the canonical encoding, streamed to keep large
    power menus from materializing the full key string."""
    space = menu.space
    h = hashlib.blake2b(digest_size=8)
    h.update(
        f"{space.kind}/{space.d}/{space.moment_order}/{','.join(space.alphabet)}#".encode()
    )
    for part in sorted(f"{action_str(a)}={canonical_value(o)}" for a, o in menu.entries):
        h.update(part.encode())
        h.update(b";")
    return int.from_bytes(h.digest(), "big")
