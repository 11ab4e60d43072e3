"""Outcome spaces and their additive utility functionals.

Six concrete spaces share one interface: a binary composition for
combining outcomes of unrelated actions, an identity element, a
compensation construction that bridges any two outcomes where the
space permits it, and utility functionals that are additive over
composition (``u(x*y) = u(x) + u(y)``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

SCALAR = "real_scalar"
VECTOR = "real_vector"
MEAN_STDDEV = "mean_stddev"
DISTRIBUTION = "discrete_distribution"
PRIZE_STREAM = "prize_stream"
MATRIX = "matrix"

KINDS = (SCALAR, VECTOR, MEAN_STDDEV, DISTRIBUTION, PRIZE_STREAM, MATRIX)

# support points collide when |p - q| <= MERGE_RTOL * max(1, |p|, |q|)
MERGE_RTOL = 1e-12
PROB_SUM_TOL = 1e-12
MATRIX_COND_LIMIT = 1e12

# default outcome-equality tolerance; prize streams compare exactly
EQUALITY_TOL = 1e-9


class SpaceMismatchError(ValueError):
    def __init__(self) -> None:
        super().__init__("incompatible outcome spaces")


class NoCompensationError(ValueError):
    def __init__(self) -> None:
        super().__init__("no compensating outcome")


@dataclass(frozen=True, slots=True)
class Space:
    """Descriptor of an outcome space: a kind tag plus shape parameters.

    ``d`` is the dimension for vector and matrix spaces, ``moment_order``
    the number of cumulants a distribution-space utility may weight, and
    ``alphabet`` the prize labels of a stream space.
    """

    kind: str
    d: int = 0
    moment_order: int = 0
    alphabet: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown outcome space kind: {self.kind!r}")
        if self.kind in (VECTOR, MATRIX) and self.d < 1:
            raise ValueError("dimension d must be >= 1")
        if self.kind == DISTRIBUTION and self.moment_order < 0:
            raise ValueError("moment_order must be >= 0")
        if self.kind == PRIZE_STREAM:
            if not self.alphabet:
                raise ValueError("prize alphabet must be nonempty")
            if len(set(self.alphabet)) != len(self.alphabet):
                raise ValueError("prize alphabet has duplicate labels")

    @staticmethod
    def scalar() -> "Space":
        return Space(SCALAR)

    @staticmethod
    def vector(d: int) -> "Space":
        return Space(VECTOR, d=d)

    @staticmethod
    def mean_stddev() -> "Space":
        return Space(MEAN_STDDEV)

    @staticmethod
    def distribution(moment_order: int) -> "Space":
        return Space(DISTRIBUTION, moment_order=moment_order)

    @staticmethod
    def prizes(alphabet) -> "Space":
        return Space(PRIZE_STREAM, alphabet=tuple(alphabet))

    @staticmethod
    def matrix(d: int) -> "Space":
        return Space(MATRIX, d=d)

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind in (VECTOR, MATRIX):
            out["d"] = self.d
        elif self.kind == DISTRIBUTION:
            out["moment_order"] = self.moment_order
        elif self.kind == PRIZE_STREAM:
            out["alphabet"] = list(self.alphabet)
        return out

    @staticmethod
    def from_json(data: dict) -> "Space":
        kind = data["kind"]
        if kind in (VECTOR, MATRIX):
            return Space(kind, d=int(data["d"]))
        if kind == DISTRIBUTION:
            return Space(kind, moment_order=int(data["moment_order"]))
        if kind == PRIZE_STREAM:
            return Space(kind, alphabet=tuple(data["alphabet"]))
        return Space(kind)


def _points_collide(p: float, q: float) -> bool:
    return abs(p - q) <= MERGE_RTOL * max(1.0, abs(p), abs(q))


@dataclass(frozen=True, slots=True)
class Outcome:
    """A value in one of the six outcome spaces.

    Payload by kind: float | tuple of floats | (m, sigma) |
    tuple of (support point, probability) sorted by point |
    tuple of prize labels | d x d nested tuple.  Values are normalized
    and validated at construction and immutable afterwards.
    """

    space: Space
    value: object

    def __post_init__(self) -> None:
        kind = self.space.kind
        v = self.value
        if kind == SCALAR:
            object.__setattr__(self, "value", float(v))
        elif kind == VECTOR:
            vec = tuple(float(t) for t in v)
            if len(vec) != self.space.d:
                raise ValueError("vector outcome has wrong length")
            object.__setattr__(self, "value", vec)
        elif kind == MEAN_STDDEV:
            m, sigma = v
            sigma = float(sigma)
            if sigma < 0:
                raise ValueError("standard deviation must be nonnegative")
            object.__setattr__(self, "value", (float(m), sigma))
        elif kind == DISTRIBUTION:
            pairs = sorted((float(p), float(w)) for p, w in v)
            if not pairs:
                raise ValueError("distribution needs at least one support point")
            for (p, w), (q, _) in zip(pairs, pairs[1:]):
                if _points_collide(p, q):
                    raise ValueError("distribution support points must be distinct")
            if any(w <= 0 for _, w in pairs):
                raise ValueError("distribution probabilities must be positive")
            total = math.fsum(w for _, w in pairs)
            if abs(total - 1.0) > PROB_SUM_TOL:
                raise ValueError("distribution probabilities must sum to 1")
            object.__setattr__(self, "value", tuple(pairs))
        elif kind == PRIZE_STREAM:
            seq = tuple(v)
            bad = [p for p in seq if p not in self.space.alphabet]
            if bad:
                raise ValueError(f"prizes outside alphabet: {bad}")
            object.__setattr__(self, "value", seq)
        elif kind == MATRIX:
            d = self.space.d
            rows = tuple(tuple(float(t) for t in row) for row in v)
            if len(rows) != d or any(len(r) != d for r in rows):
                raise ValueError("matrix outcome has wrong shape")
            sign, _ = np.linalg.slogdet(np.array(rows))
            if sign == 0.0:
                raise ValueError("matrix outcome must be invertible")
            object.__setattr__(self, "value", rows)


def scalar(x: float) -> Outcome:
    return Outcome(Space.scalar(), x)


def point_mass(space: Space, at: float = 0.0) -> Outcome:
    return Outcome(space, ((at, 1.0),))


def compose(x: Outcome, y: Outcome) -> Outcome:
    """Combine outcomes of unrelated actions: x * y.

    Componentwise sum for scalars and vectors, independent-sum of
    (mean, stddev) pairs, convolution for distributions, concatenation
    for prize streams, and the matrix product for matrices.  The last
    two are order-sensitive.
    """
    if x.space != y.space:
        raise SpaceMismatchError()
    kind = x.space.kind
    if kind == SCALAR:
        return Outcome(x.space, x.value + y.value)
    if kind == VECTOR:
        return Outcome(x.space, tuple(a + b for a, b in zip(x.value, y.value)))
    if kind == MEAN_STDDEV:
        (m1, s1), (m2, s2) = x.value, y.value
        return Outcome(x.space, (m1 + m2, math.hypot(s1, s2)))
    if kind == DISTRIBUTION:
        return Outcome(x.space, _convolve(x.value, y.value))
    if kind == PRIZE_STREAM:
        return Outcome(x.space, x.value + y.value)
    # matrix product, order preserved
    prod = np.array(x.value) @ np.array(y.value)
    return Outcome(x.space, tuple(map(tuple, prod)))


def _convolve(xs, ys):
    """All pairwise sums with multiplied probabilities, colliding points merged."""
    sums = sorted((p + q, wp * wq) for p, wp in xs for q, wq in ys)
    merged: list[list[float]] = []
    for point, w in sums:
        if merged and _points_collide(merged[-1][0], point):
            merged[-1][1] += w
        else:
            merged.append([point, w])
    return tuple((p, w) for p, w in merged)


def identity(space: Space) -> Outcome:
    """The irrelevant outcome e with e*x = x*e = x."""
    kind = space.kind
    if kind == SCALAR:
        return Outcome(space, 0.0)
    if kind == VECTOR:
        return Outcome(space, (0.0,) * space.d)
    if kind == MEAN_STDDEV:
        return Outcome(space, (0.0, 0.0))
    if kind == DISTRIBUTION:
        return point_mass(space)
    if kind == PRIZE_STREAM:
        return Outcome(space, ())
    return Outcome(space, tuple(map(tuple, np.eye(space.d))))


Side = Literal["left", "right"]


def compensate(x: Outcome, x2: Outcome) -> tuple[Side, Outcome]:
    """Find s with x2 = s*x (left) or s' with x = s'*x2 (right).

    Group-like spaces always succeed on the left.  Mean-stddev pairs
    pick the side with the larger stddev; prize streams succeed only
    when one stream is a suffix of the other; distributions succeed
    only when an exact finite deconvolution exists.
    """
    if x.space != x2.space:
        raise SpaceMismatchError()
    kind = x.space.kind
    if kind == SCALAR:
        return "left", Outcome(x.space, x2.value - x.value)
    if kind == VECTOR:
        return "left", Outcome(x.space, tuple(b - a for a, b in zip(x.value, x2.value)))
    if kind == MEAN_STDDEV:
        (m, s), (m2, s2) = x.value, x2.value
        if s2 >= s:
            return "left", Outcome(x.space, (m2 - m, math.sqrt((s2 - s) * (s2 + s))))
        return "right", Outcome(x.space, (m - m2, math.sqrt((s - s2) * (s + s2))))
    if kind == DISTRIBUTION:
        left = _deconvolve(x2.value, x.value)
        if left is not None:
            return "left", Outcome(x.space, left)
        right = _deconvolve(x.value, x2.value)
        if right is not None:
            return "right", Outcome(x.space, right)
        raise NoCompensationError()
    if kind == PRIZE_STREAM:
        n, n2 = len(x.value), len(x2.value)
        if n <= n2 and x2.value[n2 - n:] == x.value:
            return "left", Outcome(x.space, x2.value[: n2 - n])
        if n2 <= n and x.value[n - n2:] == x2.value:
            return "right", Outcome(x.space, x.value[: n - n2])
        raise NoCompensationError()
    mat = np.array(x.value)
    if np.linalg.cond(mat) > MATRIX_COND_LIMIT:
        raise ValueError("matrix too ill-conditioned to invert (cond > 1e12)")
    s = np.array(x2.value) @ np.linalg.inv(mat)
    return "left", Outcome(x.space, tuple(map(tuple, s)))


def _deconvolve(target, known):
    """Solve target = s (*) known for finite distributions, or None.

    Polynomial-long-division over the support: the lowest remaining
    point of the residual must come from pairing the lowest point of
    ``known`` with a new point of s.
    """
    known = sorted(known)
    k0, w0 = known[0]
    residual = {p: w for p, w in target}
    s_pairs: list[tuple[float, float]] = []
    for _ in range(len(target)):
        if not residual:
            break
        u = min(residual)
        w = residual[u] / w0
        if w <= 0:
            return None
        c = u - k0
        s_pairs.append((c, w))
        for p, wp in known:
            shifted = c + p
            hit = None
            for q in residual:
                if _points_collide(q, shifted):
                    hit = q
                    break
            if hit is None:
                return None
            residual[hit] -= w * wp
            if abs(residual[hit]) <= MERGE_RTOL * max(1.0, w * wp):
                del residual[hit]
            elif residual[hit] < 0:
                return None
    if residual:
        return None
    total = math.fsum(w for _, w in s_pairs)
    if abs(total - 1.0) > 1e-9:
        return None
    # absorb residual rounding so the result validates as a distribution
    return tuple((p, w / total) for p, w in s_pairs)


@dataclass(frozen=True, slots=True)
class Utility:
    """An additive-over-composition utility functional.

    One functional form per space: beta*x, w.x, gamma1*m + gamma2*sigma^2,
    sum of gamma_l * kappa_l (cumulants), per-prize values summed over a
    stream, beta * ln|det|.  ``coeffs`` are aligned with the space: the
    single beta, the weight vector, (gamma1, gamma2), the cumulant
    weights, the prize values in alphabet order, or the log-det beta.
    """

    space: Space
    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        n = len(self.coeffs)
        kind = self.space.kind
        expected = {
            SCALAR: 1,
            VECTOR: self.space.d,
            MEAN_STDDEV: 2,
            DISTRIBUTION: self.space.moment_order,
            PRIZE_STREAM: len(self.space.alphabet),
            MATRIX: 1,
        }[kind]
        if n != expected:
            raise ValueError(f"{kind} utility needs {expected} coefficients, got {n}")

    @staticmethod
    def scalar_beta(beta: float) -> "Utility":
        return Utility(Space.scalar(), (beta,))

    @staticmethod
    def linear(space: Space, weights) -> "Utility":
        return Utility(space, tuple(weights))

    @staticmethod
    def mean_variance(gamma1: float, gamma2: float) -> "Utility":
        return Utility(Space.mean_stddev(), (gamma1, gamma2))

    @staticmethod
    def cumulant(space: Space, gammas) -> "Utility":
        return Utility(space, tuple(gammas))

    @staticmethod
    def prize_values(space: Space, values: dict) -> "Utility":
        return Utility(space, tuple(values[p] for p in space.alphabet))

    @staticmethod
    def log_det(d: int, beta: float) -> "Utility":
        return Utility(Space.matrix(d), (beta,))

    def prize_value_map(self) -> dict:
        return dict(zip(self.space.alphabet, self.coeffs))

    def to_json(self) -> dict:
        out: dict = {"space": self.space.to_json()}
        kind = self.space.kind
        if kind in (SCALAR, MATRIX):
            out["beta"] = self.coeffs[0]
        elif kind == VECTOR:
            out["weights"] = list(self.coeffs)
        elif kind == MEAN_STDDEV:
            out["gamma1"], out["gamma2"] = self.coeffs
        elif kind == DISTRIBUTION:
            out["gammas"] = list(self.coeffs)
        else:
            out["weights"] = self.prize_value_map()
        return out

    @staticmethod
    def from_json(data: dict) -> "Utility":
        space = Space.from_json(data["space"])
        kind = space.kind
        if kind in (SCALAR, MATRIX):
            return Utility(space, (data["beta"],))
        if kind == VECTOR:
            return Utility(space, tuple(data["weights"]))
        if kind == MEAN_STDDEV:
            return Utility(space, (data["gamma1"], data["gamma2"]))
        if kind == DISTRIBUTION:
            return Utility(space, tuple(data["gammas"]))
        return Utility.prize_values(space, data["weights"])


def evaluate(u: Utility, x: Outcome) -> float:
    """Utility of an outcome; additive over compose by construction."""
    if u.space != x.space:
        raise SpaceMismatchError()
    kind = x.space.kind
    if kind == SCALAR:
        return u.coeffs[0] * x.value
    if kind == VECTOR:
        return math.fsum(w * t for w, t in zip(u.coeffs, x.value))
    if kind == MEAN_STDDEV:
        m, s = x.value
        return u.coeffs[0] * m + u.coeffs[1] * s * s
    if kind == DISTRIBUTION:
        kappas = cumulants(x, x.space.moment_order)
        return math.fsum(g * k for g, k in zip(u.coeffs, kappas))
    if kind == PRIZE_STREAM:
        values = u.prize_value_map()
        return math.fsum(values[p] for p in x.value)
    _, logdet = np.linalg.slogdet(np.array(x.value))
    return u.coeffs[0] * float(logdet)


def cumulants(x: Outcome, n: int) -> tuple[float, ...]:
    """First n cumulants of a finite-support distribution.

    Raw moments are exact sums over the support; cumulants follow from
    the moment-to-cumulant recursion
    kappa_n = m_n - sum_{k<n} C(n-1, k-1) kappa_k m_{n-k},
    which is stable for finite support (no numerical differentiation
    of the log characteristic function).  kappa_1 is the mean and
    kappa_2 the variance.
    """
    if x.space.kind != DISTRIBUTION:
        raise ValueError("cumulants are defined for distribution outcomes")
    if n < 0:
        raise ValueError("cumulant order must be nonnegative")
    moments = [
        math.fsum(w * p**k for p, w in x.value) for k in range(n + 1)
    ]
    kappas: list[float] = []
    for order in range(1, n + 1):
        acc = moments[order]
        for k in range(1, order):
            acc -= math.comb(order - 1, k - 1) * kappas[k - 1] * moments[order - k]
        kappas.append(acc)
    return tuple(kappas)


def outcomes_equal(x: Outcome, y: Outcome, tol: float | None = None) -> bool:
    """Per-component equality at tolerance; prize streams compare exactly."""
    if x.space != y.space:
        return False
    kind = x.space.kind
    if kind == PRIZE_STREAM:
        return x.value == y.value
    if tol is None:
        tol = EQUALITY_TOL
    if kind == SCALAR:
        return abs(x.value - y.value) <= tol
    if kind in (VECTOR, MEAN_STDDEV):
        return all(abs(a - b) <= tol for a, b in zip(x.value, y.value))
    if kind == DISTRIBUTION:
        if len(x.value) != len(y.value):
            return False
        return all(
            abs(p - q) <= tol and abs(wp - wq) <= tol
            for (p, wp), (q, wq) in zip(x.value, y.value)
        )
    return all(
        abs(a - b) <= tol for ra, rb in zip(x.value, y.value) for a, b in zip(ra, rb)
    )


def outcome_sort_key(x: Outcome):
    """Deterministic ordering key used for greedy multiset matching."""
    kind = x.space.kind
    if kind == SCALAR:
        return (x.value,)
    if kind in (VECTOR, MEAN_STDDEV, PRIZE_STREAM):
        return tuple(x.value)
    if kind == DISTRIBUTION:
        return tuple(t for pair in x.value for t in pair)
    return tuple(t for row in x.value for t in row)


def outcome_to_json(x: Outcome):
    kind = x.space.kind
    if kind == SCALAR:
        return x.value
    if kind in (VECTOR, PRIZE_STREAM):
        return list(x.value)
    if kind == MEAN_STDDEV:
        return {"m": x.value[0], "sigma": x.value[1]}
    if kind == DISTRIBUTION:
        return {
            "support": [p for p, _ in x.value],
            "probs": [w for _, w in x.value],
        }
    return [list(row) for row in x.value]


def outcome_from_json(space: Space, data) -> Outcome:
    kind = space.kind
    if kind == MEAN_STDDEV:
        return Outcome(space, (data["m"], data["sigma"]))
    if kind == DISTRIBUTION:
        return Outcome(space, tuple(zip(data["support"], data["probs"])))
    return Outcome(space, data)


def canonical_value(x: Outcome) -> str:
    """Compact encoding with floats at 12 significant digits, for hashing."""
    kind = x.space.kind
    if kind == SCALAR:
        return f"{x.value:.12g}"
    if kind == VECTOR:
        return ",".join(f"{t:.12g}" for t in x.value)
    if kind == MEAN_STDDEV:
        return f"{x.value[0]:.12g};{x.value[1]:.12g}"
    if kind == DISTRIBUTION:
        return "|".join(f"{p:.12g}:{w:.12g}" for p, w in x.value)
    if kind == PRIZE_STREAM:
        return "|".join(x.value)
    return ";".join(",".join(f"{t:.12g}" for t in row) for row in x.value)
