"""Random local linear hash functions and their CNF encodings.

A row ``x_{i1} xor ... xor x_{ik} = b`` is encoded directly as the
``2 ** (k - 1)`` clauses that forbid each wrong-parity assignment of its
support, so encodings never introduce auxiliary variables.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Final, Protocol, Sequence, runtime_checkable

import numpy as np

from local_hash_counter.cnf import Clause, Cnf, Literal

_LOG = logging.getLogger(__name__)

XOR_COMMENT_TAG: Final[str] = "xor"
FAMILY_BERNOULLI: Final[str] = "bernoulli"
FAMILY_FIXED_K: Final[str] = "fixed_k"


@dataclass(frozen=True)
class XorConstraint:
    """A parity constraint over a subset of the variables.

    The empty support has parity 0, so ``XorConstraint((), 1)`` is unsatisfiable
    and ``XorConstraint((), 0)`` always holds.

    :param support: Sorted, distinct 1-based variable indices.
    :type support: tuple[int, ...]
    :param target: Required parity, 0 or 1.
    :type target: int
    """

    support: tuple[int, ...]
    target: int = 0

    def __post_init__(self) -> None:
        if self.target not in (0, 1):
            raise ValueError(f"Target bit must be 0 or 1, got {self.target}")
        normalized = tuple(sorted(set(int(i) for i in self.support)))
        if normalized and normalized[0] < 1:
            raise ValueError(f"Support indices must be positive, got {normalized}")
        object.__setattr__(self, "support", normalized)
        object.__setattr__(self, "target", int(self.target))

    @property
    def width(self) -> int:
        return len(self.support)

    @property
    def mask(self) -> int:
        """Support as a bit mask, bit ``i - 1`` for variable ``i``."""
        return sum(1 << (i - 1) for i in self.support)

    def with_target(self, target: int) -> XorConstraint:
        return XorConstraint(self.support, target)

    def parity(self, points: np.ndarray) -> np.ndarray:
        """Return the support parity of each packed point.

        :param points: Integer array; bit ``i - 1`` of a point is ``x_i``.
        :type points: numpy.ndarray
        :return: Array of 0/1 parities.
        :rtype: numpy.ndarray
        """
        points = np.asarray(points, dtype=np.int64)
        acc = np.zeros(points.shape, dtype=np.int64)
        for i in self.support:
            acc ^= (points >> (i - 1)) & 1
        return acc

    def holds(self, assignment: Sequence[bool]) -> bool:
        return sum(bool(assignment[i - 1]) for i in self.support) % 2 == self.target


@dataclass(frozen=True)
class HashFunction:
    """The map ``x -> (h_1(x), ..., h_m(x))`` together with its targets ``b``.

    :param n: Domain dimension.
    :type n: int
    :param rows: Parity rows; each carries its own target bit.
    :type rows: tuple[XorConstraint, ...]
    """

    n: int
    rows: tuple[XorConstraint, ...]

    def __post_init__(self) -> None:
        for row in self.rows:
            if row.support and row.support[-1] > self.n:
                raise ValueError(
                    f"Row support {row.support} exceeds the domain dimension n={self.n}"
                )

    @property
    def m(self) -> int:
        return len(self.rows)

    @property
    def targets(self) -> tuple[int, ...]:
        return tuple(row.target for row in self.rows)

    def prefix(self, count: int) -> HashFunction:
        return HashFunction(self.n, self.rows[:count])

    def with_targets(self, targets: Sequence[int]) -> HashFunction:
        if len(targets) != self.m:
            raise ValueError(f"Expected {self.m} target bits, got {len(targets)}")
        return HashFunction(
            self.n, tuple(row.with_target(int(b)) for row, b in zip(self.rows, targets))
        )

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        """Return ``h(x)`` for packed points as an array of shape ``(len, m)``."""
        points = np.asarray(points, dtype=np.int64)
        if not self.rows:
            return np.zeros((points.size, 0), dtype=np.int64)
        return np.stack([row.parity(points) for row in self.rows], axis=-1)

    def preimage_mask(self, points: np.ndarray) -> np.ndarray:
        """Return which packed points satisfy ``h(x) = b`` on every row."""
        points = np.asarray(points, dtype=np.int64)
        keep = np.ones(points.shape, dtype=bool)
        for row in self.rows:
            keep &= row.parity(points) == row.target
        return keep


@dataclass(frozen=True)
class LocalityReport:
    """Support sizes of a hash function's rows against a width threshold.

    :param row_supports: ``|S_i|`` per row.
    :type row_supports: tuple[int, ...]
    :param max_support: Largest row support.
    :type max_support: int
    :param k_local_for: Smallest ``k`` with every ``|S_i| <= k``.
    :type k_local_for: int
    :param threshold: The ``k`` the report was requested for.
    :type threshold: int
    """

    row_supports: tuple[int, ...]
    max_support: int
    k_local_for: int
    threshold: int

    @property
    def is_k_local(self) -> bool:
        return self.max_support <= self.threshold


@runtime_checkable
class RowSampler(Protocol):
    """Strategy that draws the support of one hash row."""

    family: str

    def sample(self, n: int, rng: np.random.Generator) -> XorConstraint:
        """Draw one row over ``n`` variables with target 0.

        :param n: Domain dimension.
        :type n: int
        :param rng: Random stream.
        :type rng: numpy.random.Generator
        :return: Sampled row.
        :rtype: XorConstraint
        """
        ...


class BernoulliRowSampler:
    """Rows with support ``S ~ mu_p``: each index included independently."""

    family: str = FAMILY_BERNOULLI

    def __init__(self, p: float) -> None:
        if not 0.0 < p <= 0.5:
            raise ValueError(f"Bias p must lie in (0, 1/2], got {p}")
        self.p = p

    def sample(self, n: int, rng: np.random.Generator) -> XorConstraint:
        return sample_bernoulli_row(n, self.p, rng)

    def __repr__(self) -> str:
        return f"BernoulliRowSampler(p={self.p})"


class FixedSizeRowSampler:
    """Rows whose support is a uniformly random ``k``-subset."""

    family: str = FAMILY_FIXED_K

    def __init__(self, k: int) -> None:
        if k < 1:
            raise ValueError(f"Row size k must be positive, got {k}")
        self.k = k

    def sample(self, n: int, rng: np.random.Generator) -> XorConstraint:
        return sample_fixed_k_row(n, self.k, rng)

    def __repr__(self) -> str:
        return f"FixedSizeRowSampler(k={self.k})"


def make_row_sampler(family: str, *, p: float | None = None, k: int | None = None) -> RowSampler:
    """Build the row sampler for a hash family name.

    :param family: ``"bernoulli"`` or ``"fixed_k"``.
    :type family: str
    :param p: Bias for the Bernoulli family.
    :type p: float | None
    :param k: Row size for the fixed-size family.
    :type k: int | None
    :return: Row sampler.
    :rtype: RowSampler
    :raises ValueError: For an unknown family or a missing parameter.
    """
    if family == FAMILY_BERNOULLI:
        if p is None:
            raise ValueError("The bernoulli family needs a bias p")
        return BernoulliRowSampler(p)
    if family == FAMILY_FIXED_K:
        if k is None:
            raise ValueError("The fixed_k family needs a row size k")
        return FixedSizeRowSampler(k)
    raise ValueError(f"Unknown hash family {family!r}")


def sample_bernoulli_row(n: int, p: float, rng: np.random.Generator) -> XorConstraint:
    """Draw a row whose support includes each index with probability ``p``.

    :param n: Domain dimension.
    :type n: int
    :param p: Inclusion probability in ``(0, 1/2]``.
    :type p: float
    :param rng: Random stream.
    :type rng: numpy.random.Generator
    :return: Row with target 0.
    :rtype: XorConstraint
    """
    if not 0.0 < p <= 0.5:
        raise ValueError(f"Bias p must lie in (0, 1/2], got {p}")
    chosen = np.flatnonzero(rng.random(n) < p) + 1
    return XorConstraint(tuple(int(i) for i in chosen))


def sample_fixed_k_row(n: int, k: int, rng: np.random.Generator) -> XorConstraint:
    """Draw a row whose support is a uniform ``k``-subset of ``[1..n]``.

    :raises ValueError: If ``k`` is not in ``[1, n]``.
    """
    if not 1 <= k <= n:
        raise ValueError(f"Row size k must lie in [1, {n}], got {k}")
    chosen = rng.choice(n, size=k, replace=False) + 1
    return XorConstraint(tuple(int(i) for i in chosen))


def build_hash(n: int, m: int, row_sampler: RowSampler, rng: np.random.Generator) -> HashFunction:
    """Draw ``m`` independent rows, each with an independent uniform target bit.

    :param n: Domain dimension.
    :type n: int
    :param m: Row count, at least 1.
    :type m: int
    :param row_sampler: Support distribution.
    :type row_sampler: RowSampler
    :param rng: Random stream.
    :type rng: numpy.random.Generator
    :return: Sampled hash function.
    :rtype: HashFunction
    """
    if m < 1:
        raise ValueError(f"Row count m must be at least 1, got {m}")
    rows = []
    for _ in range(m):
        row = row_sampler.sample(n, rng)
        rows.append(row.with_target(int(rng.integers(0, 2))))
    return HashFunction(n=n, rows=tuple(rows))


def xor_to_cnf(constraint: XorConstraint, n: int) -> Cnf:
    """Encode one parity row as clauses over its own support.

    :param constraint: Row to encode.
    :type constraint: XorConstraint
    :param n: Variable count of the returned formula.
    :type n: int
    :return: Formula with ``2 ** (|S| - 1)`` clauses of width ``|S|``; for an
        empty support, the empty formula (target 0) or the falsum (target 1).
    :rtype: Cnf
    """
    support = constraint.support
    if not support:
        clauses: tuple[Clause, ...] = () if constraint.target == 0 else (Clause(()),)
        return Cnf(n=n, clauses=clauses)

    forbidden = []
    for bits in itertools.product((0, 1), repeat=len(support)):
        if sum(bits) % 2 == constraint.target:
            continue
        # The clause is false exactly on this wrong-parity assignment.
        forbidden.append(
            Clause(tuple(Literal(var, bit == 0) for var, bit in zip(support, bits)))
        )
    return Cnf(n=n, clauses=tuple(forbidden))


def encode_hash(h: HashFunction, max_width: int | None = None) -> Cnf:
    """Encode ``h(x) = b`` as the conjunction of its row encodings.

    :param h: Hash function with targets.
    :type h: HashFunction
    :param max_width: Optional width budget; rows wider than it are rejected.
    :type max_width: int | None
    :return: Formula over ``h.n`` variables.
    :rtype: Cnf
    :raises ValueError: If a row exceeds ``max_width``.
    """
    clauses: list[Clause] = []
    for index, row in enumerate(h.rows, start=1):
        if max_width is not None and row.width > max_width:
            raise ValueError(
                f"Row {index} has support size {row.width} above the width budget {max_width}"
            )
        clauses.extend(xor_to_cnf(row, h.n).clauses)
    return Cnf(n=h.n, clauses=tuple(clauses))


def locality_report(h: HashFunction, k: int) -> LocalityReport:
    """Summarize row support sizes against the threshold ``k``."""
    supports = tuple(row.width for row in h.rows)
    largest = max(supports, default=0)
    return LocalityReport(
        row_supports=supports,
        max_support=largest,
        k_local_for=largest,
        threshold=k,
    )


def locality_rate(
    n: int,
    k: int,
    p: float,
    rows: int,
    draws: int,
    rng: np.random.Generator,
) -> tuple[float, float]:
    """Estimate the probability that ``rows`` Bernoulli-``p`` rows are all ``k``-local.

    Supports are drawn in one batch; only their sizes matter here.

    :return: ``(fraction, standard_error)``.
    :rtype: tuple[float, float]
    """
    sizes = rng.binomial(n, p, size=(draws, rows))
    local = np.all(sizes <= k, axis=1)
    fraction = float(local.mean())
    return fraction, math.sqrt(fraction * (1.0 - fraction) / draws)


def xor_comment_lines(h: HashFunction) -> list[str]:
    """Render rows as ``xor <target> <indices...>`` comment bodies."""
    return [
        " ".join([XOR_COMMENT_TAG, str(row.target), *(str(i) for i in row.support)])
        for row in h.rows
    ]


def parse_xor_comments(text: bytes | str, n: int) -> HashFunction:
    """Recover the hash function from ``c xor`` comment lines.

    :param text: DIMACS text produced by the ``encode`` command.
    :type text: bytes | str
    :param n: Domain dimension.
    :type n: int
    :return: Hash function with the recorded rows, possibly with no rows.
    :rtype: HashFunction
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    rows = []
    for line in text.splitlines():
        tokens = line.split()
        if len(tokens) >= 3 and tokens[0] == "c" and tokens[1] == XOR_COMMENT_TAG:
            rows.append(XorConstraint(tuple(int(t) for t in tokens[3:]), int(tokens[2])))
    return HashFunction(n=n, rows=tuple(rows))
