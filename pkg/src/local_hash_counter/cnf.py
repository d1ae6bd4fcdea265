"""CNF data model with DIMACS ingestion and serialization."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Final, Iterable, Sequence

import numpy as np

from local_hash_counter.errors import DimacsParseError, VariableCountMismatchError

_LOG = logging.getLogger(__name__)

COMMENT_PREFIX: Final[str] = "c"
END_MARKER: Final[str] = "%"


@dataclass(frozen=True, order=True)
class Literal:
    """A signed occurrence of a variable.

    :param variable: 1-based variable index.
    :type variable: int
    :param sign: ``True`` for a positive occurrence, ``False`` for a negation.
    :type sign: bool
    """

    variable: int
    sign: bool = True

    def __post_init__(self) -> None:
        if self.variable < 1:
            raise ValueError(f"Variable index must be positive, got {self.variable}")

    @classmethod
    def from_dimacs(cls, value: int) -> Literal:
        """Build a literal from a signed DIMACS integer.

        :param value: Non-zero signed integer.
        :type value: int
        :return: The corresponding literal.
        :rtype: Literal
        """
        if value == 0:
            raise ValueError("0 is a clause terminator, not a literal")
        return cls(variable=abs(value), sign=value > 0)

    def to_dimacs(self) -> int:
        """Return the signed DIMACS integer for this literal."""
        return self.variable if self.sign else -self.variable

    def negated(self) -> Literal:
        return Literal(self.variable, not self.sign)

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        """Return whether ``assignment`` (0-based per variable) satisfies the literal."""
        return bool(assignment[self.variable - 1]) == self.sign


@dataclass(frozen=True)
class Clause:
    """A disjunction of literals.

    Duplicate literals are removed on construction while keeping first-seen
    order. The empty clause is the explicit falsum.

    :param literals: Literals of the clause.
    :type literals: tuple[Literal, ...]
    """

    literals: tuple[Literal, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "literals", tuple(dict.fromkeys(self.literals)))

    @classmethod
    def from_dimacs(cls, values: Iterable[int]) -> Clause:
        return cls(tuple(Literal.from_dimacs(value) for value in values))

    @property
    def width(self) -> int:
        return len(self.literals)

    @property
    def is_tautology(self) -> bool:
        """Return whether the clause contains a variable in both polarities."""
        seen = {(lit.variable, lit.sign) for lit in self.literals}
        return any((variable, not sign) in seen for variable, sign in seen)

    @property
    def max_variable(self) -> int:
        return max((lit.variable for lit in self.literals), default=0)

    def to_dimacs(self) -> list[int]:
        return [lit.to_dimacs() for lit in self.literals]

    def satisfied_by(self, assignment: Sequence[bool]) -> bool:
        return any(lit.satisfied_by(assignment) for lit in self.literals)


@dataclass(frozen=True)
class Cnf:
    """A conjunction of clauses over ``n`` declared variables.

    Tautological clauses are dropped on construction; they do not change the
    solution set. Variables that occur in no clause still count toward ``n``.

    :param n: Declared variable count.
    :type n: int
    :param clauses: Clauses of the formula.
    :type clauses: tuple[Clause, ...]
    :param diagnostics: Non-fatal parse remarks. Not part of equality.
    :type diagnostics: tuple[str, ...]
    """

    n: int
    clauses: tuple[Clause, ...] = ()
    diagnostics: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError(f"Variable count must be non-negative, got {self.n}")

        kept = tuple(clause for clause in self.clauses if not clause.is_tautology)
        for clause in kept:
            if clause.max_variable > self.n:
                raise ValueError(
                    f"Clause {clause.to_dimacs()} mentions variable {clause.max_variable} "
                    f"but the formula declares n={self.n}"
                )
        object.__setattr__(self, "clauses", kept)

    @property
    def size(self) -> int:
        """Total number of literal occurrences."""
        return sum(clause.width for clause in self.clauses)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    def evaluate(self, assignment: Sequence[bool]) -> bool:
        """Return whether a full assignment satisfies every clause.

        :param assignment: One truth value per variable, index 0 is variable 1.
        :type assignment: Sequence[bool]
        :return: ``True`` if the assignment is a model.
        :rtype: bool
        """
        if len(assignment) != self.n:
            raise ValueError(f"Assignment has {len(assignment)} values, expected {self.n}")
        return all(clause.satisfied_by(assignment) for clause in self.clauses)

    def canonical(self) -> tuple[int, tuple[tuple[int, ...], ...]]:
        """Return an order-insensitive comparison key."""
        return self.n, tuple(sorted(tuple(sorted(c.to_dimacs())) for c in self.clauses))


def parse_dimacs(text: bytes | str) -> Cnf:
    """Parse DIMACS CNF text.

    Clauses may span lines. A ``%`` line ends the clause section. A final
    clause missing its terminating ``0`` is accepted and noted in the
    diagnostics, as is a clause count that disagrees with the header.

    :param text: DIMACS content.
    :type text: bytes | str
    :return: The parsed formula.
    :rtype: Cnf
    :raises DimacsParseError: On a malformed header, a non-integer token, a
        literal out of range or a clause before the header.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DimacsParseError(f"input is not valid UTF-8: {exc}", 1) from exc

    n: int | None = None
    declared_clauses = 0
    clauses: list[Clause] = []
    current: list[int] = []
    diagnostics: list[str] = []
    last_line = 0

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        last_line = line_number
        line = raw_line.strip()
        if not line or line.startswith(COMMENT_PREFIX):
            continue
        if line.startswith(END_MARKER):
            break
        if line.startswith("p"):
            if n is not None:
                raise DimacsParseError("duplicate problem line", line_number)
            n, declared_clauses = _parse_header(line, line_number)
            continue
        if n is None:
            raise DimacsParseError("clause data before the 'p cnf' header", line_number)

        for token in line.split():
            try:
                value = int(token)
            except ValueError as exc:
                raise DimacsParseError(f"non-integer token {token!r}", line_number) from exc
            if abs(value) > n:
                raise DimacsParseError(
                    f"literal {value} out of range for n={n}", line_number
                )
            if value == 0:
                clauses.append(Clause.from_dimacs(current))
                current = []
            else:
                current.append(value)

    if n is None:
        raise DimacsParseError("missing 'p cnf' header", max(last_line, 1))

    if current:
        diagnostics.append(f"final clause {current} was not terminated by 0")
        clauses.append(Clause.from_dimacs(current))

    if len(clauses) != declared_clauses:
        diagnostics.append(
            f"header declares {declared_clauses} clause(s) but {len(clauses)} were read"
        )

    for message in diagnostics:
        _LOG.warning("DIMACS: %s", message)

    formula = Cnf(n=n, clauses=tuple(clauses), diagnostics=tuple(diagnostics))
    _LOG.debug(
        "Parsed DIMACS formula: n=%d clauses=%d (dropped %d tautologies)",
        formula.n,
        formula.num_clauses,
        len(clauses) - formula.num_clauses,
    )
    return formula


def _parse_header(line: str, line_number: int) -> tuple[int, int]:
    parts = line.split()
    if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
        raise DimacsParseError(f"malformed header {line!r}", line_number)
    try:
        n, m = int(parts[2]), int(parts[3])
    except ValueError as exc:
        raise DimacsParseError(f"non-integer header field in {line!r}", line_number) from exc
    if n < 0 or m < 0:
        raise DimacsParseError(f"negative header field in {line!r}", line_number)
    return n, m


def load_dimacs(path: Path) -> Cnf:
    """Read and parse a DIMACS file.

    :param path: File to read.
    :type path: Path
    :return: Parsed formula.
    :rtype: Cnf
    """
    _LOG.debug("Reading DIMACS file: %s", path)
    return parse_dimacs(path.read_bytes())


def emit_dimacs(formula: Cnf, comments: Sequence[str] = ()) -> bytes:
    """Serialize a formula as DIMACS.

    :param formula: Formula to write.
    :type formula: Cnf
    :param comments: Comment lines written before the header, without the
        leading ``c``.
    :type comments: Sequence[str]
    :return: UTF-8 encoded DIMACS text.
    :rtype: bytes
    """
    lines = [f"{COMMENT_PREFIX} {comment}".rstrip() for comment in comments]
    lines.append(f"p cnf {formula.n} {formula.num_clauses}")
    for clause in formula.clauses:
        lines.append(" ".join(str(value) for value in [*clause.to_dimacs(), 0]))
    return ("\n".join(lines) + "\n").encode("utf-8")


def conjoin(f: Cnf, g: Cnf) -> Cnf:
    """Return the conjunction of two formulas over the same variables.

    :param f: First formula.
    :type f: Cnf
    :param g: Second formula, typically a hash encoding.
    :type g: Cnf
    :return: Formula whose clauses are the union of both, with ``n`` unchanged.
    :rtype: Cnf
    :raises VariableCountMismatchError: If ``f.n != g.n``.
    """
    if f.n != g.n:
        raise VariableCountMismatchError(
            f"Cannot conjoin formulas over {f.n} and {g.n} variables"
        )
    return Cnf(n=f.n, clauses=f.clauses + g.clauses)


def free_variable_cnf(n: int, fixed: int) -> Cnf:
    """Return a formula with exactly ``2 ** (n - fixed)`` solutions.

    The first ``fixed`` variables are pinned by unit clauses (alternating
    polarity); the remaining variables are free.
    """
    if not 0 <= fixed <= n:
        raise ValueError(f"fixed must lie in [0, {n}], got {fixed}")
    clauses = tuple(
        Clause((Literal(variable, variable % 2 == 1),)) for variable in range(1, fixed + 1)
    )
    return Cnf(n=n, clauses=clauses)


def random_k_cnf(n: int, num_clauses: int, width: int, rng: np.random.Generator) -> Cnf:
    """Draw a random CNF whose clauses have ``width`` distinct variables.

    :param n: Variable count.
    :type n: int
    :param num_clauses: Number of clauses.
    :type num_clauses: int
    :param width: Variables per clause, at most ``n``.
    :type width: int
    :param rng: Random stream.
    :type rng: numpy.random.Generator
    :return: Random formula.
    :rtype: Cnf
    """
    if not 1 <= width <= n:
        raise ValueError(f"width must lie in [1, {n}], got {width}")
    clauses = []
    for _ in range(num_clauses):
        variables = rng.choice(n, size=width, replace=False) + 1
        signs = rng.integers(0, 2, size=width).astype(bool)
        clauses.append(
            Clause(tuple(Literal(int(v), bool(s)) for v, s in zip(variables, signs)))
        )
    return Cnf(n=n, clauses=tuple(clauses))
