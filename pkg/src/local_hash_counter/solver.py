"""SAT oracles, exact counting and bounded model enumeration."""

from __future__ import annotations

import enum
import logging
import os
import shutil
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Final, Protocol, runtime_checkable

import numpy as np

from local_hash_counter.cnf import Clause, Cnf, Literal, emit_dimacs
from local_hash_counter.errors import OracleError, ResourceCapError, SolverConfigurationError

_LOG = logging.getLogger(__name__)

DEFAULT_ENUMERATION_BUDGET: Final[int] = 26
DENSE_TABLE_LIMIT: Final[int] = 20
ENUMERATION_CHUNK: Final[int] = 1 << 20

EXIT_CODE_SAT: Final[int] = 10
EXIT_CODE_UNSAT: Final[int] = 20
INTERNAL_SOLVER: Final[str] = "internal"
SOLVER_ENV_VAR: Final[str] = "LHCOUNT_SOLVER"


class SolveStatus(str, enum.Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    UNKNOWN = "UNKNOWN"


@dataclass(frozen=True)
class SolveStats:
    """Per-query search statistics."""

    decisions: int = 0
    propagations: int = 0
    wall_ms: float = 0.0


@dataclass(frozen=True)
class SolveResult:
    """Answer of one satisfiability query.

    :param status: SAT, UNSAT or UNKNOWN.
    :type status: SolveStatus
    :param witness: Satisfying assignment (index 0 is variable 1) when known.
    :type witness: tuple[bool, ...] | None
    :param stats: Search statistics.
    :type stats: SolveStats
    :param diagnostic: Reason for an UNKNOWN answer.
    :type diagnostic: str
    """

    status: SolveStatus
    witness: tuple[bool, ...] | None = None
    stats: SolveStats = field(default_factory=SolveStats)
    diagnostic: str = ""


@runtime_checkable
class SatOracle(Protocol):
    """A satisfiability service.

    ``can_enumerate`` is ``True`` when SAT answers always carry a witness,
    which model enumeration by blocking clauses needs.
    """

    can_enumerate: bool

    def decide(self, formula: Cnf) -> SolveResult:
        """Decide satisfiability of ``formula``.

        :param formula: Formula to decide.
        :type formula: Cnf
        :return: Query answer.
        :rtype: SolveResult
        """
        ...


def verify_witness(formula: Cnf, witness: tuple[bool, ...]) -> bool:
    """Return whether ``witness`` is a model of ``formula``."""
    return len(witness) == formula.n and formula.evaluate(witness)


class DpllSolver:
    """DPLL with counter-based unit propagation and lowest-index branching.

    Each clause tracks how many of its literals are true and how many are
    false; assigning a variable updates only the clauses it occurs in. All
    search state is local to one :meth:`decide` call, so a single instance can
    serve concurrent callers.

    :param decision_limit: Optional cap on branching decisions.
    :type decision_limit: int | None
    :param timeout: Optional wall-clock limit in seconds.
    :type timeout: float | None
    """

    can_enumerate: bool = True

    def __init__(self, decision_limit: int | None = None, timeout: float | None = None) -> None:
        self.decision_limit = decision_limit
        self.timeout = timeout

    def decide(self, formula: Cnf) -> SolveResult:
        started = time.perf_counter()
        search = _DpllSearch(formula, self.decision_limit, self.timeout, started)
        status, witness = search.run()
        stats = SolveStats(
            decisions=search.decisions,
            propagations=search.propagations,
            wall_ms=(time.perf_counter() - started) * 1000.0,
        )
        if status is SolveStatus.SAT:
            assert witness is not None
            if not verify_witness(formula, witness):
                raise OracleError("Internal solver produced a witness that fails the formula")
            return SolveResult(SolveStatus.SAT, witness, stats)
        if status is SolveStatus.UNKNOWN:
            _LOG.debug("DPLL gave up after %d decisions", search.decisions)
            return SolveResult(SolveStatus.UNKNOWN, None, stats, "resource limit reached")
        return SolveResult(SolveStatus.UNSAT, None, stats)


class _DpllSearch:
    """Search state for one DPLL query."""

    def __init__(
        self,
        formula: Cnf,
        decision_limit: int | None,
        timeout: float | None,
        started: float,
    ) -> None:
        self.n = formula.n
        self.clauses = [clause.to_dimacs() for clause in formula.clauses]
        self.decision_limit = decision_limit
        self.deadline = None if timeout is None else started + timeout
        self.decisions = 0
        self.propagations = 0

        self.value = [0] * (self.n + 1)
        self.true_count = [0] * len(self.clauses)
        self.false_count = [0] * len(self.clauses)
        self.occurrences: dict[int, list[int]] = {}
        for index, lits in enumerate(self.clauses):
            for lit in lits:
                self.occurrences.setdefault(lit, []).append(index)
        self.order = sorted({abs(lit) for lits in self.clauses for lit in lits})
        self.trail: list[int] = []

    def run(self) -> tuple[SolveStatus, tuple[bool, ...] | None]:
        if any(not lits for lits in self.clauses):
            return SolveStatus.UNSAT, None

        units = [lits[0] for lits in self.clauses if len(lits) == 1]
        if not self._propagate(units):
            return SolveStatus.UNSAT, None

        # Entries are (variable, trail position, second branch already tried).
        decisions: list[tuple[int, int, bool]] = []
        while True:
            variable = self._next_unassigned()
            if variable is None:
                return SolveStatus.SAT, tuple(v > 0 for v in self.value[1:])
            if self._out_of_budget():
                return SolveStatus.UNKNOWN, None

            self.decisions += 1
            decisions.append((variable, len(self.trail), False))
            consistent = self._propagate([variable])
            while not consistent:
                while decisions and decisions[-1][2]:
                    _, mark, _ = decisions.pop()
                    self._undo_to(mark)
                if not decisions:
                    return SolveStatus.UNSAT, None
                variable, mark, _ = decisions.pop()
                self._undo_to(mark)
                decisions.append((variable, mark, True))
                consistent = self._propagate([-variable])

    def _out_of_budget(self) -> bool:
        if self.decision_limit is not None and self.decisions >= self.decision_limit:
            return True
        return self.deadline is not None and time.perf_counter() > self.deadline

    def _next_unassigned(self) -> int | None:
        for variable in self.order:
            if self.value[variable] == 0:
                return variable
        return None

    def _propagate(self, pending: list[int]) -> bool:
        """Assign the pending literals and everything they force."""
        queue = list(pending)
        while queue:
            lit = queue.pop()
            variable = abs(lit)
            current = self.value[variable]
            if current != 0:
                if (current > 0) != (lit > 0):
                    return False
                continue
            self.value[variable] = 1 if lit > 0 else -1
            self.trail.append(variable)
            self.propagations += 1

            for index in self.occurrences.get(lit, ()):
                self.true_count[index] += 1
            conflict = False
            for index in self.occurrences.get(-lit, ()):
                self.false_count[index] += 1
                if self.true_count[index] or conflict:
                    continue
                remaining = len(self.clauses[index]) - self.false_count[index]
                if remaining == 0:
                    conflict = True
                elif remaining == 1:
                    queue.append(self._unassigned_literal(index))
            if conflict:
                return False
        return True

    def _unassigned_literal(self, index: int) -> int:
        for lit in self.clauses[index]:
            if self.value[abs(lit)] == 0:
                return lit
        raise AssertionError("unit clause without an unassigned literal")

    def _undo_to(self, mark: int) -> None:
        while len(self.trail) > mark:
            variable = self.trail.pop()
            lit = variable if self.value[variable] > 0 else -variable
            for index in self.occurrences.get(lit, ()):
                self.true_count[index] -= 1
            for index in self.occurrences.get(-lit, ()):
                self.false_count[index] -= 1
            self.value[variable] = 0


class ExternalSolver:
    """Adapter for a SAT-competition style executable.

    The solver is run once per query with a temporary DIMACS file as its only
    argument. Exit code 10 means SAT and 20 means UNSAT; ``v`` lines carry the
    model. Exit code 0 is accepted when an ``s`` status line is present.

    :param path: Executable name or path.
    :type path: str
    :param timeout: Optional wall-clock limit per query in seconds.
    :type timeout: float | None
    :raises SolverConfigurationError: If the executable cannot be found.
    """

    can_enumerate: bool = False

    def __init__(self, path: str, timeout: float | None = None) -> None:
        resolved = shutil.which(path)
        if resolved is None:
            raise SolverConfigurationError(f"SAT solver executable not found: {path}")
        self.path = resolved
        self.timeout = timeout

    def decide(self, formula: Cnf) -> SolveResult:
        started = time.perf_counter()
        handle = tempfile.NamedTemporaryFile(
            mode="wb", suffix=".cnf", prefix="lhcount-", delete=False
        )
        try:
            with handle:
                handle.write(emit_dimacs(formula))
            completed = subprocess.run(
                [self.path, handle.name],
                capture_output=True,
                text=True,
                timeout=self.timeout,
                check=False,
            )
        except subprocess.TimeoutExpired:
            return self._unknown(started, f"timed out after {self.timeout} s")
        except OSError as exc:
            return self._unknown(started, f"could not run {self.path}: {exc}")
        finally:
            Path(handle.name).unlink(missing_ok=True)

        stats = SolveStats(wall_ms=(time.perf_counter() - started) * 1000.0)
        status = self._status_from(completed.returncode, completed.stdout)
        if status is None:
            return self._unknown(
                started, f"unexpected exit code {completed.returncode} without a status line"
            )
        if status is SolveStatus.UNSAT:
            return SolveResult(SolveStatus.UNSAT, None, stats)

        witness = parse_model_lines(completed.stdout, formula.n)
        if witness is not None and not verify_witness(formula, witness):
            return self._unknown(started, "reported model does not satisfy the formula")
        return SolveResult(SolveStatus.SAT, witness, stats)

    @staticmethod
    def _status_from(returncode: int, stdout: str) -> SolveStatus | None:
        if returncode == EXIT_CODE_SAT:
            return SolveStatus.SAT
        if returncode == EXIT_CODE_UNSAT:
            return SolveStatus.UNSAT
        if returncode == 0:
            for line in stdout.splitlines():
                if line.startswith("s UNSATISFIABLE"):
                    return SolveStatus.UNSAT
                if line.startswith("s SATISFIABLE"):
                    return SolveStatus.SAT
        return None

    def _unknown(self, started: float, diagnostic: str) -> SolveResult:
        _LOG.warning("External solver query failed: %s", diagnostic)
        stats = SolveStats(wall_ms=(time.perf_counter() - started) * 1000.0)
        return SolveResult(SolveStatus.UNKNOWN, None, stats, diagnostic)


def parse_model_lines(stdout: str, n: int) -> tuple[bool, ...] | None:
    """Collect a model from ``v`` lines; unmentioned variables are false.

    :return: The model, or ``None`` when there are no ``v`` lines.
    :rtype: tuple[bool, ...] | None
    """
    values = [False] * n
    seen = False
    for line in stdout.splitlines():
        if not line.startswith("v"):
            continue
        seen = True
        for token in line.split()[1:]:
            lit = int(token)
            if lit != 0 and abs(lit) <= n:
                values[abs(lit) - 1] = lit > 0
    return tuple(values) if seen else None


def external_adapter(
    path: str, protocol: str = "dimacs", timeout: float | None = None
) -> SatOracle:
    """Return an oracle that shells out to ``path`` for every query.

    :raises SolverConfigurationError: For an unknown protocol or a missing executable.
    """
    if protocol != "dimacs":
        raise SolverConfigurationError(f"Unsupported solver protocol {protocol!r}")
    return ExternalSolver(path, timeout=timeout)


class RecordingOracle:
    """Wrap an oracle, counting queries and the variable count of each query."""

    def __init__(self, inner: SatOracle) -> None:
        self._inner = inner
        self._lock = threading.Lock()
        self.queries = 0
        self.variable_counts: set[int] = set()

    @property
    def can_enumerate(self) -> bool:
        return self._inner.can_enumerate

    def decide(self, formula: Cnf) -> SolveResult:
        with self._lock:
            self.queries += 1
            self.variable_counts.add(formula.n)
        return self._inner.decide(formula)


class OracleFactory:
    """Factory for SAT oracle instances."""

    @staticmethod
    def build(solver: str | None = None, timeout: float | None = None) -> SatOracle:
        """Create the oracle named by ``solver``.

        ``None`` falls back to the ``LHCOUNT_SOLVER`` environment variable and
        then to the internal solver.

        :param solver: ``"internal"`` or an executable path.
        :type solver: str | None
        :param timeout: Per-query wall-clock limit in seconds.
        :type timeout: float | None
        :return: Oracle instance.
        :rtype: SatOracle
        """
        choice = solver or os.environ.get(SOLVER_ENV_VAR) or INTERNAL_SOLVER
        if choice == INTERNAL_SOLVER:
            _LOG.debug("Using the internal DPLL solver")
            return DpllSolver(timeout=timeout)
        _LOG.debug("Using external solver: %s", choice)
        return external_adapter(choice, timeout=timeout)


def _check_enumeration_budget(formula: Cnf, budget: int) -> None:
    if formula.n > budget:
        raise ResourceCapError(
            f"Exhaustive enumeration needs n <= {budget}, formula has n={formula.n}"
        )


def _satisfied(formula: Cnf, points: np.ndarray) -> np.ndarray:
    alive = np.ones(points.shape, dtype=bool)
    for clause in formula.clauses:
        sat = np.zeros(points.shape, dtype=bool)
        for lit in clause.literals:
            bit = ((points >> (lit.variable - 1)) & 1).astype(bool)
            sat |= bit if lit.sign else ~bit
        alive &= sat
        if not alive.any():
            break
    return alive


def solution_mask(formula: Cnf) -> np.ndarray:
    """Return the dense table of ``sol(formula)``.

    Entry ``z`` is ``True`` when the assignment with ``x_i = bit i-1 of z``
    is a model.
    """
    _check_enumeration_budget(formula, DENSE_TABLE_LIMIT)
    points = np.arange(1 << formula.n, dtype=np.int64)
    return _satisfied(formula, points)


def exact_count(formula: Cnf, budget: int = DEFAULT_ENUMERATION_BUDGET) -> int:
    """Count models by exhaustive assignment enumeration.

    :param formula: Formula to count.
    :type formula: Cnf
    :param budget: Largest ``n`` accepted.
    :type budget: int
    :return: ``|sol(formula)|``.
    :rtype: int
    :raises ResourceCapError: If ``formula.n`` exceeds ``budget``.
    """
    _check_enumeration_budget(formula, budget)
    total = 0
    space = 1 << formula.n
    for start in range(0, space, ENUMERATION_CHUNK):
        points = np.arange(start, min(start + ENUMERATION_CHUNK, space), dtype=np.int64)
        total += int(_satisfied(formula, points).sum())
    _LOG.debug("Exact count for n=%d: %d", formula.n, total)
    return total


def count_up_to(formula: Cnf, cap: int, oracle: SatOracle) -> int:
    """Count models up to ``cap`` by repeated queries with blocking clauses.

    Each found model is excluded by a clause over all ``n`` variables, so free
    variables contribute their full multiplicity.

    :param formula: Formula to count.
    :type formula: Cnf
    :param cap: Positive count ceiling.
    :type cap: int
    :param oracle: Oracle whose SAT answers carry witnesses.
    :type oracle: SatOracle
    :return: ``min(|sol(formula)|, cap)``.
    :rtype: int
    :raises OracleError: On an UNKNOWN answer or a SAT answer without a witness.
    """
    if cap < 1:
        raise ValueError(f"cap must be positive, got {cap}")

    found = 0
    current = formula
    while found < cap:
        result = oracle.decide(current)
        if result.status is SolveStatus.UNKNOWN:
            raise OracleError(f"Oracle could not decide during counting: {result.diagnostic}")
        if result.status is SolveStatus.UNSAT:
            return found
        if result.witness is None:
            raise OracleError("Oracle answered SAT without a model; cannot enumerate")
        found += 1
        blocking = Clause(
            tuple(Literal(i + 1, not value) for i, value in enumerate(result.witness))
        )
        current = Cnf(n=current.n, clauses=current.clauses + (blocking,))
    return found
