"""Unit tests for the SAT oracles and the counting helpers."""

from __future__ import annotations

import stat
import sys
from pathlib import Path

import numpy as np
import pytest

from local_hash_counter import solver
from local_hash_counter.cnf import Cnf, free_variable_cnf, parse_dimacs, random_k_cnf
from local_hash_counter.errors import OracleError, ResourceCapError, SolverConfigurationError
from local_hash_counter.solver import (
    DpllSolver,
    ExternalSolver,
    OracleFactory,
    RecordingOracle,
    SatOracle,
    SolveResult,
    SolveStatus,
    count_up_to,
    exact_count,
    parse_model_lines,
    solution_mask,
    verify_witness,
)


class _ScriptedOracle:
    """Fake oracle that replays a fixed list of answers."""

    can_enumerate = True

    def __init__(self, answers: list[SolveResult]) -> None:
        self.answers = list(answers)
        self.calls = 0

    def decide(self, formula: Cnf) -> SolveResult:
        self.calls += 1
        return self.answers.pop(0)


def test_dpll_finds_verified_witness() -> None:
    """Verify a SAT answer carries a model of the formula.

    :return: None
    :rtype: None
    """
    formula = parse_dimacs("p cnf 4 4\n1 2 0\n-1 3 0\n-3 -2 0\n4 -1 0\n")

    result = DpllSolver().decide(formula)

    assert result.status is SolveStatus.SAT
    assert result.witness is not None
    assert verify_witness(formula, result.witness)
    assert result.stats.wall_ms >= 0.0


def test_dpll_reports_unsat() -> None:
    """Verify conflicts found by propagation and by search both give UNSAT.

    :return: None
    :rtype: None
    """
    by_units = parse_dimacs("p cnf 2 2\n1 0\n-1 0\n")
    by_search = parse_dimacs("p cnf 2 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n")
    empty_clause = parse_dimacs("p cnf 1 1\n0\n")

    oracle = DpllSolver()

    assert oracle.decide(by_units).status is SolveStatus.UNSAT
    assert oracle.decide(by_search).status is SolveStatus.UNSAT
    assert oracle.decide(empty_clause).status is SolveStatus.UNSAT


def test_dpll_unmentioned_variables_are_free() -> None:
    result = DpllSolver().decide(Cnf(n=3))

    assert result.status is SolveStatus.SAT
    assert result.witness == (False, False, False)


def test_dpll_returns_unknown_when_out_of_decisions() -> None:
    """Verify the decision budget turns into an UNKNOWN answer.

    :return: None
    :rtype: None
    """
    formula = parse_dimacs("p cnf 3 1\n1 2 3 0\n")

    result = DpllSolver(decision_limit=0).decide(formula)

    assert result.status is SolveStatus.UNKNOWN
    assert "resource limit" in result.diagnostic


def test_dpll_agrees_with_exhaustive_count_on_random_formulas() -> None:
    """Verify satisfiability answers against enumeration.

    :return: None
    :rtype: None
    """
    rng = np.random.default_rng(17)
    oracle = DpllSolver()

    for _ in range(60):
        n = int(rng.integers(3, 11))
        formula = random_k_cnf(n, int(rng.integers(1, 6 * n)), 3 if n >= 3 else n, rng)
        status = oracle.decide(formula).status
        assert (status is SolveStatus.SAT) == (exact_count(formula) > 0)


def test_solution_mask_and_exact_count() -> None:
    """Verify the dense table and the chunked count agree.

    :return: None
    :rtype: None
    """
    formula = parse_dimacs("p cnf 3 1\n1 2 0\n")

    mask = solution_mask(formula)

    assert mask.tolist() == [False, True, True, True, False, True, True, True]
    assert exact_count(formula) == 6


def test_exact_count_enforces_budget() -> None:
    with pytest.raises(ResourceCapError, match="n <= 4"):
        exact_count(Cnf(n=5), budget=4)
    with pytest.raises(ResourceCapError):
        solution_mask(Cnf(n=21))


def test_count_up_to_enumerates_with_blocking_clauses() -> None:
    """Verify bounded enumeration counts free variables fully and stops at the cap.

    :return: None
    :rtype: None
    """
    formula = free_variable_cnf(6, 3)

    assert count_up_to(formula, 100, DpllSolver()) == 8
    assert count_up_to(formula, 5, DpllSolver()) == 5
    assert count_up_to(parse_dimacs("p cnf 1 2\n1 0\n-1 0\n"), 3, DpllSolver()) == 0
    with pytest.raises(ValueError):
        count_up_to(formula, 0, DpllSolver())


def test_count_up_to_is_monotone_in_cap_and_exact_beyond_the_count() -> None:
    """Verify ``count_up_to(f, c) = min(c, |sol(f)|)`` for every cap on random formulas.

    :return: None
    :rtype: None
    """
    rng = np.random.default_rng(23)
    oracle = DpllSolver()

    for _ in range(15):
        n = int(rng.integers(2, 7))
        formula = random_k_cnf(n, int(rng.integers(1, 3 * n)), min(n, 3), rng)
        true_count = exact_count(formula)

        counts = [count_up_to(formula, cap, oracle) for cap in range(1, true_count + 3)]

        assert counts == sorted(counts)
        assert counts == [min(cap, true_count) for cap in range(1, true_count + 3)]


def test_count_up_to_raises_on_unknown_or_missing_witness() -> None:
    """Verify enumeration needs definite answers with models.

    :return: None
    :rtype: None
    """
    unknown = _ScriptedOracle([SolveResult(SolveStatus.UNKNOWN, diagnostic="timeout")])
    no_model = _ScriptedOracle([SolveResult(SolveStatus.SAT)])

    with pytest.raises(OracleError, match="timeout"):
        count_up_to(Cnf(n=2), 4, unknown)
    with pytest.raises(OracleError, match="without a model"):
        count_up_to(Cnf(n=2), 4, no_model)


def test_recording_oracle_counts_queries() -> None:
    inner = DpllSolver()
    recording = RecordingOracle(inner)

    count_up_to(free_variable_cnf(4, 2), 10, recording)

    assert recording.queries == 5
    assert recording.variable_counts == {4}
    assert recording.can_enumerate is True
    assert isinstance(recording, SatOracle)


def test_parse_model_lines() -> None:
    """Verify ``v`` lines map to a full assignment.

    :return: None
    :rtype: None
    """
    stdout = "c comment\ns SATISFIABLE\nv 1 -2\nv 3 0\n"

    assert parse_model_lines(stdout, 4) == (True, False, True, False)
    assert parse_model_lines("s SATISFIABLE\n", 2) is None


def test_oracle_factory_defaults_to_internal(monkeypatch: pytest.MonkeyPatch) -> None:
    """Verify the internal solver is used without flag or environment.

    :param monkeypatch: Pytest monkeypatch fixture.
    :type monkeypatch: pytest.MonkeyPatch
    :return: None
    :rtype: None
    """
    monkeypatch.delenv(solver.SOLVER_ENV_VAR, raising=False)

    oracle = OracleFactory.build(timeout=2.0)

    assert isinstance(oracle, DpllSolver)
    assert oracle.timeout == 2.0


def test_oracle_factory_reads_environment(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.setenv(solver.SOLVER_ENV_VAR, "definitely-not-a-sat-solver")

    with pytest.raises(SolverConfigurationError, match="not found"):
        OracleFactory.build()
    assert isinstance(OracleFactory.build("internal"), DpllSolver)


def _write_script(path: Path, body: str) -> Path:
    path.write_text("#!/bin/sh\n" + body, encoding="utf-8")
    path.chmod(path.stat().st_mode | stat.S_IXUSR)
    return path


@pytest.mark.skipif(sys.platform == "win32", reason="needs a POSIX shell")
def test_external_solver_parses_exit_codes_and_models(tmp_path: Path) -> None:
    """Verify the external adapter reads SAT/UNSAT codes and ``v`` lines.

    :param tmp_path: Pytest temporary directory fixture.
    :type tmp_path: Path
    :return: None
    :rtype: None
    """
    sat = _write_script(tmp_path / "sat.sh", 'echo "s SATISFIABLE"\necho "v 1 -2 0"\nexit 10\n')
    unsat = _write_script(tmp_path / "unsat.sh", 'echo "s UNSATISFIABLE"\nexit 20\n')
    wrong = _write_script(tmp_path / "wrong.sh", 'echo "v -1 -2 0"\nexit 10\n')
    broken = _write_script(tmp_path / "broken.sh", "exit 3\n")
    formula = parse_dimacs("p cnf 2 1\n1 0\n")

    sat_result = ExternalSolver(str(sat)).decide(formula)

    assert sat_result.status is SolveStatus.SAT
    assert sat_result.witness == (True, False)
    assert ExternalSolver(str(unsat)).decide(formula).status is SolveStatus.UNSAT
    assert ExternalSolver(str(wrong)).decide(formula).status is SolveStatus.UNKNOWN
    assert ExternalSolver(str(broken)).decide(formula).status is SolveStatus.UNKNOWN


def test_external_adapter_rejects_unknown_protocol() -> None:
    with pytest.raises(SolverConfigurationError):
        solver.external_adapter("sh", protocol="ipasir")


_BRUTE_FORCE_SOLVER = '''
import itertools
import sys

n, clauses, current = 0, [], []
with open(sys.argv[1], encoding="utf-8") as handle:
    for line in handle:
        tokens = line.split()
        if not tokens or tokens[0] == "c":
            continue
        if tokens[0] == "%":
            break
        if tokens[0] == "p":
            n = int(tokens[2])
            continue
        for value in map(int, tokens):
            if value == 0:
                clauses.append(current)
                current = []
            else:
                current.append(value)

for bits in itertools.product((False, True), repeat=n):
    if all(any(bits[abs(lit) - 1] == (lit > 0) for lit in clause) for clause in clauses):
        print("s SATISFIABLE")
        print("v " + " ".join(str(i + 1 if b else -(i + 1)) for i, b in enumerate(bits)) + " 0")
        sys.exit(10)
print("s UNSATISFIABLE")
sys.exit(20)
'''


@pytest.mark.skipif(sys.platform == "win32", reason="needs an executable script")
def test_external_solver_agrees_with_dpll_on_random_formulas(tmp_path: Path) -> None:
    """Verify a brute-force DIMACS binary and the internal solver give the same answers.

    :param tmp_path: Pytest temporary directory fixture.
    :type tmp_path: Path
    :return: None
    :rtype: None
    """
    script = tmp_path / "brute.py"
    script.write_text(f"#!{sys.executable}\n{_BRUTE_FORCE_SOLVER}", encoding="utf-8")
    script.chmod(script.stat().st_mode | stat.S_IXUSR)
    external = solver.external_adapter(str(script))
    internal = DpllSolver()
    rng = np.random.default_rng(29)

    for _ in range(100):
        n = int(rng.integers(3, 11))
        formula = random_k_cnf(n, int(rng.integers(1, 6 * n)), 3, rng)

        outside = external.decide(formula)

        assert outside.status is internal.decide(formula).status
        if outside.status is SolveStatus.SAT:
            assert outside.witness is not None
            assert formula.evaluate(outside.witness)
