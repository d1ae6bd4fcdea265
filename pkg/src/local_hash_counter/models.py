"""Serializable result records for counting runs and analysis checks."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Final

_LOG = logging.getLogger(__name__)

TIMING_FIELDS: Final[frozenset[str]] = frozenset({"wall_ms"})


def _plain(value: Any) -> Any:
    """Convert numpy scalars and tuples into JSON-friendly builtins."""
    if isinstance(value, dict):
        return {str(key): _plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(item) for item in value]
    if hasattr(value, "item") and callable(value.item):
        return value.item()
    return value


@dataclass(frozen=True)
class LevelTally:
    """Oracle answers collected at one level ``l`` of the outer loop.

    :param l: Number of hash rows used at this level.
    :type l: int
    :param trials: Trials run at this level.
    :type trials: int
    :param sat: Trials whose query was satisfiable.
    :type sat: int
    :param unsat: Trials whose query was unsatisfiable.
    :type unsat: int
    :param redraws: Hash redraws caused by rows wider than ``k``.
    :type redraws: int
    """

    l: int  # noqa: E741
    trials: int
    sat: int = 0
    unsat: int = 0
    redraws: int = 0

    def to_record(self) -> dict[str, int]:
        return {
            "l": self.l,
            "trials": self.trials,
            "sat": self.sat,
            "unsat": self.unsat,
            "redraws": self.redraws,
        }


@dataclass(frozen=True)
class CountEstimate:
    """Outcome of one counting run.

    ``estimate`` is 0 or ``2 ** (stopped_at_l - 1)`` in the pure modes and an
    exact count times ``2 ** stopped_at_l`` in hybrid mode.

    :param estimate: Approximate model count.
    :type estimate: int
    :param stopped_at_l: Level at which the run stopped; 0 when it stopped
        before adding any row.
    :type stopped_at_l: int
    :param mode: Counting mode name.
    :type mode: str
    :param seed: Master seed that replays the run.
    :type seed: int | None
    :param k: Clause-width budget.
    :type k: int | None
    :param kappa: Locality parameter derived from ``k``.
    :type kappa: float | None
    :param p: Row bias used, if any.
    :type p: float | None
    :param trials_log: Per-level SAT/UNSAT tallies.
    :type trials_log: tuple[LevelTally, ...]
    :param aborted: Whether the run gave up.
    :type aborted: bool
    :param abort_reason: Why the run gave up.
    :type abort_reason: str
    :param exact_path: Hybrid mode answered by direct enumeration.
    :type exact_path: bool
    :param oracle_queries: Oracle calls made by the run.
    :type oracle_queries: int
    :param wall_ms: Wall-clock time in milliseconds.
    :type wall_ms: float
    """

    estimate: int
    stopped_at_l: int
    mode: str
    seed: int | None
    k: int | None = None
    kappa: float | None = None
    p: float | None = None
    delta: float | None = None
    reps_multiplier: int = 1
    trials_log: tuple[LevelTally, ...] = ()
    aborted: bool = False
    abort_reason: str = ""
    exact_path: bool = False
    oracle_queries: int = 0
    wall_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.estimate < 0:
            raise ValueError(f"Estimate must be non-negative, got {self.estimate}")
        object.__setattr__(self, "trials_log", tuple(self.trials_log))

    @property
    def log2_estimate(self) -> float | None:
        return math.log2(self.estimate) if self.estimate > 0 else None

    @property
    def total_redraws(self) -> int:
        return sum(tally.redraws for tally in self.trials_log)

    def to_record(self, include_timing: bool = True) -> dict[str, Any]:
        """Convert the estimate into a JSON-compatible dictionary.

        :param include_timing: Keep timing fields; drop them to compare runs.
        :type include_timing: bool
        :return: Record mapping.
        :rtype: dict[str, Any]
        """
        record: dict[str, Any] = {
            "estimate": self.estimate,
            "log2_estimate": self.log2_estimate,
            "stopped_at_l": self.stopped_at_l,
            "mode": self.mode,
            "k": self.k,
            "kappa": self.kappa,
            "p": self.p,
            "delta": self.delta,
            "reps_multiplier": self.reps_multiplier,
            "seed": self.seed,
            "oracle_queries": self.oracle_queries,
            "wall_ms": round(self.wall_ms, 3),
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
            "exact_path": self.exact_path,
            "redraws": self.total_redraws,
            "trials_log": [tally.to_record() for tally in self.trials_log],
        }
        if not include_timing:
            for name in TIMING_FIELDS:
                record.pop(name, None)
        return _plain(record)


@dataclass(frozen=True)
class CheckResult:
    """One evaluated inequality ``lhs <= rhs``.

    :param checker: Checker name.
    :type checker: str
    :param params: Parameters of this instance.
    :type params: dict[str, Any]
    :param lhs: Left-hand side.
    :type lhs: float
    :param rhs: Right-hand side.
    :type rhs: float
    :param holds: Whether the inequality holds within tolerance.
    :type holds: bool
    """

    checker: str
    params: dict[str, Any] = field(default_factory=dict)
    lhs: float = 0.0
    rhs: float = 0.0
    holds: bool = True

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    def to_record(self) -> dict[str, Any]:
        record = {
            "checker": self.checker,
            "params": self.params,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "margin": float(self.margin),
            "holds": bool(self.holds),
        }
        _LOG.debug("Check %s: lhs=%r rhs=%r holds=%s", self.checker, self.lhs, self.rhs, self.holds)
        return _plain(record)
