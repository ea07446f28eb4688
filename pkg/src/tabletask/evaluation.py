"""Goal-conditioned scoring and benchmark aggregation.

Per episode, the final scene is converted into a relation set and each goal
atom is checked against it; a disjunct's score is its satisfied fraction and
the episode scores the best disjunct. Aggregates report the mean score (SR)
and its path-length-discounted variant (SPL = mean of score * l / max(p, l)).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .errors import EvaluationError
from .relations import (
    CloudStats,
    RelationThresholds,
    between_from_stats,
    relations_from_stats,
)
from .scenario import TaskScenario
from .scenegraph import GoalAtom, GoalConditionSet, RelationLabel
from .sim import EpisodeLog


@dataclass(frozen=True)
class EvalContext:
    """Final-scene facts: per-object stats, states, and the inferred relations."""

    stats: dict[str, CloudStats]
    states: dict[str, str | None]
    known_uids: frozenset[str]
    thresholds: RelationThresholds
    relations: frozenset = field(default=frozenset())

    @classmethod
    def build(
        cls,
        stats: dict[str, CloudStats],
        states: dict[str, str | None],
        known_uids,
        thresholds: RelationThresholds,
    ) -> "EvalContext":
        return cls(
            stats=dict(stats),
            states=dict(states),
            known_uids=frozenset(known_uids),
            thresholds=thresholds,
            relations=frozenset(relations_from_stats(stats, thresholds)),
        )


def eval_atom(atom: GoalAtom, ctx: EvalContext) -> bool:
    """Check one goal atom against the final scene.

    Held (absent) objects fail their relation atoms instead of erroring;
    uids the scenario never declared are errors.
    """
    for uid in (atom.obj1_uid, *atom.anchor_uids()):
        if uid not in ctx.known_uids:
            raise EvaluationError(f"unknown uid {uid} in goal atom")
    if atom.obj1_state is not None and ctx.states.get(atom.obj1_uid) != atom.obj1_state:
        return False
    if atom.relation is None:
        return True
    if atom.relation is RelationLabel.BETWEEN:
        a1, a2 = atom.anchor_uids()
        if not all(u in ctx.stats for u in (atom.obj1_uid, a1, a2)):
            return False
        return between_from_stats(
            ctx.stats[a1], ctx.stats[atom.obj1_uid], ctx.stats[a2], ctx.thresholds
        )
    anchor = atom.anchor_uids()[0]
    return (atom.obj1_uid, atom.relation, anchor) in ctx.relations


def episode_score(goals: GoalConditionSet, ctx: EvalContext) -> tuple[float, bool, list[list[bool]]]:
    """Fraction of satisfied atoms per disjunct; the episode takes the best
    disjunct. Success means some disjunct is fully satisfied."""
    atom_results = [
        [eval_atom(atom, ctx) for atom in disjunct] for disjunct in goals.disjuncts
    ]
    fractions = [sum(res) / len(res) for res in atom_results]
    score = max(fractions)
    return score, score == 1.0, atom_results


@dataclass(frozen=True)
class EpisodeResult:
    scenario_id: str
    task_type: str
    horizon: int
    score: float
    success: bool
    atom_results: tuple[tuple[bool, ...], ...]
    l: float
    p: float
    termination: str = "done"

    def to_dict(self) -> dict:
        return {
            "scenario_id": self.scenario_id,
            "task_type": self.task_type,
            "horizon": self.horizon,
            "score": self.score,
            "success": self.success,
            "atom_results": [list(r) for r in self.atom_results],
            "l": self.l,
            "p": self.p,
            "termination": self.termination,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "EpisodeResult":
        return cls(
            scenario_id=data["scenario_id"],
            task_type=data["task_type"],
            horizon=int(data["horizon"]),
            score=float(data["score"]),
            success=bool(data["success"]),
            atom_results=tuple(tuple(bool(b) for b in r) for r in data["atom_results"]),
            l=float(data["l"]),
            p=float(data["p"]),
            termination=data.get("termination", "done"),
        )


def evaluate_episode(
    scenario: TaskScenario, log: EpisodeLog, thresholds: RelationThresholds | None = None
) -> EpisodeResult:
    """Score one episode log against its scenario's goals."""
    th = thresholds or RelationThresholds()
    final = log.final_layout()
    stats = {o.uid: o.stats() for o in final.objects}
    ctx = EvalContext.build(
        stats=stats,
        states=log.final_states,
        known_uids=scenario.scene_graph.node_uids(),
        thresholds=th,
    )
    score, success, atom_results = episode_score(scenario.goals, ctx)
    best = max(range(len(atom_results)), key=lambda i: sum(atom_results[i]) / len(atom_results[i]))
    return EpisodeResult(
        scenario_id=scenario.id,
        task_type=scenario.task_type.value,
        horizon=len(scenario.goals.disjuncts[best]),
        score=score,
        success=success,
        atom_results=tuple(tuple(r) for r in atom_results),
        l=log.l,
        p=log.p,
        termination=log.termination,
    )


def sr(results: list[EpisodeResult]) -> float:
    """Mean episode score."""
    if not results:
        raise EvaluationError("cannot aggregate an empty result list")
    return sum(r.score for r in results) / len(results)


def spl_term(result: EpisodeResult) -> float:
    # l = 0 means success required no motion: perfect efficiency by convention.
    if result.l == 0.0:
        return result.score
    return result.score * result.l / max(result.p, result.l)


def spl(results: list[EpisodeResult]) -> float:
    """Mean of score * l / max(p, l); a zero shortest path contributes the raw score."""
    if not results:
        raise EvaluationError("cannot aggregate an empty result list")
    return sum(spl_term(r) for r in results) / len(results)


@dataclass
class BenchmarkReport:
    overall: dict
    per_type: dict[str, dict]
    per_horizon: dict[int, dict]
    failures: dict[str, int]
    notes: list[str]

    def to_dict(self) -> dict:
        return {
            "overall": self.overall,
            "per_type": self.per_type,
            "per_horizon": {str(k): v for k, v in self.per_horizon.items()},
            "failures": self.failures,
            "notes": self.notes,
        }

    def format_table(self) -> str:
        lines = []
        header = f"{'category':<16}{'n':>6}{'SR':>10}{'SPL':>10}"
        lines.append(header)
        lines.append("-" * len(header))
        for name, cell in self.per_type.items():
            lines.append(f"{name:<16}{cell['n']:>6}{cell['sr']:>10.4f}{cell['spl']:>10.4f}")
        lines.append(
            f"{'overall':<16}{self.overall['n']:>6}{self.overall['sr']:>10.4f}{self.overall['spl']:>10.4f}"
        )
        if self.per_horizon:
            lines.append("")
            lines.append(f"{'horizon':<16}{'n':>6}{'SR':>10}{'SPL':>10}")
            for h in sorted(self.per_horizon):
                cell = self.per_horizon[h]
                lines.append(f"{h:<16}{cell['n']:>6}{cell['sr']:>10.4f}{cell['spl']:>10.4f}")
        if self.failures:
            lines.append("")
            lines.append("failures: " + ", ".join(f"{k}={v}" for k, v in sorted(self.failures.items())))
        for note in self.notes:
            lines.append(f"note: {note}")
        return "\n".join(lines)


def _cell(results: list[EpisodeResult]) -> dict:
    return {"n": len(results), "sr": sr(results), "spl": spl(results)}


def report(results: list[EpisodeResult], scenarios: list[TaskScenario]) -> BenchmarkReport:
    """Aggregate SR/SPL overall, per task type, and per horizon."""
    if not results:
        raise EvaluationError("cannot report on an empty result list")
    known = {s.id for s in scenarios}
    for r in results:
        if r.scenario_id not in known:
            raise EvaluationError(f"result references unknown scenario {r.scenario_id}")

    notes: list[str] = []
    per_type: dict[str, dict] = {}
    from .scenario import TaskType

    for task_type in TaskType:
        bucket = [r for r in results if r.task_type == task_type.value]
        if bucket:
            per_type[task_type.value] = _cell(bucket)
        else:
            notes.append(f"no episodes for task type {task_type.value}")

    per_horizon: dict[int, dict] = {}
    for horizon in sorted({r.horizon for r in results}):
        bucket = [r for r in results if r.horizon == horizon]
        per_horizon[horizon] = _cell(bucket)

    failures: dict[str, int] = {}
    for r in results:
        if not r.success:
            failures[r.termination] = failures.get(r.termination, 0) + 1

    return BenchmarkReport(
        overall=_cell(results),
        per_type=per_type,
        per_horizon=per_horizon,
        failures=failures,
        notes=notes,
    )


def save_results(results: list[EpisodeResult], path: str | Path) -> None:
    """One result per line (JSON Lines)."""
    with Path(path).open("w", encoding="utf-8") as fh:
        for r in results:
            fh.write(json.dumps(r.to_dict(), separators=(",", ":")) + "\n")


def load_results(path: str | Path) -> list[EpisodeResult]:
    out = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(EpisodeResult.from_dict(json.loads(line)))
    return out
