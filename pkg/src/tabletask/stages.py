"""Batch pipeline stages over a run directory.

Each stage reads the previous stage's artifacts and writes its own next to
them: {id}.scenario.json -> {id}.layout.json -> {id}.episode.json ->
results.jsonl -> report.json. Stages are idempotent: re-running with the
same seed rewrites byte-identical files.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .config import EngineConfig
from .errors import (
    BackendError,
    EngineError,
    LayoutInfeasibleError,
    UsageError,
)
from .evaluation import (
    BenchmarkReport,
    EpisodeResult,
    evaluate_episode,
    load_results,
    report,
    save_results,
)
from .layout import construct_layout, load_layout, save_layout
from .policies import ExternalProcessPolicy, make_policy
from .scenario import TaskType, load_scenario, save_scenario
from .sim import load_episode_log, run_episode, save_episode_log
from .taskgen import GenerationRequest, generate, sample_pool

SCENARIO_SUFFIX = ".scenario.json"
LAYOUT_SUFFIX = ".layout.json"
EPISODE_SUFFIX = ".episode.json"
RESULTS_NAME = "results.jsonl"
REPORT_NAME = "report.json"


@dataclass
class StageSummary:
    processed: int = 0
    failures: list[tuple[str, str]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def _ensure_writable(directory: Path) -> None:
    try:
        directory.mkdir(parents=True, exist_ok=True)
        probe = directory / ".write-probe"
        probe.write_text("", encoding="utf-8")
        probe.unlink()
    except OSError as exc:
        raise UsageError(f"output directory {directory} is not writable: {exc}") from exc


def _scenario_paths(run_dir: Path) -> list[Path]:
    return sorted(run_dir.glob(f"*{SCENARIO_SUFFIX}"))


def _map_jobs(jobs: int, fn, items):
    if jobs <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, items))


def parse_type_mix(spec: str | None) -> list[TaskType]:
    """Comma-separated task types; defaults to all four in equal shares."""
    if not spec:
        return list(TaskType)
    out = []
    for token in spec.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            out.append(TaskType(token))
        except ValueError:
            raise UsageError(f"unknown task type {token!r}") from None
    if not out:
        raise UsageError("task type mix is empty")
    return out


def stage_generate(
    config: EngineConfig,
    count: int,
    out_dir: str | Path,
    mix: list[TaskType] | None = None,
    jobs: int = 1,
) -> StageSummary:
    """Write ``count`` validated, layout-feasible scenarios."""
    if count < 1:
        raise UsageError("count must be at least 1")
    out = Path(out_dir)
    _ensure_writable(out)
    catalog = config.load_assets()
    backend = config.make_backend(catalog)
    types = mix or list(TaskType)
    summary = StageSummary()

    def one(index: int):
        task_type = types[index % len(types)]
        seed = config.seed + index
        try:
            pool = sample_pool(catalog, task_type, seed, size=config.backend.pool_size)
            request = GenerationRequest(
                task_type=task_type,
                pool=tuple(pool),
                num_objects_min=config.backend.num_objects,
                seed=seed,
            )
            scenario = generate(
                request,
                backend,
                retries=config.backend.retries,
                table=config.table,
                thresholds=config.thresholds,
                layout_options=config.layout,
            )
            save_scenario(scenario, out / f"{scenario.id}{SCENARIO_SUFFIX}")
            return None
        except (BackendError, EngineError) as exc:
            return (f"{task_type.value}#{index}", str(exc))

    for failure in _map_jobs(jobs, one, range(count)):
        summary.processed += 1
        if failure is not None:
            summary.failures.append(failure)
    return summary


def stage_solve(config: EngineConfig, run_dir: str | Path, jobs: int = 1) -> StageSummary:
    """Construct a layout for every scenario in the run directory."""
    run = Path(run_dir)
    paths = _scenario_paths(run)
    if not paths:
        raise UsageError(f"no scenario files in {run}; run generate first")
    summary = StageSummary()

    def one(path: Path):
        scenario = load_scenario(path)
        try:
            layout = construct_layout(
                scenario,
                table=config.table,
                seed=scenario.seed,
                thresholds=config.thresholds,
                options=config.layout,
            )
        except LayoutInfeasibleError as exc:
            return (scenario.id, "; ".join(exc.diagnostics) or str(exc))
        save_layout(layout, run / f"{scenario.id}{LAYOUT_SUFFIX}")
        return None

    for failure in _map_jobs(jobs, one, paths):
        summary.processed += 1
        if failure is not None:
            summary.failures.append(failure)
    return summary


def stage_simulate(
    config: EngineConfig,
    run_dir: str | Path,
    policy_spec: str = "oracle",
    jobs: int = 1,
) -> StageSummary:
    """Run one episode per scenario under the named policy."""
    run = Path(run_dir)
    paths = _scenario_paths(run)
    if not paths:
        raise UsageError(f"no scenario files in {run}; run generate first")
    for path in paths:
        layout_path = run / path.name.replace(SCENARIO_SUFFIX, LAYOUT_SUFFIX)
        if not layout_path.exists():
            raise UsageError(f"missing layout for {path.name}; run solve first")

    shared_policy = None
    if policy_spec.startswith("exec:"):
        # One external process serves all episodes sequentially.
        shared_policy = make_policy(policy_spec, config.sim, config.thresholds, seed=config.seed)
        jobs = 1

    summary = StageSummary()

    def one(path: Path):
        scenario = load_scenario(path)
        layout = load_layout(run / f"{scenario.id}{LAYOUT_SUFFIX}")
        policy = shared_policy or make_policy(
            policy_spec, config.sim, config.thresholds, seed=config.seed
        )
        log = run_episode(
            scenario,
            layout,
            policy,
            budget=config.sim.budget,
            options=config.sim,
            thresholds=config.thresholds,
        )
        save_episode_log(log, run / f"{scenario.id}{EPISODE_SUFFIX}")
        return None

    try:
        for failure in _map_jobs(jobs, one, paths):
            summary.processed += 1
            if failure is not None:
                summary.failures.append(failure)
    finally:
        if isinstance(shared_policy, ExternalProcessPolicy):
            shared_policy.close()
    return summary


def stage_evaluate(config: EngineConfig, run_dir: str | Path) -> list[EpisodeResult]:
    """Score every episode log; write results.jsonl."""
    run = Path(run_dir)
    paths = _scenario_paths(run)
    if not paths:
        raise UsageError(f"no scenario files in {run}; run generate first")
    results = []
    for path in paths:
        scenario = load_scenario(path)
        episode_path = run / f"{scenario.id}{EPISODE_SUFFIX}"
        if not episode_path.exists():
            raise UsageError(f"missing episode log for {scenario.id}; run simulate first")
        log = load_episode_log(episode_path)
        results.append(evaluate_episode(scenario, log, config.thresholds))
    results.sort(key=lambda r: r.scenario_id)
    save_results(results, run / RESULTS_NAME)
    return results


def stage_report(config: EngineConfig, run_dir: str | Path) -> BenchmarkReport:
    """Aggregate results.jsonl into the benchmark report; write report.json."""
    run = Path(run_dir)
    results_path = run / RESULTS_NAME
    if not results_path.exists():
        raise UsageError(f"missing {RESULTS_NAME} in {run}; run evaluate first")
    results = load_results(results_path)
    scenarios = [load_scenario(p) for p in _scenario_paths(run)]
    bench = report(results, scenarios)
    import json

    (run / REPORT_NAME).write_text(
        json.dumps(bench.to_dict(), indent=2) + "\n", encoding="utf-8"
    )
    return bench


def run_full_pipeline(
    config: EngineConfig,
    count: int,
    run_dir: str | Path,
    mix: list[TaskType] | None = None,
    policy_spec: str = "oracle",
    jobs: int = 1,
) -> BenchmarkReport:
    """generate -> solve -> simulate -> evaluate -> report in one call."""
    gen = stage_generate(config, count, run_dir, mix=mix, jobs=jobs)
    if not gen.ok:
        raise BackendError(f"generation failures: {gen.failures[:3]} ...")
    solve = stage_solve(config, run_dir, jobs=jobs)
    if not solve.ok:
        raise LayoutInfeasibleError(
            f"{len(solve.failures)} layouts infeasible",
            [f"{sid}: {msg}" for sid, msg in solve.failures],
        )
    stage_simulate(config, run_dir, policy_spec=policy_spec, jobs=jobs)
    stage_evaluate(config, run_dir)
    return stage_report(config, run_dir)
