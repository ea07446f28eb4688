"""Episode policies: oracle demonstrations, null, noisy, and external processes.

The oracle leverages privileged layout information to execute one planned
demonstration per scenario, proving executability. External policies attach
through a line-delimited JSON protocol: one observation per line out, one
skill per line back.
"""

from __future__ import annotations

import json
import subprocess
from collections import deque

import numpy as np

from .errors import PolicyFault
from .layout import Layout, LayoutOptions
from .relations import RelationThresholds
from .scenario import TaskScenario
from .sim import (
    Done,
    Observation,
    Pick,
    SetState,
    SimOptions,
    SkillCall,
    plan_demonstration,
    skill_from_dict,
)


class NullPolicy:
    """Terminates immediately; the do-nothing baseline."""

    name = "null"

    def reset(self, scenario: TaskScenario, layout: Layout) -> None:
        pass

    def decide(self, observation: Observation) -> SkillCall:
        return Done()


class OraclePolicy:
    """Executes the planned demonstration for the first feasible disjunct."""

    name = "oracle"

    def __init__(
        self,
        options: SimOptions | None = None,
        thresholds: RelationThresholds | None = None,
        layout_options: LayoutOptions | None = None,
    ):
        self._options = options or SimOptions()
        self._thresholds = thresholds or RelationThresholds()
        self._layout_options = layout_options or LayoutOptions()
        self._queue: deque[SkillCall] = deque()
        self._planned = False

    def reset(self, scenario: TaskScenario, layout: Layout) -> None:
        self._queue.clear()
        self._planned = False
        self._scenario = scenario
        self._layout = layout

    def _plan(self) -> None:
        _, steps = plan_demonstration(
            self._scenario, self._layout, self._options, self._thresholds, self._layout_options
        )
        for step in steps:
            if step.kind == "move":
                self._queue.append(Pick(step.uid))
                self._queue.append(step.place)
            else:
                self._queue.append(SetState(step.uid, step.state))
        self._queue.append(Done())
        self._planned = True

    def decide(self, observation: Observation) -> SkillCall:
        if not self._planned:
            self._plan()  # raises PolicyFault when no demonstration exists
        if not self._queue:
            return Done()
        return self._queue.popleft()


class NoisyPolicy:
    """Wraps a policy with a per-skill failure probability.

    A failed draw replaces the skill with a pick of a nonexistent object,
    which the simulator rejects, ending the episode in a skill fault. Done
    passes through untouched.
    """

    def __init__(self, inner, failure_prob: float, seed: int = 0):
        if not 0.0 <= failure_prob < 1.0:
            raise ValueError("failure_prob must be in [0, 1)")
        self._inner = inner
        self._failure_prob = failure_prob
        self._seed = seed
        self.name = f"noisy({failure_prob:g})@{getattr(inner, 'name', 'policy')}"

    def reset(self, scenario: TaskScenario, layout: Layout) -> None:
        self._inner.reset(scenario, layout)
        self._rng = np.random.default_rng(
            np.random.SeedSequence([self._seed & 0xFFFFFFFFFFFFFFFF, scenario.seed & 0xFFFFFFFFFFFFFFFF])
        )

    def decide(self, observation: Observation) -> SkillCall:
        skill = self._inner.decide(observation)
        if isinstance(skill, Done):
            return skill
        if self._rng.random() < self._failure_prob:
            return Pick("__noise_fault__")
        return skill


class ExternalProcessPolicy:
    """Drives a policy subprocess over the line-delimited stdio protocol.

    Engine -> policy: one JSON observation per line (instruction, relations,
    poses, states, held, steps_used; an episode_start record at reset).
    Policy -> engine: one JSON skill per line.
    """

    def __init__(self, command: list[str]):
        self.name = "exec:" + " ".join(command)
        self._proc = subprocess.Popen(
            command,
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )

    def reset(self, scenario: TaskScenario, layout: Layout) -> None:
        self._send({"type": "episode_start", "scenario_id": scenario.id,
                    "instruction": scenario.instruction})

    def decide(self, observation: Observation) -> SkillCall:
        self._send(
            {
                "type": "observation",
                "instruction": observation.instruction,
                "relations": sorted(list(t) for t in observation.relations),
                "poses": observation.poses,
                "states": observation.states,
                "held": observation.held,
                "steps_used": observation.steps_used,
            }
        )
        line = self._proc.stdout.readline()
        if not line:
            raise PolicyFault("external policy closed its output stream")
        try:
            return skill_from_dict(json.loads(line))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise PolicyFault(f"external policy sent an invalid skill: {exc}") from exc

    def _send(self, record: dict) -> None:
        if self._proc.poll() is not None:
            raise PolicyFault("external policy process exited")
        self._proc.stdin.write(json.dumps(record) + "\n")
        self._proc.stdin.flush()

    def close(self) -> None:
        if self._proc.poll() is None:
            self._proc.stdin.close()
            self._proc.wait(timeout=5)


def make_policy(
    spec: str,
    options: SimOptions | None = None,
    thresholds: RelationThresholds | None = None,
    seed: int = 0,
):
    """Policy registry for the CLI: oracle | null | noisy:<p> | exec:<command>."""
    if spec == "oracle":
        return OraclePolicy(options=options, thresholds=thresholds)
    if spec == "null":
        return NullPolicy()
    if spec.startswith("noisy:"):
        prob = float(spec.split(":", 1)[1])
        return NoisyPolicy(OraclePolicy(options=options, thresholds=thresholds), prob, seed=seed)
    if spec.startswith("exec:"):
        import shlex

        return ExternalProcessPolicy(shlex.split(spec.split(":", 1)[1]))
    raise ValueError(f"unknown policy spec {spec!r}")
