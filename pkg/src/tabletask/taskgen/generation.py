"""The generation pipeline: prompt, complete, parse, probe, retry.

Every produced scenario must both validate and admit a constructed layout
(the executability probe); invalid replies trigger a bounded repair loop
that appends the validator's diagnostic to the next prompt.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..catalog import AssetRecord
from ..errors import (
    GenerationRetriesExhausted,
    GraphCycleError,
    LayoutInfeasibleError,
    PolicyFault,
)
from ..layout import LayoutOptions, TableSpec, construct_layout
from ..relations import RelationThresholds
from ..scenario import TaskScenario, TaskType
from .backends import CompletionBackend
from .mock import scenario_id_for
from .parsing import try_parse_reply
from .prompts import build_prompt

DEFAULT_REPAIR_RETRIES = 3


@dataclass(frozen=True)
class GenerationRequest:
    task_type: TaskType
    pool: tuple[AssetRecord, ...] = field(default_factory=tuple)
    num_objects_min: int = 5
    seed: int = 0

    def __post_init__(self):
        if not self.pool:
            raise ValueError("generation request needs a non-empty pool")
        if self.num_objects_min > len(self.pool):
            raise ValueError(
                f"num_objects_min {self.num_objects_min} exceeds pool size {len(self.pool)}"
            )
        object.__setattr__(self, "pool", tuple(self.pool))


def generate(
    request: GenerationRequest,
    backend: CompletionBackend,
    retries: int = DEFAULT_REPAIR_RETRIES,
    table: TableSpec | None = None,
    thresholds: RelationThresholds | None = None,
    layout_options: LayoutOptions | None = None,
) -> TaskScenario:
    """Produce one validated, layout-feasible scenario.

    Transport errors propagate; schema/semantic/feasibility failures are fed
    back into the prompt up to ``retries`` times, then raised together.
    """
    base_prompt = build_prompt(request)
    prompt = base_prompt
    scenario_id = scenario_id_for(request)
    diagnostics: list[str] = []
    for _ in range(retries + 1):
        text = backend.complete(prompt)
        reply = try_parse_reply(
            text, list(request.pool), request.task_type, scenario_id, request.seed
        )
        if reply.scenario is None:
            diagnostics.append(reply.error or "unparseable reply")
        else:
            try:
                layout = construct_layout(
                    reply.scenario, table=table, thresholds=thresholds, options=layout_options
                )
                # The executability guarantee: at least one demonstration
                # must exist before a scenario leaves the generator.
                from ..sim import plan_demonstration

                plan_demonstration(reply.scenario, layout, thresholds=thresholds)
                return reply.scenario
            except (LayoutInfeasibleError, GraphCycleError, PolicyFault) as exc:
                diagnostics.append(f"executability probe failed: {exc}")
        prompt = (
            base_prompt
            + "\n\nYour previous reply was rejected for this reason: "
            + diagnostics[-1]
            + "\nPlease return a corrected JSON object."
        )
    raise GenerationRetriesExhausted(diagnostics)
