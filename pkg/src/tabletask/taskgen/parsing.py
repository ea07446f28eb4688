"""Strict parsing of generation replies.

A reply is free text that should contain one JSON object following the
requested output schema. Extraction tolerates surrounding prose and code
fences; everything after extraction goes through the scenario validator, so
a reply either becomes a fully checked scenario or a structured diagnostic.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass

from ..catalog import AssetRecord
from ..errors import ScenarioError, ScenarioParseError
from ..scenario import TaskScenario, TaskType, parse_scenario_dict

_FENCE_RE = re.compile(r"```(?:json)?\s*(.*?)```", re.DOTALL)


def extract_structured_block(text: str) -> dict:
    """Pull the first JSON object out of a reply, fenced or bare."""
    for match in _FENCE_RE.finditer(text):
        block = match.group(1).strip()
        try:
            data = json.loads(block)
        except json.JSONDecodeError:
            continue
        if isinstance(data, dict):
            return data
    data = _scan_balanced(text)
    if data is None:
        raise ScenarioParseError("no structured block found in reply")
    return data


def _scan_balanced(text: str) -> dict | None:
    """Find the first balanced top-level {...} that parses as JSON."""
    depth = 0
    start = None
    in_string = False
    escape = False
    for i, ch in enumerate(text):
        if in_string:
            if escape:
                escape = False
            elif ch == "\\":
                escape = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            in_string = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0 and start is not None:
                    try:
                        data = json.loads(text[start : i + 1])
                    except json.JSONDecodeError:
                        start = None
                        continue
                    if isinstance(data, dict):
                        return data
                    start = None
    return None


@dataclass
class GenerationReply:
    """One generation attempt: the raw reply and what became of it."""

    raw_text: str
    scenario: TaskScenario | None = None
    error: str | None = None


def parse_reply(
    text: str,
    pool: list[AssetRecord],
    task_type: TaskType,
    scenario_id: str,
    seed: int,
) -> TaskScenario:
    """Extract, validate and assemble a scenario from a reply.

    Raises ScenarioParseError/ScenarioSchemaError/ScenarioSemanticError with a
    field path; the semantic check includes the circular-transformation rule
    (goal conditions must not restate the initial scene graph).
    """
    block = extract_structured_block(text)
    payload = {
        "id": scenario_id,
        "task_type": task_type.value,
        "seed": seed,
        "instruction": block.get("instruction"),
        "goal_conditions": block.get("goal_conditions"),
        "scene_graph": block.get("scene_graph"),
        "asset_pool": [a.to_dict() for a in pool],
    }
    return parse_scenario_dict(payload)


def try_parse_reply(
    text: str,
    pool: list[AssetRecord],
    task_type: TaskType,
    scenario_id: str,
    seed: int,
) -> GenerationReply:
    """Total version of parse_reply: diagnostics instead of exceptions."""
    try:
        scenario = parse_reply(text, pool, task_type, scenario_id, seed)
    except ScenarioError as exc:
        return GenerationReply(raw_text=text, error=str(exc))
    return GenerationReply(raw_text=text, scenario=scenario)
