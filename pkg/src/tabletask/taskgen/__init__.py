"""Task generation: pool sampling, prompt assembly, reply parsing, backends."""

from .backends import (
    CompletionBackend,
    HttpBackend,
    MockBackend,
    RecordingBackend,
    TranscriptBackend,
)
from .generation import GenerationRequest, generate, scenario_id_for
from .mock import mock_generate
from .parsing import GenerationReply, extract_structured_block, parse_reply, try_parse_reply
from .pool import sample_pool
from .prompts import build_prompt

__all__ = [
    "CompletionBackend",
    "GenerationReply",
    "GenerationRequest",
    "HttpBackend",
    "MockBackend",
    "RecordingBackend",
    "TranscriptBackend",
    "build_prompt",
    "extract_structured_block",
    "generate",
    "mock_generate",
    "parse_reply",
    "sample_pool",
    "scenario_id_for",
    "try_parse_reply",
]
