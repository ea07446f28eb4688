"""Asset pool sampling: seed objects drawn uniformly, the rest retrieved by tag overlap."""

from __future__ import annotations

import numpy as np

from ..catalog import AssetRecord
from ..errors import CatalogError
from ..scenario import TaskType

DEFAULT_POOL_SIZE = 50
DEFAULT_SEED_COUNT = 5

_TYPE_INDEX = {t: i for i, t in enumerate(TaskType)}


def sample_pool(
    catalog: list[AssetRecord],
    task_type: TaskType,
    seed: int,
    size: int = DEFAULT_POOL_SIZE,
    seed_count: int = DEFAULT_SEED_COUNT,
) -> list[AssetRecord]:
    """Draw a working pool: ``seed_count`` assets uniformly at random, then the
    assets sharing the most tags with them. Appearance pools are guaranteed to
    contain at least one same-category pair differing in color, so distractor
    tasks are always constructible."""
    if len(catalog) < size:
        raise CatalogError(f"catalog has {len(catalog)} assets, need {size}")
    ordered = sorted(catalog, key=lambda a: a.uid)
    rng = np.random.default_rng(
        np.random.SeedSequence([seed & 0xFFFFFFFFFFFFFFFF, _TYPE_INDEX[task_type], 0x9E37])
    )
    seed_idx = rng.choice(len(ordered), size=seed_count, replace=False)
    seeds = [ordered[i] for i in sorted(int(i) for i in seed_idx)]
    seed_uids = {a.uid for a in seeds}
    seed_tags = set()
    for a in seeds:
        seed_tags.update(a.tags)

    rest = [a for a in ordered if a.uid not in seed_uids]
    rest.sort(key=lambda a: (-len(seed_tags.intersection(a.tags)), a.uid))
    pool = seeds + rest[: size - seed_count]

    if task_type is TaskType.APPEARANCE and not _has_color_pair(pool):
        partner = _find_color_partner(ordered, pool)
        if partner is not None:
            pool[-1] = partner
    return pool


def _has_color_pair(pool: list[AssetRecord]) -> bool:
    seen: dict[str, set[str]] = {}
    for a in pool:
        colors = seen.setdefault(a.category, set())
        colors.add(a.color)
        if len(colors) > 1:
            return True
    return False


def _find_color_partner(
    catalog: list[AssetRecord], pool: list[AssetRecord]
) -> AssetRecord | None:
    pool_uids = {a.uid for a in pool}
    by_category: dict[str, set[str]] = {}
    for a in pool:
        by_category.setdefault(a.category, set()).add(a.color)
    for candidate in catalog:
        if candidate.uid in pool_uids:
            continue
        colors = by_category.get(candidate.category)
        if colors and candidate.color not in colors:
            return candidate
    return None
