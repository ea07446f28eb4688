"""Synthetic asset catalog.

A procedural stand-in for a large annotated asset collection: every record
carries the same annotation schema a vision-language labeling pass would
produce (description, category, color, shape, material, scale, mass) plus
tags for retrieval-by-tag sampling. Deterministic from a seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CatalogError

DEFAULT_CATALOG_SEED = 714025
DEFAULT_CATALOG_SIZE = 240


@dataclass(frozen=True)
class AssetRecord:
    """One annotated asset. Geometry is the object's bounding footprint in meters."""

    uid: str
    name: str
    description: str
    category: str
    color: str
    shape: str
    material: str
    footprint: tuple[float, float, float]
    mass: float
    states: tuple[str, ...] = ()
    tags: tuple[str, ...] = ()

    def __post_init__(self):
        if any(d <= 0 for d in self.footprint):
            raise CatalogError(f"asset {self.uid}: footprint dims must be positive")
        if self.mass <= 0:
            raise CatalogError(f"asset {self.uid}: mass must be positive")
        if len(set(self.states)) != len(self.states):
            raise CatalogError(f"asset {self.uid}: duplicate states")

    def to_dict(self) -> dict:
        return {
            "uid": self.uid,
            "name": self.name,
            "description": self.description,
            "category": self.category,
            "color": self.color,
            "shape": self.shape,
            "material": self.material,
            "footprint": list(self.footprint),
            "mass": self.mass,
            "states": list(self.states),
            "tags": list(self.tags),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AssetRecord":
        return cls(
            uid=str(data["uid"]),
            name=str(data["name"]),
            description=str(data["description"]),
            category=str(data["category"]),
            color=str(data["color"]),
            shape=str(data["shape"]),
            material=str(data["material"]),
            footprint=tuple(float(v) for v in data["footprint"]),
            mass=float(data["mass"]),
            states=tuple(data.get("states", ())),
            tags=tuple(data.get("tags", ())),
        )


@dataclass
class _CategorySpec:
    category: str
    dx: tuple[float, float]
    dy: tuple[float, float]
    dz: tuple[float, float]
    density: float  # effective kg/m^3 of the bounding box
    shapes: tuple[str, ...]
    materials: tuple[str, ...]
    group_tags: tuple[str, ...]
    states: tuple[str, ...] = ()
    square: bool = False  # dy follows dx (round / square footprints)


_COLORS = (
    "white", "black", "red", "blue", "green", "yellow",
    "orange", "purple", "brown", "gray", "pink", "teal",
)

_SPECS: tuple[_CategorySpec, ...] = (
    _CategorySpec("plate", (0.18, 0.26), (0.18, 0.26), (0.015, 0.025), 180,
                  ("round", "oval"), ("porcelain", "ceramic", "plastic"),
                  ("tableware", "kitchen", "surface"), square=True),
    _CategorySpec("tray", (0.26, 0.36), (0.18, 0.26), (0.02, 0.03), 150,
                  ("rectangular", "oval"), ("wood", "plastic", "steel"),
                  ("kitchen", "serving", "surface")),
    _CategorySpec("cutting_board", (0.24, 0.32), (0.16, 0.22), (0.015, 0.02), 420,
                  ("rectangular",), ("wood", "bamboo"),
                  ("kitchen", "surface")),
    _CategorySpec("book", (0.15, 0.24), (0.11, 0.17), (0.02, 0.05), 550,
                  ("rectangular",), ("paper",), ("office", "stationery", "surface"),
                  states=("open", "closed")),
    _CategorySpec("notebook", (0.14, 0.21), (0.11, 0.15), (0.01, 0.02), 500,
                  ("rectangular",), ("paper",), ("office", "stationery", "surface")),
    _CategorySpec("tissue_box", (0.21, 0.25), (0.11, 0.13), (0.08, 0.1), 60,
                  ("rectangular",), ("cardboard",), ("household", "surface")),
    _CategorySpec("bowl", (0.14, 0.2), (0.14, 0.2), (0.06, 0.09), 160,
                  ("round",), ("ceramic", "porcelain", "steel"),
                  ("tableware", "kitchen", "container"), square=True),
    _CategorySpec("basket", (0.22, 0.3), (0.16, 0.24), (0.09, 0.14), 90,
                  ("rectangular", "oval"), ("wicker", "plastic"),
                  ("storage", "container")),
    _CategorySpec("storage_box", (0.2, 0.3), (0.15, 0.22), (0.09, 0.16), 110,
                  ("rectangular",), ("plastic", "cardboard"),
                  ("storage", "container"), states=("open", "closed")),
    _CategorySpec("pot", (0.16, 0.22), (0.16, 0.22), (0.1, 0.14), 300,
                  ("round",), ("steel", "ceramic"), ("cookware", "kitchen", "container"),
                  square=True),
    _CategorySpec("pan", (0.2, 0.26), (0.2, 0.26), (0.04, 0.06), 350,
                  ("round",), ("steel", "cast iron"), ("cookware", "kitchen"), square=True),
    _CategorySpec("mug", (0.08, 0.1), (0.08, 0.1), (0.09, 0.12), 320,
                  ("cylindrical",), ("ceramic", "porcelain"),
                  ("drinkware", "tableware", "kitchen"), square=True),
    _CategorySpec("cup", (0.07, 0.09), (0.07, 0.09), (0.08, 0.11), 260,
                  ("cylindrical", "conical"), ("plastic", "paper", "ceramic"),
                  ("drinkware", "tableware"), square=True),
    _CategorySpec("glass", (0.06, 0.08), (0.06, 0.08), (0.1, 0.14), 400,
                  ("cylindrical",), ("glass",), ("drinkware", "fragile"), square=True),
    _CategorySpec("bottle", (0.06, 0.08), (0.06, 0.08), (0.18, 0.26), 450,
                  ("cylindrical",), ("glass", "plastic"), ("drinkware", "pantry"),
                  square=True),
    _CategorySpec("can", (0.06, 0.07), (0.06, 0.07), (0.1, 0.13), 650,
                  ("cylindrical",), ("aluminum",), ("pantry", "food"), square=True),
    _CategorySpec("jar", (0.08, 0.1), (0.08, 0.1), (0.1, 0.14), 500,
                  ("cylindrical",), ("glass",), ("pantry", "kitchen"),
                  states=("open", "closed"), square=True),
    _CategorySpec("apple", (0.07, 0.09), (0.07, 0.09), (0.07, 0.09), 520,
                  ("spherical",), ("organic",), ("fruit", "food"), square=True),
    _CategorySpec("orange", (0.07, 0.09), (0.07, 0.09), (0.07, 0.09), 540,
                  ("spherical",), ("organic",), ("fruit", "food"), square=True),
    _CategorySpec("banana", (0.16, 0.2), (0.035, 0.045), (0.035, 0.045), 480,
                  ("oblong",), ("organic",), ("fruit", "food")),
    _CategorySpec("fork", (0.17, 0.21), (0.02, 0.03), (0.012, 0.02), 900,
                  ("oblong",), ("steel", "plastic"), ("utensil", "kitchen", "tableware")),
    _CategorySpec("spoon", (0.16, 0.2), (0.03, 0.04), (0.015, 0.025), 850,
                  ("oblong",), ("steel", "plastic"), ("utensil", "kitchen", "tableware")),
    _CategorySpec("knife", (0.19, 0.23), (0.02, 0.03), (0.012, 0.02), 950,
                  ("oblong",), ("steel",), ("utensil", "kitchen")),
    _CategorySpec("laptop", (0.3, 0.34), (0.21, 0.24), (0.015, 0.025), 900,
                  ("rectangular",), ("aluminum", "plastic"), ("electronics", "office"),
                  states=("open", "closed")),
    _CategorySpec("phone", (0.14, 0.16), (0.07, 0.08), (0.008, 0.012), 1300,
                  ("rectangular",), ("glass", "aluminum"), ("electronics",),
                  states=("on", "off")),
    _CategorySpec("lamp", (0.1, 0.14), (0.1, 0.14), (0.22, 0.3), 250,
                  ("conical", "cylindrical"), ("steel", "fabric"),
                  ("electronics", "office", "decor"), states=("on", "off"), square=True),
    _CategorySpec("alarm_clock", (0.08, 0.12), (0.04, 0.06), (0.08, 0.1), 400,
                  ("round", "rectangular"), ("plastic",), ("electronics", "household"),
                  states=("on", "off")),
    _CategorySpec("remote", (0.15, 0.18), (0.04, 0.05), (0.02, 0.03), 450,
                  ("rectangular",), ("plastic",), ("electronics", "household")),
    _CategorySpec("marker", (0.13, 0.15), (0.014, 0.018), (0.014, 0.018), 700,
                  ("cylindrical",), ("plastic",), ("stationery", "office")),
    _CategorySpec("candle", (0.05, 0.07), (0.05, 0.07), (0.08, 0.12), 880,
                  ("cylindrical",), ("wax",), ("decor", "household"),
                  states=("lit", "unlit"), square=True),
    _CategorySpec("vase", (0.08, 0.12), (0.08, 0.12), (0.15, 0.22), 350,
                  ("cylindrical", "conical"), ("ceramic", "glass"), ("decor", "fragile"),
                  square=True),
    _CategorySpec("toy_car", (0.1, 0.15), (0.05, 0.07), (0.04, 0.06), 380,
                  ("oblong",), ("plastic", "metal"), ("toy",)),
)


def category_specs() -> tuple[_CategorySpec, ...]:
    return _SPECS


def build_catalog(count: int = DEFAULT_CATALOG_SIZE, seed: int = DEFAULT_CATALOG_SEED) -> list[AssetRecord]:
    """Generate ``count`` assets spread round-robin over all categories."""
    if count < len(_SPECS):
        raise CatalogError(
            f"catalog size {count} smaller than category count {len(_SPECS)}"
        )
    rng = np.random.default_rng(np.random.SeedSequence([seed & 0xFFFFFFFF]))
    records: list[AssetRecord] = []
    counters = {spec.category: 0 for spec in _SPECS}
    for i in range(count):
        spec = _SPECS[i % len(_SPECS)]
        counters[spec.category] += 1
        idx = counters[spec.category]
        dx = round(float(rng.uniform(*spec.dx)), 3)
        dy = dx if spec.square else round(float(rng.uniform(*spec.dy)), 3)
        dz = round(float(rng.uniform(*spec.dz)), 3)
        color = str(rng.choice(_COLORS))
        shape = str(rng.choice(spec.shapes))
        material = str(rng.choice(spec.materials))
        mass = round(max(0.01, dx * dy * dz * spec.density * float(rng.uniform(0.7, 1.3))), 3)
        display = spec.category.replace("_", " ")
        uid = f"{spec.category}-{idx:03d}"
        name = f"{color.title()} {material.title()} {display.title()}"
        description = (
            f"A {color} {display} made of {material} with a {shape} profile, "
            f"about {int(round(max(dx, dy) * 100))} cm across."
        )
        tags = (spec.category, color, material, shape) + spec.group_tags
        records.append(
            AssetRecord(
                uid=uid,
                name=name,
                description=description,
                category=spec.category,
                color=color,
                shape=shape,
                material=material,
                footprint=(dx, dy, dz),
                mass=mass,
                states=spec.states,
                tags=tags,
            )
        )
    return records


def save_catalog(records: list[AssetRecord], path: str | Path) -> None:
    """Write one record per line (JSON Lines)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), separators=(",", ":")) + "\n")


def load_catalog(path: str | Path) -> list[AssetRecord]:
    path = Path(path)
    records: list[AssetRecord] = []
    seen: set[str] = set()
    with path.open("r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CatalogError(f"{path}:{lineno}: bad JSON: {exc}") from exc
            rec = AssetRecord.from_dict(data)
            if rec.uid in seen:
                raise CatalogError(f"{path}:{lineno}: duplicate uid {rec.uid}")
            seen.add(rec.uid)
            records.append(rec)
    if not records:
        raise CatalogError(f"{path}: empty catalog")
    return records
