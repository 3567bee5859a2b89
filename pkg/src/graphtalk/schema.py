"""Graph schema model, file format, and the bundled presets.

Schema files are line oriented::

    # comment
    label Person {name: String}
    rel ACTED_IN (Person -> Movie)

Property types are String, Integer, Float, or Boolean. Relationship
direction is always from -> to.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Set, Tuple, Union

from .errors import SchemaError

PROP_TYPES = {"String", "Integer", "Float", "Boolean"}

PRESET_NAMES = ("movie", "mardi", "hyena")


@dataclass(frozen=True)
class LabelDef:
    label: str
    properties: Tuple[Tuple[str, str], ...] = ()  # (name, type), declaration order

    def prop_type(self, name: str) -> Optional[str]:
        for prop, type_name in self.properties:
            if prop == name:
                return type_name
        return None


@dataclass(frozen=True)
class RelDef:
    rel_type: str
    from_label: str
    to_label: str


@dataclass(frozen=True)
class GraphSchema:
    name: str
    node_labels: Tuple[LabelDef, ...]
    rel_types: Tuple[RelDef, ...]
    _by_label: Dict[str, LabelDef] = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        for label_def in self.node_labels:
            seen = set()
            for prop, _ in label_def.properties:
                if prop in seen:
                    raise SchemaError(f"duplicate property {prop!r} on label {label_def.label}")
                seen.add(prop)
        labels = [d.label for d in self.node_labels]
        if len(labels) != len(set(labels)):
            raise SchemaError("duplicate node label definitions")
        known = set(labels)
        seen_rels = set()
        for rel in self.rel_types:
            for endpoint in (rel.from_label, rel.to_label):
                if endpoint not in known:
                    raise SchemaError(
                        f"relationship {rel.rel_type} references unknown label {endpoint!r}"
                    )
            triple = (rel.rel_type, rel.from_label, rel.to_label)
            if triple in seen_rels:
                raise SchemaError(f"duplicate relationship definition {triple}")
            seen_rels.add(triple)
        object.__setattr__(self, "_by_label", {d.label: d for d in self.node_labels})

    def labels(self) -> Set[str]:
        return set(self._by_label)

    def label_def(self, label: str) -> Optional[LabelDef]:
        return self._by_label.get(label)

    def prop_type(self, label: str, prop: str) -> Optional[str]:
        label_def = self._by_label.get(label)
        return label_def.prop_type(prop) if label_def else None


def rel_lookup(schema: GraphSchema, rel_type: str) -> Set[Tuple[str, str]]:
    """Legal (from_label, to_label) pairs for a relationship type.

    Empty when the type is unknown; matching is case-sensitive.
    """
    return {(r.from_label, r.to_label) for r in schema.rel_types if r.rel_type == rel_type}


_LABEL_RE = re.compile(r"^label\s+(\w+)\s*(\{(.*)\})?\s*$")
_REL_RE = re.compile(r"^rel\s+(\w+)\s*\(\s*(\w+)\s*->\s*(\w+)\s*\)\s*$")


def parse_schema(text: str, name: str) -> GraphSchema:
    labels: list[LabelDef] = []
    rels: list[RelDef] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        match = _LABEL_RE.match(line)
        if match:
            props: list[Tuple[str, str]] = []
            body = match.group(3) or ""
            if body.strip():
                for item in body.split(","):
                    if ":" not in item:
                        raise SchemaError(f"line {lineno}: malformed property {item.strip()!r}")
                    prop, type_name = (part.strip() for part in item.split(":", 1))
                    if type_name not in PROP_TYPES:
                        raise SchemaError(f"line {lineno}: unknown property type {type_name!r}")
                    props.append((prop, type_name))
            labels.append(LabelDef(match.group(1), tuple(props)))
            continue
        match = _REL_RE.match(line)
        if match:
            rels.append(RelDef(match.group(1), match.group(2), match.group(3)))
            continue
        raise SchemaError(f"line {lineno}: cannot parse schema line {raw!r}")
    return GraphSchema(name, tuple(labels), tuple(rels))


def load_schema(path: Union[str, Path]) -> GraphSchema:
    path = Path(path)
    return parse_schema(path.read_text(encoding="utf-8"), path.stem)


def load_preset(name: str) -> GraphSchema:
    if name not in PRESET_NAMES:
        raise SchemaError(f"unknown schema preset {name!r}; available: {', '.join(PRESET_NAMES)}")
    text = resources.files("graphtalk.data.schemas").joinpath(name).read_text(encoding="utf-8")
    return parse_schema(text, name)


def schema_prompt_block(schema: GraphSchema) -> str:
    """Deterministic text block injected into generation prompts.

    Node labels with their properties first, then one line per
    relationship, both sorted lexicographically.
    """
    lines = []
    for label_def in sorted(schema.node_labels, key=lambda d: d.label):
        if label_def.properties:
            props = ", ".join(f"{p}: {t}" for p, t in sorted(label_def.properties))
            lines.append(f"{label_def.label} {{{props}}}")
        else:
            lines.append(label_def.label)
    for rel in sorted(schema.rel_types, key=lambda r: (r.rel_type, r.from_label, r.to_label)):
        lines.append(f"(:{rel.from_label})-[:{rel.rel_type}]->(:{rel.to_label})")
    return "\n".join(lines)


# --- plausible value domains ------------------------------------------------
#
# Per-preset registry backing the illogical-value check: numeric ranges a
# property value can sensibly take, and text properties that should never
# be compared against numbers.


@dataclass(frozen=True)
class NumericRange:
    low: float
    high: float

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high


NON_NUMERIC_TEXT = "non-numeric-text"

Domain = Union[NumericRange, str]

_VALUE_DOMAINS: Dict[str, Dict[Tuple[str, str], Domain]] = {
    "movie": {
        ("Movie", "release_year"): NumericRange(1870, 2100),
        ("Movie", "title"): NON_NUMERIC_TEXT,
        ("Person", "name"): NON_NUMERIC_TEXT,
        ("Critic", "name"): NON_NUMERIC_TEXT,
        ("City", "name"): NON_NUMERIC_TEXT,
    },
}


def value_domain(schema_name: str, label: str, prop: str) -> Optional[Domain]:
    return _VALUE_DOMAINS.get(schema_name, {}).get((label, prop))
