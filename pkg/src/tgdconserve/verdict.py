"""Three-valued verdicts with JSON-ready certificates."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Iterable

from .model import Atom, Instance, const_key, fact_key


class Value(str, Enum):
    HOLDS = "holds"
    FAILS = "fails"
    UNKNOWN = "unknown"


EXIT_CODES = {Value.HOLDS: 0, Value.FAILS: 1, Value.UNKNOWN: 2}


@dataclass
class Verdict:
    value: Value
    certificate: dict | None = None
    budget: dict = field(default_factory=dict)
    # raw python objects behind the certificate; never serialised
    witness: Any = field(default=None, compare=False, repr=False)

    @property
    def holds(self) -> bool:
        return self.value is Value.HOLDS

    @property
    def fails(self) -> bool:
        return self.value is Value.FAILS

    @property
    def unknown(self) -> bool:
        return self.value is Value.UNKNOWN

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.value]

    def to_dict(self) -> dict:
        return {
            "verdict": self.value.value,
            "certificate": self.certificate,
            "budget": self.budget,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def facts_json(facts: Iterable[Atom]) -> list[str]:
    return [str(f) for f in sorted(set(facts), key=fact_key)]


def mapping_json(mapping: dict) -> dict:
    return {str(k): str(mapping[k]) for k in sorted(mapping, key=const_key)}


def instance_json(inst: Instance) -> list[str]:
    return facts_json(inst.facts)
