"""Tri-state check results and their aggregate."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List


class CheckStatus(str, Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class CheckItem:
    check: str
    name: str
    status: CheckStatus
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"check": self.check, "name": self.name, "status": self.status.value, **self.details}


@dataclass
class LabReport:
    items: List[CheckItem] = field(default_factory=list)
    bounds: List[Dict[str, Any]] = field(default_factory=list)
    inputs: Dict[str, Any] = field(default_factory=dict)

    def extend(self, items) -> None:
        self.items.extend(items)

    @property
    def hard_failures(self) -> List[CheckItem]:
        return [item for item in self.items if item.status is CheckStatus.FAIL]

    @property
    def status(self) -> CheckStatus:
        if self.hard_failures:
            return CheckStatus.FAIL
        if any(item.status is CheckStatus.INCONCLUSIVE for item in self.items):
            return CheckStatus.INCONCLUSIVE
        return CheckStatus.PASS

    def counts(self) -> Dict[str, int]:
        out = {status.value: 0 for status in CheckStatus}
        for item in self.items:
            out[item.status.value] += 1
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "counts": self.counts(),
            "inputs": self.inputs,
            "bounds": self.bounds,
            "checks": [item.to_dict() for item in self.items],
        }
