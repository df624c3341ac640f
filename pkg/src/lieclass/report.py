"""Verification reports shared by the checking drivers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class VerificationReport:
    """Outcome of one check, optionally aggregating child checks.

    ``passed`` is the conjunction of the local verdict and all children;
    ``max_residual`` is the worst residual seen anywhere in the tree.
    """

    name: str
    passed: bool = True
    max_residual: float = 0.0
    samples: int = 0
    tol: float = 0.0
    citation: str = ""
    details: list[str] = field(default_factory=list)
    children: list["VerificationReport"] = field(default_factory=list)

    def add(self, child: "VerificationReport") -> "VerificationReport":
        self.children.append(child)
        self.passed = self.passed and child.passed
        if math.isnan(child.max_residual) or child.max_residual > self.max_residual:
            self.max_residual = child.max_residual
        self.samples += child.samples
        return child

    def fail(self, message: str) -> None:
        self.passed = False
        self.details.append(message)

    def note(self, message: str) -> None:
        self.details.append(message)

    def failures(self) -> list["VerificationReport"]:
        out = [] if self.passed or self.children else [self]
        for ch in self.children:
            out.extend(ch.failures())
        if not self.passed and self.details and self not in out:
            out.append(self)
        return out

    def summary(self, indent: int = 0) -> str:
        mark = "PASS" if self.passed else "FAIL"
        lines = [f"{' ' * indent}[{mark}] {self.name} (max residual {self.max_residual:.2e},"
                 f" {self.samples} samples)"]
        lines += [f"{' ' * (indent + 2)}- {d}" for d in self.details]
        for ch in self.children:
            lines.append(ch.summary(indent + 2))
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "max_residual": self.max_residual,
            "samples": self.samples,
            "tol": self.tol,
            "details": list(self.details),
            "children": [c.to_dict() for c in self.children],
        }


@dataclass
class SymmetryReport(VerificationReport):
    """Determining-residual check of one vector field on one equation."""

    field_id: str = ""
