from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class BoundReport:
    """One named inequality, lhs <direction> rhs, with its verdict.

    When the guard of a conditional statement is not met the check is vacuous:
    holds is True and guard_met is False.
    """

    name: str
    lhs: float
    rhs: float
    direction: str = "<="
    strict: bool = False
    holds: bool = True
    guard_met: bool = True
    anchor: str = ""
    inputs: dict = field(default_factory=dict)

    @classmethod
    def make(cls, name, lhs, rhs, direction="<=", *, strict=False, anchor="", guard_met=True,
             inputs=None, tol=1e-12):
        if direction not in ("<=", ">="):
            raise ValueError(f"direction must be '<=' or '>=', got {direction!r}")
        lhs, rhs = float(lhs), float(rhs)
        if not guard_met:
            ok = True
        else:
            ok = compare(lhs, rhs, direction, strict, tol)
        return cls(name, lhs, rhs, direction, strict, ok, guard_met, anchor, dict(inputs or {}))

    @property
    def vacuous(self) -> bool:
        return not self.guard_met

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs if self.direction == "<=" else self.lhs - self.rhs

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "direction": self.direction,
            "strict": self.strict,
            "holds": self.holds,
            "guard_met": self.guard_met,
            "anchor": self.anchor,
            "inputs": self.inputs,
        }


def compare(lhs, rhs, direction, strict=False, tol=1e-12) -> bool:
    if math.isnan(lhs) or math.isnan(rhs):
        return False
    if direction == "<=":
        return lhs < rhs + tol if strict else lhs <= rhs + tol
    return lhs > rhs - tol if strict else lhs >= rhs - tol


def all_hold(reports) -> bool:
    return all(r.holds for r in reports)
