"""Uniform result records for inequality and property checks."""

from __future__ import annotations

from dataclasses import dataclass, field

REL_TOL = 1e-9  # default relative slack tolerance on max(1, |rhs|)

PASS = "pass"
VIOLATED = "violated"
NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class Hypothesis:
    """One measured theorem hypothesis with its comparison direction."""

    label: str
    measured: float
    threshold: float
    relation: str = "<="
    satisfied: bool = True

    def to_dict(self) -> dict:
        return {
            "label": self.label,
            "measured": self.measured,
            "threshold": self.threshold,
            "relation": self.relation,
            "satisfied": self.satisfied,
        }


def check_hypothesis(
    label: str,
    measured: float,
    threshold: float,
    relation: str = "<=",
    tol: float = REL_TOL,
) -> Hypothesis:
    """Compare a measured hypothesis value against its threshold.

    Equality cases pass: the comparison is padded by ``tol`` relative to
    max(1, |threshold|) so exact algebraic equalities survive rounding.
    """
    pad = tol * max(1.0, abs(threshold))
    if relation == "<=":
        ok = measured <= threshold + pad
    elif relation == ">=":
        ok = measured >= threshold - pad
    else:
        raise ValueError(f"unknown relation {relation!r}")
    return Hypothesis(label, float(measured), float(threshold), relation, bool(ok))


@dataclass(frozen=True)
class InequalityReport:
    """Outcome of one theorem check: hypotheses, both sides, slack, verdict.

    A failed hypothesis makes the conclusion "not applicable", never
    "violated": the theorems are conditional.
    """

    name: str
    hypotheses: tuple[Hypothesis, ...]
    lhs: float
    rhs: float
    slack: float
    passed: bool
    verdict: str
    tags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": "inequality",
            "name": self.name,
            "hypotheses": [h.to_dict() for h in self.hypotheses],
            "lhs": self.lhs,
            "rhs": self.rhs,
            "slack": self.slack,
            "passed": self.passed,
            "verdict": self.verdict,
            "tags": self.tags,
        }


def build_inequality_report(
    name: str,
    lhs: float,
    rhs: float,
    hypotheses=(),
    rel_tol: float = REL_TOL,
    tags: dict | None = None,
) -> InequalityReport:
    lhs = float(lhs)
    rhs = float(rhs)
    slack = rhs - lhs
    hyps = tuple(hypotheses)
    hyp_ok = all(h.satisfied for h in hyps)
    slack_ok = slack >= -rel_tol * max(1.0, abs(rhs))
    if not hyp_ok:
        verdict = NOT_APPLICABLE
    elif slack_ok:
        verdict = PASS
    else:
        verdict = VIOLATED
    return InequalityReport(
        name=name,
        hypotheses=hyps,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        passed=verdict == PASS,
        verdict=verdict,
        tags=dict(tags or {}),
    )


@dataclass(frozen=True)
class CheckReport:
    """Outcome of one property check: worst measured discrepancy vs threshold."""

    name: str
    passed: bool
    measured: float
    threshold: float
    applicable: bool = True
    notes: tuple[str, ...] = ()
    data: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "kind": "check",
            "name": self.name,
            "passed": self.passed,
            "measured": self.measured,
            "threshold": self.threshold,
            "applicable": self.applicable,
            "notes": list(self.notes),
            "data": self.data,
        }


def build_check_report(
    name: str,
    measured: float,
    threshold: float,
    applicable: bool = True,
    notes=(),
    data: dict | None = None,
) -> CheckReport:
    measured = float(measured)
    threshold = float(threshold)
    return CheckReport(
        name=name,
        passed=bool(applicable) and measured <= threshold,
        measured=measured,
        threshold=threshold,
        applicable=bool(applicable),
        notes=tuple(notes),
        data=dict(data or {}),
    )


def record_failed(record: dict) -> bool:
    """Whether one serialized report line counts as a suite failure.

    Inapplicable conditional checks do not fail: a theorem whose
    hypotheses do not hold has nothing to violate.
    """
    kind = record.get("kind")
    if kind == "inequality":
        return record.get("verdict") == VIOLATED
    if kind == "check":
        return bool(record.get("applicable")) and not record.get("passed")
    return not record.get("passed", False)
