"""Structured pass/fail reports shared by the verification suites.

Two classes of checks exist.  *Assert*-class checks test that this code and
proved mathematical facts hold; a failure means something is wrong with the
implementation (or its tolerances).  *Claim*-class checks test conjectured
inequalities against numerics; a violation is a legitimate finding, reported
as ``violated-claim`` rather than as a failure.
"""

from __future__ import annotations

from dataclasses import dataclass, field

PASS = "pass"
FAIL = "fail"
VIOLATED_CLAIM = "violated-claim"

SCHEMA_VERSION = "1"


@dataclass(frozen=True)
class Check:
    name: str
    status: str
    margin: float
    detail: str = ""

    @property
    def ok(self) -> bool:
        return self.status == PASS


@dataclass
class Report:
    suite: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, ok: bool, margin: float, claim: bool = False,
            detail: str = "") -> Check:
        if ok:
            status = PASS
        else:
            status = VIOLATED_CLAIM if claim else FAIL
        check = Check(name, status, float(margin), detail)
        self.checks.append(check)
        return check

    def extend(self, other: "Report", prefix: str = "") -> None:
        if not prefix:
            self.checks.extend(other.checks)
            return
        for c in other.checks:
            self.checks.append(Check(prefix + c.name, c.status, c.margin, c.detail))

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == FAIL]

    @property
    def findings(self) -> list[Check]:
        return [c for c in self.checks if c.status == VIOLATED_CLAIM]

    @property
    def passed(self) -> bool:
        """True when no assert-class check failed (claim findings allowed)."""
        return not self.failures

    @property
    def all_ok(self) -> bool:
        return all(c.ok for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "suite": self.suite,
            "passed": self.passed,
            "claims_violated": bool(self.findings),
            "checks": [
                {
                    "name": c.name,
                    "status": c.status,
                    "margin": c.margin,
                    "detail": c.detail,
                }
                for c in self.checks
            ],
        }
