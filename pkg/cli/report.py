"""Pass/fail check results printed by `kura verify`."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence


@dataclass
class CheckResult:
    """Uniform check result structure."""

    name: str
    passed: bool
    message: str
    metrics: Dict[str, Any] = field(default_factory=dict)

    def format(self) -> str:
        """One status line plus indented metrics."""
        status = "PASS" if self.passed else "FAIL"
        lines = [f"{status} {self.name}: {self.message}"]
        for key, value in self.metrics.items():
            lines.append(f"    {key}: {value}")
        return "\n".join(lines)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "message": self.message,
            "metrics": self.metrics,
        }


def format_report(title: str, results: List[CheckResult], header: Sequence[str] = ()) -> str:
    """Text report: "# " header lines, title, one block per check, summary line."""
    passed = sum(1 for r in results if r.passed)
    lines = [f"# {h}" for h in header]
    lines.extend([title, "=" * len(title)])
    lines.extend(r.format() for r in results)
    lines.append(f"{passed}/{len(results)} checks passed")
    return "\n".join(lines) + "\n"
