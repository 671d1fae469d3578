"""Evidence rows and the CSV/JSON output contract of the scenario runner."""

from __future__ import annotations

import hashlib
import json
import pathlib
from dataclasses import dataclass


@dataclass(frozen=True)
class EvidenceRow:
    """One verifiable measurement: pass iff the check holds from its own fields.

    ``kind`` is "abs" (|measured - target| <= tol), "bound"
    (measured <= target + tol) or "floor" (measured >= target - tol).
    Non-default kinds are echoed into the params column so every CSV row
    stays self-contained.
    """

    scenario: str
    params: dict
    measured: float
    target: float
    tol: float
    kind: str = "abs"

    @property
    def passed(self):
        if self.kind == "bound":
            return self.measured <= self.target + self.tol
        if self.kind == "floor":
            return self.measured >= self.target - self.tol
        return abs(self.measured - self.target) <= self.tol


def _format(value):
    if isinstance(value, float):
        return repr(value)
    return str(value)


def params_string(params):
    return ";".join(f"{k}={_format(v)}" for k, v in params.items())


def write_csv(path, rows):
    lines = ["scenario,params,measured,target,tol,pass"]
    for row in rows:
        params = dict(row.params)
        if row.kind != "abs":
            params.setdefault("kind", row.kind)
        lines.append(
            ",".join(
                [
                    row.scenario,
                    params_string(params),
                    repr(float(row.measured)),
                    repr(float(row.target)),
                    repr(float(row.tol)),
                    str(row.passed),
                ]
            )
        )
    pathlib.Path(path).write_text("\n".join(lines) + "\n")


def module_hashes():
    """Stable content hashes of every module in the package."""
    package_dir = pathlib.Path(__file__).parent
    hashes = {}
    for source in sorted(package_dir.glob("*.py")):
        hashes[source.name] = hashlib.sha256(source.read_bytes()).hexdigest()[:16]
    return hashes


def write_summary(path, scenario, rows, config, seed):
    summary = {
        "scenario": scenario,
        "rows": len(rows),
        "passed": sum(1 for r in rows if r.passed),
        "all_pass": all(r.passed for r in rows),
        "seed": seed,
        "config": config.raw,
        "module_hashes": module_hashes(),
    }
    pathlib.Path(path).write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary
