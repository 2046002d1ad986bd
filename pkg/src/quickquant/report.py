"""Check records and deterministic CSV/JSON emission.

Floats are serialized with repr (shortest round-trip decimal); exact
rationals travel as strings like "8/3" so no precision is lost.  Output
bytes depend only on the data, never on wall time or worker count; the run
manifest is the one file allowed to carry volatile fields.
"""

from __future__ import annotations

import csv
import json
import platform
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

PROVENANCES = ("PAPER", "TRIVIAL", "DERIVED")


@dataclass(frozen=True)
class CheckReport:
    """One validation result.

    `passed` must be reproducible from (value, reference, tolerance); the
    reference string spells out the comparison (e.g. "<= 10", "3.38629 +-
    4se").  provenance echoes where the target comes from: a paper value,
    a trivial identity, or an independently derived oracle.
    """

    name: str
    value: float | str
    reference: float | str
    tolerance: float | str
    passed: bool
    provenance: str = "DERIVED"

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "value": _jsonable(self.value),
            "reference": _jsonable(self.reference),
            "tolerance": _jsonable(self.tolerance),
            "pass": self.passed,
            "provenance": self.provenance,
        }


def rational_str(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}" if q.denominator != 1 else str(q.numerator)


def _jsonable(v):
    if isinstance(v, Fraction):
        return rational_str(v)
    if isinstance(v, float):
        return v
    return v


def fmt_cell(v) -> str:
    """CSV cell text: shortest round-trip decimals for floats."""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, Fraction):
        return rational_str(v)
    return str(v)


def write_csv(path: Path | str, header: list[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)  # RFC-4180 quoting
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt_cell(v) for v in row])
    return path


def write_json(path: Path | str, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, default=_json_default)
        fh.write("\n")
    return path


def _json_default(v):
    if isinstance(v, Fraction):
        return rational_str(v)
    try:
        import numpy as np

        if isinstance(v, np.integer):
            return int(v)
        if isinstance(v, np.floating):
            return float(v)
        if isinstance(v, np.ndarray):
            return v.tolist()
    except ImportError:
        pass
    raise TypeError(f"not JSON serializable: {type(v)}")


def write_manifest(path: Path | str, command: str, config: dict, outputs: list[str],
                   wall_time_s: float) -> Path:
    """Run manifest: resolved config (seed always explicit), versions, timing."""
    import numpy
    import scipy

    from . import __version__

    manifest = {
        "command": command,
        "config": {k: _jsonable(v) for k, v in sorted(config.items())},
        "seed": config.get("seed"),
        "versions": {
            "quickquant": __version__,
            "python": sys.version.split()[0],
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "platform": platform.platform(),
        },
        "outputs": outputs,
        "wall_time_s": wall_time_s,
    }
    return write_json(path, manifest)


def checks_to_json(checks: list[CheckReport]) -> list[dict]:
    return [c.to_dict() for c in checks]
