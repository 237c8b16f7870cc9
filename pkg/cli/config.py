"""Validated run configuration for the kura command line.

A RunConfig is built from the command-line flags and checked before any
work starts: required parameters per command, a seed for the stochastic
commands, positive step sizes, a parseable grid and an allowed format.
"""

import math
import re
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from kuramoto_tori.defaults import (
    DEFAULT_DT,
    DEFAULT_T_END,
    MEMBERSHIP_TOL,
    NEWTON_TOL,
    PROBE_DT,
    PROBE_T_END,
    PROBE_TRIALS,
)

Command = Literal["gen", "verify", "scan", "equilibria", "hetero"]

# Allowed output formats per command; the first entry is the default
FORMATS: Dict[str, Tuple[str, ...]] = {
    "gen": ("edgelist", "json"),
    "verify": ("text", "json"),
    "scan": ("csv", "json", "parquet"),
    "equilibria": ("json", "csv", "parquet"),
    "hetero": ("dot", "json"),
}

STOCHASTIC_COMMANDS = frozenset({"equilibria", "hetero"})

DEFAULT_GRID = "0:2pi:256"
DEFAULT_CENSUS_SEEDS = 2000

_PI_TOKEN = re.compile(r"^(?P<coef>[+-]?(\d+(\.\d*)?|\.\d+)?)\*?pi(/(?P<den>\d+(\.\d*)?))?$")


def parse_angle(token: str) -> float:
    """Parse a radian value; accepts pi literals such as "pi", "2pi", "-pi/2", "2*pi".

    Raises:
        ValueError: If the token is not a number or pi expression.
    """
    t = token.strip().lower().replace("π", "pi").replace(" ", "")
    m = _PI_TOKEN.match(t)
    if m:
        coef_text = m.group("coef")
        coef = {"": 1.0, "+": 1.0, "-": -1.0}.get(coef_text)
        if coef is None:
            coef = float(coef_text)
        den = float(m.group("den")) if m.group("den") else 1.0
        return coef * math.pi / den
    try:
        return float(t)
    except ValueError as e:
        raise ValueError(f"not an angle: '{token}'") from e


def parse_grid(text: str) -> List[float]:
    """Grid "start:end:count" as count points on [start, end), end excluded.

    Raises:
        ValueError: On a malformed grid or a non-positive count.
    """
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must be 'start:end:count', got '{text}'")
    start, end = parse_angle(parts[0]), parse_angle(parts[1])
    try:
        count = int(parts[2])
    except ValueError as e:
        raise ValueError(f"grid count must be an integer, got '{parts[2]}'") from e
    if count < 1:
        raise ValueError(f"grid count must be >= 1, got {count}")
    return [float(x) for x in np.linspace(start, end, count, endpoint=False)]


class RunConfig(BaseModel):
    """One command invocation.

    Attributes:
        command: Which batch command to run.
        graph: Family string (see parse_family) or path to an edge-list file.
        dt: Integration step.
        t_end: Integration horizon.
        tol: Command tolerance (torus residual, Newton residual or endpoint membership).
        seed: Random seed, required for equilibria and hetero.
        trials: Random seeds (equilibria) or perturbations per component (hetero).
        grid: Shift grid "start:end:count" for scan.
        out: Output path; stdout when omitted.
        format: Output format, see FORMATS.
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: Command
    graph: str = Field(min_length=1)
    dt: Optional[float] = Field(default=None, gt=0)
    t_end: Optional[float] = Field(default=None, gt=0)
    tol: Optional[float] = Field(default=None, gt=0)
    seed: Optional[int] = Field(default=None, ge=0)
    trials: Optional[int] = Field(default=None, ge=1)
    grid: Optional[str] = None
    out: Optional[str] = None
    format: Optional[str] = None

    @field_validator("grid")
    @classmethod
    def _grid_parses(cls, v: Optional[str]) -> Optional[str]:
        if v is not None:
            parse_grid(v)
        return v

    @model_validator(mode="after")
    def _per_command(self) -> "RunConfig":
        if self.command in STOCHASTIC_COMMANDS and self.seed is None:
            raise ValueError(f"--seed is required for '{self.command}'")
        allowed = FORMATS[self.command]
        if self.format is not None and self.format not in allowed:
            raise ValueError(f"format '{self.format}' not allowed for '{self.command}', use one of {allowed}")
        if self.grid is not None and self.command != "scan":
            raise ValueError("--grid only applies to 'scan'")
        if self.resolved_format == "parquet" and self.out is None:
            raise ValueError("parquet output needs --out")
        return self

    @property
    def resolved_format(self) -> str:
        """Requested format or the command's default."""
        return self.format or FORMATS[self.command][0]

    @property
    def grid_values(self) -> List[float]:
        """Parsed scan grid."""
        return parse_grid(self.grid or DEFAULT_GRID)

    @property
    def graph_path(self) -> Optional[Path]:
        """Edge-list path when graph names an existing file."""
        p = Path(self.graph)
        return p if p.is_file() else None

    def integration(self) -> Tuple[float, float]:
        """(dt, t_end) with per-command defaults."""
        if self.command == "hetero":
            return self.dt or PROBE_DT, self.t_end or PROBE_T_END
        return self.dt or DEFAULT_DT, self.t_end or DEFAULT_T_END

    def tolerance(self, default: float) -> float:
        """tol or the given default."""
        return self.tol if self.tol is not None else default

    def trial_count(self) -> int:
        """trials with per-command defaults."""
        if self.trials is not None:
            return self.trials
        return PROBE_TRIALS if self.command == "hetero" else DEFAULT_CENSUS_SEEDS

    def echo(self) -> Dict[str, Any]:
        """Configuration echo written into output headers.

        The destination is left out so the same run writes the same bytes
        wherever it goes.
        """
        data = self.model_dump(exclude_none=True, exclude={"out"})
        data["format"] = self.resolved_format
        return data


# Default tolerances per command, used when --tol is omitted
DEFAULT_TOL: Dict[str, float] = {
    "verify": 1e-10,
    "equilibria": NEWTON_TOL,
    "hetero": MEMBERSHIP_TOL,
    "scan": 1e-8,
    "gen": 1e-8,
}
