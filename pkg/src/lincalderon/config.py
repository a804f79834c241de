"""Experiment configuration schema (JSON) and loading with located errors."""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .eikonal import metric_from_spec
from .grid import make_grid, profile_from_spec
from .symbols import ProbeParams

DEFAULT_CONFIG = Path(__file__).with_name("default_config.json")


class ConfigError(ValueError):
    """Malformed or invalid configuration; carries the offending line when known."""

    def __init__(self, message: str, path=None, line: Optional[int] = None):
        where = f"{path}" if path else "<config>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")
        self.line = line


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


def _check_profile(v: dict) -> dict:
    try:
        profile_from_spec(v)
    except (TypeError, KeyError, ValueError) as exc:
        raise ValueError(f"invalid profile spec {v}: {exc}") from None
    return v


class GridBlock(_Block):
    n_boundary_modes: int = Field(64, ge=8, le=4096)
    L: float = Field(4.0, gt=0, le=50)
    n_depth_points: int = Field(64, ge=8, le=1024)
    depth_rule: Literal["chebyshev", "uniform"] = "chebyshev"

    def build(self):
        return make_grid(self.n_boundary_modes, self.L, self.n_depth_points, self.depth_rule)


class ProbeBlock(_Block):
    boundary_points: list[float] = [0.0]
    tau_min: float = Field(4.0, ge=1)
    tau_max: float = Field(256.0, ge=1)
    n_frequencies: int = Field(64, ge=3, le=4096)
    h: Optional[float] = Field(None, gt=0, le=1)
    gaussian_width: float = Field(4.0, gt=0)
    cutoff_radius: float = Field(10.0, gt=2)

    @field_validator("tau_max")
    @classmethod
    def _order(cls, v, info):
        lo = info.data.get("tau_min")
        if lo is not None and v <= lo:
            raise ValueError("tau_max must exceed tau_min")
        return v

    @property
    def params(self) -> ProbeParams:
        return ProbeParams(self.h, self.gaussian_width, self.cutoff_radius)

    @property
    def frequencies(self) -> np.ndarray:
        return np.geomspace(self.tau_min, self.tau_max, self.n_frequencies)


class ForwardBlock(_Block):
    t: float = Field(1e-3, gt=0, le=1)


class LaplaceFitBlock(_Block):
    n_terms: int = Field(20, ge=1, le=60)
    method: Literal["lstsq", "richardson"] = "lstsq"
    clas_constant: float = Field(1.0, gt=0)


class ReconstructBlock(_Block):
    n_terms: int = Field(20, ge=1, le=60)
    radius: float = Field(0.3, gt=0)
    n_output_depths: int = Field(61, ge=2, le=10000)
    clas_constant: Optional[float] = Field(None, gt=0)


class InjectivityBlock(_Block):
    grid: GridBlock = GridBlock(n_boundary_modes=64, L=4.0, n_depth_points=48)
    boundary_points: list[float] = [0.0, 2.0943951023931953, 4.1887902047863905]
    frequencies: list[float] = [4.0, 6.0, 8.0, 12.0, 16.0]
    tangential_modes: list[int] = [0, 1, 2]
    depth_monomials: list[int] = [0, 1, 2]
    envelope_rate: float = Field(1.0, gt=0)


class EikonalBlock(_Block):
    metric: dict = {"kind": "depth", "epsilon": 0.3}
    xi: float = 1.0
    order: int = Field(8, ge=1, le=30)
    y_n: float = Field(0.1, gt=0, le=1)

    @field_validator("metric")
    @classmethod
    def _metric(cls, v):
        try:
            metric_from_spec(v)
        except (TypeError, ValueError) as exc:
            raise ValueError(f"invalid metric spec {v}: {exc}") from None
        return v


class FbiBlock(_Block):
    sample: Literal["gaussian", "cut", "cut_exp", "zero"] = "cut"
    half_width: float = Field(3.0, gt=0, le=20)
    h_ladder: list[float] = [0.04, 0.02, 0.01]
    points: list[list[float]] = [[0.0, 0.0, 0.5, 0.0], [0.0, 0.0, -0.5, 0.0],
                                 [0.0, 0.0, 1.0, 0.0], [0.0, 0.0, -1.0, 0.0]]

    @field_validator("points")
    @classmethod
    def _points(cls, v):
        for p in v:
            if len(p) != 4:
                raise ValueError("each point is [re_z1, im_z1, re_z2, im_z2]")
        return v

    @field_validator("h_ladder")
    @classmethod
    def _ladder(cls, v):
        if len(v) < 3 or any(not 0 < h <= 1 for h in v):
            raise ValueError("h_ladder needs at least three values in (0, 1]")
        return v


class ExperimentConfig(_Block):
    grid: GridBlock = GridBlock()
    potential: dict = {"kind": "zero"}
    perturbation: dict = {"kind": "exp", "amplitude": 1.0, "rate": 1.0}
    probe: ProbeBlock = ProbeBlock()
    forward: ForwardBlock = ForwardBlock()
    laplace_fit: LaplaceFitBlock = LaplaceFitBlock()
    reconstruct: ReconstructBlock = ReconstructBlock()
    injectivity: InjectivityBlock = InjectivityBlock()
    eikonal: EikonalBlock = EikonalBlock()
    fbi: FbiBlock = FbiBlock()

    @field_validator("potential", "perturbation")
    @classmethod
    def _profiles(cls, v):
        return _check_profile(v)

    def potential_profile(self):
        p = profile_from_spec(self.potential)
        return None if self.potential.get("kind") == "zero" else p

    def perturbation_profile(self):
        return profile_from_spec(self.perturbation)


def _key_line(text: str, loc) -> Optional[int]:
    """Line of the last string key in a validation location, if it occurs in the text."""
    keys = [k for k in loc if isinstance(k, str)]
    for key in reversed(keys):
        m = re.search(r'"%s"\s*:' % re.escape(key), text)
        if m:
            return text.count("\n", 0, m.start()) + 1
    return None


def load_config(path=None) -> ExperimentConfig:
    """Parse and validate a JSON config; the shipped default when path is None.

    Raises:
        ConfigError: unreadable file, JSON syntax error or schema violation.
    """
    path = Path(path) if path is not None else DEFAULT_CONFIG
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"JSON syntax error: {exc.msg}", path, exc.lineno) from None
    if not isinstance(raw, dict):
        raise ConfigError("top level must be an object", path, 1)
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = ".".join(str(p) for p in err["loc"])
        raise ConfigError(f"{loc}: {err['msg']}", path, _key_line(text, err["loc"])) from None
