import logging
import math
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import toml
from pydantic import BaseModel, Field, field_validator, model_validator

from src.config.settings import get_settings
from src.surfactant.params import SurfactantParams
from src.twophase.eos import EquationOfState
from src.twophase.params import FluidParams, NewtonParams, NitscheParams, StabParams

logger = logging.getLogger(__name__)

SURFACTANT_ONLY_CASES = ("example1", "example1_nonconservative", "stretching_circle")


class RunConfig(BaseModel):
    """Resolved configuration of one run: mesh, time grid, physics and output"""
    case: str
    nx: int = Field(40, gt=0)
    ny: int = Field(40, gt=0)
    refine_levels: int = Field(0, ge=0)
    refine_box: Optional[Tuple[float, float, float, float]] = None
    dt: Optional[float] = Field(None, gt=0.0)
    dt_factor: Optional[float] = Field(None, gt=0.0)
    t_final: float = Field(..., gt=0.0)
    time_degree: int = 1
    with_surfactant: bool = True
    level_set: Literal["advected", "prescribed"] = "advected"
    c_sd: float = Field(1.0, gt=0.0)
    geometry_updates: int = Field(0, ge=0)
    redistance: bool = False

    fluid: Optional[FluidParams] = None
    eos: Optional[EquationOfState] = None
    surfactant: SurfactantParams = Field(default_factory=SurfactantParams)
    stab: StabParams = Field(default_factory=StabParams)
    nitsche: NitscheParams = Field(default_factory=NitscheParams)
    newton: NewtonParams = Field(default_factory=NewtonParams)
    walls: Dict[str, Literal["no_slip", "slip"]] = Field(default_factory=dict)

    out: Optional[str] = None
    vtk_every: int = Field(0, ge=0)
    meshes: List[int] = Field(default_factory=list)

    @field_validator('case')
    @classmethod
    def check_case(cls, v):
        from src.bench.cases import CaseFactory
        if v not in CaseFactory.get_available_cases():
            raise ValueError(f"Case '{v}' not supported. Available cases: {CaseFactory.get_available_cases()}")
        return v

    @field_validator('time_degree')
    @classmethod
    def check_time_degree(cls, v):
        if v not in (0, 1):
            raise ValueError(f"time_degree must be 0 or 1, got {v}")
        return v

    @field_validator('walls')
    @classmethod
    def check_walls(cls, v):
        unknown = set(v) - {"left", "right", "bottom", "top"}
        if unknown:
            raise ValueError(f"Unknown wall sides {sorted(unknown)}")
        return v

    @model_validator(mode='after')
    def resolve(self):
        if self.dt is None and self.dt_factor is None:
            self.dt_factor = 0.25
        if "max_iter" not in self.newton.model_fields_set:
            self.newton = self.newton.model_copy(update={"max_iter": get_settings().NEWTON_MAX_ITER})
        if self.surfactant.time_degree != self.time_degree:
            self.surfactant = self.surfactant.model_copy(update={"time_degree": self.time_degree})
        if self.is_flow and (self.fluid is None or self.eos is None):
            raise ValueError(f"Flow case '{self.case}' needs [fluid] and [eos] tables")
        return self

    @property
    def is_flow(self) -> bool:
        return self.case not in SURFACTANT_ONLY_CASES

    @property
    def output_dir(self) -> Path:
        return Path(self.out or Path(get_settings().OUTPUT_DIR) / self.case)

    def time_step(self, h: float) -> float:
        """Requested step: dt, or dt_factor * h when no absolute dt is set"""
        return self.dt if self.dt is not None else self.dt_factor * h

    def time_grid(self, h: float) -> np.ndarray:
        """Uniform grid on [0, t_final] whose step does not exceed time_step(h)"""
        steps = max(1, math.ceil(self.t_final / self.time_step(h) - 1e-9))
        return np.linspace(0.0, self.t_final, steps + 1)


def merge_overrides(base: Dict[str, Any], overrides: Dict[str, Any]) -> Dict[str, Any]:
    """Recursive dict merge; None values in ``overrides`` are ignored"""
    merged = dict(base)
    for key, value in overrides.items():
        if value is None:
            continue
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_overrides(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_run_config(case: str, config_file: Optional[str] = None,
                    overrides: Optional[Dict[str, Any]] = None) -> RunConfig:
    """
    Build the RunConfig of a case from a TOML file and CLI overrides

    Args:
        case: Registered case name
        config_file: TOML file with [cases.<name>] tables (Settings.CONFIG_FILE by default)
        overrides: Nested values replacing the file's (e.g. {"eos": {"beta": 0.25}})

    Raises:
        ValueError: If the file has no table for the case or a value is invalid
    """
    path = config_file or get_settings().CONFIG_FILE
    data = toml.load(path)
    cases = data.get("cases", {})
    if case not in cases:
        raise ValueError(f"Case '{case}' has no table in {path}. Available cases: {list(cases.keys())}")
    merged = merge_overrides(cases[case], overrides or {})
    merged["case"] = case
    config = RunConfig(**merged)
    logger.debug("Run configuration for '%s' from %s: %s", case, path, config.model_dump())
    return config
