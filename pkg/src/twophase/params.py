from typing import Callable, Dict, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

BoundaryData = Callable[[float, np.ndarray], np.ndarray]


class FluidParams(BaseModel):
    """Densities, viscosities and body force of the two phases (phase 2 is the drop)"""
    rho1: float = Field(..., gt=0.0)
    rho2: float = Field(..., gt=0.0)
    mu1: float = Field(..., gt=0.0)
    mu2: float = Field(..., gt=0.0)
    gravity: Tuple[float, float] = (0.0, 0.0)
    convection: bool = True

    def rho(self, phase: int) -> float:
        return self.rho1 if phase == 1 else self.rho2

    def mu(self, phase: int) -> float:
        return self.mu1 if phase == 1 else self.mu2

    def body_force(self, phase: int, t: float, points: np.ndarray) -> np.ndarray:
        """f = rho_i g"""
        return np.broadcast_to(self.rho(phase) * np.asarray(self.gravity), (len(points), 2))


class WallCondition(BaseModel):
    """
    Velocity condition on one side of the domain

    ``no_slip`` imposes u = g, ``slip`` imposes u.n = g.n with zero tangential
    traction. ``data`` is g(t, x); zero when omitted.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    kind: Literal["no_slip", "slip"] = "no_slip"
    data: Optional[BoundaryData] = None

    def values(self, t: float, points: np.ndarray) -> np.ndarray:
        if self.data is None:
            return np.zeros((len(points), 2))
        return np.asarray(self.data(t, points), dtype=float).reshape(len(points), 2)


def default_walls() -> Dict[str, WallCondition]:
    return {side: WallCondition() for side in ("left", "right", "bottom", "top")}


class NitscheParams(BaseModel):
    """
    Nitsche penalties and interface averaging weights

    lambda_Gamma = c_lambda (2 mu1 mu2 / (mu1 + mu2)) / h,
    lambda_boundary = c_b mu1 / h. Weights default to the viscosity-harmonic
    choice omega1 = mu2 / (mu1 + mu2), omega2 = mu1 / (mu1 + mu2).
    """
    c_lambda: float = Field(100.0, gt=0.0)
    c_b: float = Field(100.0, gt=0.0)
    omega1: Optional[float] = Field(None, gt=0.0, lt=1.0)

    def weights(self, fluid: FluidParams) -> Tuple[float, float]:
        if self.omega1 is not None:
            return self.omega1, 1.0 - self.omega1
        total = fluid.mu1 + fluid.mu2
        return fluid.mu2 / total, fluid.mu1 / total

    def interface_penalty(self, fluid: FluidParams, h: np.ndarray) -> np.ndarray:
        harmonic = 2.0 * fluid.mu1 * fluid.mu2 / (fluid.mu1 + fluid.mu2)
        return self.c_lambda * harmonic / h

    def boundary_penalty(self, fluid: FluidParams, h: np.ndarray) -> np.ndarray:
        return self.c_b * fluid.mu1 / h


class StabParams(BaseModel):
    """Ghost-penalty constants of pressure and velocity"""
    c_p: float = Field(1e-2, gt=0.0)
    c_u1: float = Field(1e-2, gt=0.0)
    c_u2: float = Field(1e-2, gt=0.0)


class NewtonParams(BaseModel):
    """
    Newton stopping rule

    The increment norm is the root-sum-square of the RMS increments of u, p
    and w divided by their scales (velocity_scale, sigma0 / length_scale,
    surfactant_scale).
    """
    tolerance: float = Field(1e-8, gt=0.0)
    max_iter: int = Field(20, ge=1)
    residual_drop: float = Field(1e-10, gt=0.0)
    velocity_scale: float = Field(1.0, gt=0.0)
    length_scale: float = Field(1.0, gt=0.0)
    surfactant_scale: float = Field(1.0, gt=0.0)


class CoupledParams(BaseModel):
    """
    Switches of the coupled slab problem

    ``geometry_updates`` re-advects the level set of a slab with that slab's own
    mid-slab velocity and solves again, that many times per slab. Zero keeps
    the frozen previous-slab velocity.
    """
    time_degree: int = 1
    with_surfactant: bool = True
    c_sd: float = Field(1.0, gt=0.0)
    geometry_updates: int = Field(0, ge=0)

    @field_validator('time_degree')
    @classmethod
    def check_time_degree(cls, v):
        if v not in (0, 1):
            raise ValueError(f"time_degree must be 0 or 1, got {v}")
        return v
