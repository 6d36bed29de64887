from typing import Literal

from pydantic import BaseModel, Field, field_validator


class SurfactantParams(BaseModel):
    """Surface transport parameters"""
    diffusion: float = Field(1.0, gt=0.0, description="Surface diffusion coefficient D_Gamma")
    c_f1: float = Field(1e-2, gt=0.0, description="Face ghost-penalty constant")
    c_gamma1: float = Field(1e-2, gt=0.0, description="Normal-gradient stabilization constant")
    formulation: Literal["conservative", "nonconservative"] = "conservative"
    time_degree: int = 1

    @field_validator('time_degree')
    @classmethod
    def check_time_degree(cls, v):
        if v not in (0, 1):
            raise ValueError(f"time_degree must be 0 or 1, got {v}")
        return v
