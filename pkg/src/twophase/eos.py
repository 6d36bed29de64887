from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from src.utils.errors import EquationOfStateError


class EquationOfState(BaseModel):
    """
    Surface tension as a function of surfactant concentration

    linear:   sigma(w) = sigma0 (1 - beta w)
    langmuir: sigma(w) = sigma0 + beta ln(w_inf - w), defined for w < w_inf
    """
    kind: Literal["linear", "langmuir"] = "linear"
    sigma0: float = Field(..., gt=0.0)
    beta: float = Field(0.0, ge=0.0)
    w_inf: Optional[float] = None

    @model_validator(mode='after')
    def check_langmuir(self):
        if self.kind == "langmuir" and (self.w_inf is None or self.w_inf <= 0.0):
            raise ValueError("Langmuir equation of state needs a positive w_inf")
        return self

    def _check(self, w: np.ndarray) -> None:
        if self.kind == "langmuir" and np.any(w >= self.w_inf):
            raise EquationOfStateError(
                f"Langmuir surface tension needs w < w_inf = {self.w_inf}, max w = {np.max(w):.6g}"
            )

    def sigma(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=float)
        if self.kind == "linear":
            return self.sigma0 * (1.0 - self.beta * w)
        self._check(w)
        return self.sigma0 + self.beta * np.log(self.w_inf - w)

    def dsigma(self, w) -> np.ndarray:
        """d sigma / d w: -sigma0 beta (linear) or -beta / (w_inf - w) (langmuir)"""
        w = np.asarray(w, dtype=float)
        if self.kind == "linear":
            return np.full_like(w, -self.sigma0 * self.beta)
        self._check(w)
        return -self.beta / (self.w_inf - w)
