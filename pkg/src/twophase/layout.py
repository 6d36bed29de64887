from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Tuple

import numpy as np

from src.spaces.scalar_space import ScalarSpace

BlockKey = Tuple


@dataclass(eq=False)
class FlowLayout:
    """
    Global numbering of the coupled slab unknowns

    Blocks, in order: velocity ("u", phase, component) for phases 1, 2 and
    components 0, 1; pressure ("p", phase); surfactant ("w",) when present;
    then one gauge multiplier per time mode ("gauge",). Inside a field block
    the unknown of time mode j and spatial DOF i sits at j * n_space + i.
    """
    velocity: Tuple[ScalarSpace, ScalarSpace] = field(repr=False)
    pressure: Tuple[ScalarSpace, ScalarSpace] = field(repr=False)
    surfactant: Optional[ScalarSpace] = field(default=None, repr=False)
    k: int = 1

    def __post_init__(self):
        if self.k not in (0, 1):
            raise ValueError(f"Time degree must be 0 or 1, got {self.k}")
        for phase in (1, 2):
            if self.velocity[phase - 1].degree != 2 or self.pressure[phase - 1].degree != 1:
                raise ValueError("Velocity spaces must be P2 and pressure spaces P1")
        self.modes = self.k + 1
        self.offsets: Dict[BlockKey, int] = {}
        self.sizes: Dict[BlockKey, int] = {}
        position = 0
        for key, space in self._field_blocks():
            self.offsets[key] = position
            self.sizes[key] = self.modes * space.n_dofs
            position += self.sizes[key]
        self.offsets[("gauge",)] = position
        self.sizes[("gauge",)] = self.modes
        self.n = position + self.modes

    def _field_blocks(self) -> Iterator[Tuple[BlockKey, ScalarSpace]]:
        for phase in (1, 2):
            for component in (0, 1):
                yield ("u", phase, component), self.velocity[phase - 1]
        for phase in (1, 2):
            yield ("p", phase), self.pressure[phase - 1]
        if self.surfactant is not None:
            yield ("w",), self.surfactant

    @property
    def with_surfactant(self) -> bool:
        return self.surfactant is not None

    def space(self, key: BlockKey) -> ScalarSpace:
        if key[0] == "u":
            return self.velocity[key[1] - 1]
        if key[0] == "p":
            return self.pressure[key[1] - 1]
        if key[0] == "w" and self.surfactant is not None:
            return self.surfactant
        raise KeyError(f"No field block {key}")

    def offset(self, key: BlockKey) -> int:
        if key not in self.offsets:
            raise KeyError(f"No block {key} in layout")
        return self.offsets[key]

    def block(self, x: np.ndarray, key: BlockKey) -> np.ndarray:
        """Coefficients of one field block as (modes, n_space)"""
        start = self.offset(key)
        values = x[start:start + self.sizes[key]]
        if key == ("gauge",):
            return values
        return values.reshape(self.modes, -1)

    def velocity_coeffs(self, x: np.ndarray, phase: int) -> np.ndarray:
        """(modes, n_space, 2) velocity coefficients of one phase"""
        return np.stack([self.block(x, ("u", phase, c)) for c in (0, 1)], axis=-1)

    def pack(self, blocks: Dict[BlockKey, np.ndarray]) -> np.ndarray:
        """Inverse of ``block``: missing blocks are zero"""
        x = np.zeros(self.n)
        for key, values in blocks.items():
            start = self.offset(key)
            x[start:start + self.sizes[key]] = np.asarray(values).ravel()
        return x

    def check(self, x: np.ndarray) -> None:
        if x.shape != (self.n,):
            raise ValueError(f"State vector of shape {x.shape} does not match layout size {self.n}")

    def summary(self) -> Dict[str, int]:
        return {
            "u1": self.velocity[0].n_dofs, "u2": self.velocity[1].n_dofs,
            "p1": self.pressure[0].n_dofs, "p2": self.pressure[1].n_dofs,
            "w": self.surfactant.n_dofs if self.surfactant is not None else 0,
            "modes": self.modes, "total": self.n,
        }
