import logging
from abc import ABC, abstractmethod
from typing import Callable, Dict, List, Optional


from src.levelset.advection import advect
from src.levelset.cases import SpaceTimeFunction
from src.levelset.level_set import LevelSetField, init_from_function
from src.levelset.velocity import VelocitySampler

logger = logging.getLogger(__name__)

Redistancer = Callable[[LevelSetField], LevelSetField]


class LevelSetBackend(ABC):
    """Source of the level set at the Simpson points of a slab"""

    def __init__(self, redistance: Optional[Redistancer] = None):
        self.redistance = redistance

    @abstractmethod
    def fields_for_slab(self, phi_n: LevelSetField, times: List[float], dt: float,
                        velocity: Optional[VelocitySampler] = None,
                        slab_index: Optional[int] = None) -> List[LevelSetField]:
        """
        Level sets at the given slab times

        Args:
            phi_n: Level set at the slab start (times[0])
            times: Sorted slab times starting at t_n
            dt: Slab length
            velocity: Transport velocity (ignored by prescribed level sets)
            slab_index: Index used in diagnostics

        Returns:
            One field per time; the first is phi_n itself
        """

    def _finish(self, fields: List[LevelSetField]) -> List[LevelSetField]:
        if self.redistance is not None:
            fields[-1] = self.redistance(fields[-1])
        return fields


class PrescribedLevelSet(LevelSetBackend):
    """Interpolates a closed-form phi(t, x) at every requested time"""

    def __init__(self, phi_exact: SpaceTimeFunction, redistance: Optional[Redistancer] = None):
        super().__init__(redistance)
        self.phi_exact = phi_exact

    def fields_for_slab(self, phi_n, times, dt, velocity=None, slab_index=None):
        fields = [phi_n] + [
            init_from_function(phi_n.mesh, phi_n.degree, lambda p, t=t: self.phi_exact(t, p), t)
            for t in times[1:]
        ]
        return self._finish(fields)


class AdvectedLevelSet(LevelSetBackend):
    """Streamline-diffusion Crank-Nicolson transport of the level set"""

    def __init__(self, c_sd: float = 1.0, redistance: Optional[Redistancer] = None):
        super().__init__(redistance)
        if c_sd <= 0.0:
            raise ValueError(f"Streamline-diffusion constant must be positive, got {c_sd}")
        self.c_sd = c_sd

    def fields_for_slab(self, phi_n, times, dt, velocity=None, slab_index=None):
        if velocity is None:
            raise ValueError("Advected level sets need a velocity sampler")
        fields = [phi_n] + advect(phi_n, velocity, times[0], dt, times[1:], self.c_sd, slab_index)
        return self._finish(fields)


class LevelSetBackendFactory:
    """Factory for level-set backends"""

    _backends: Dict[str, type] = {
        'prescribed': PrescribedLevelSet,
        'advected': AdvectedLevelSet,
    }

    @classmethod
    def create_backend(cls, name: str, **kwargs) -> LevelSetBackend:
        """
        Create a level-set backend

        Args:
            name: Backend name ('prescribed' or 'advected')
            **kwargs: Constructor arguments of the backend

        Raises:
            ValueError: If the backend is not registered
        """
        if name not in cls._backends:
            raise ValueError(f"Level-set backend '{name}' not supported. "
                             f"Available backends: {list(cls._backends.keys())}")
        return cls._backends[name](**kwargs)

    @classmethod
    def get_available_backends(cls) -> list:
        return list(cls._backends.keys())
