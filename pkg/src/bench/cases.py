from dataclasses import dataclass
from functools import partial
from typing import Dict, Literal, Optional

import numpy as np

from src.config.run_config import RunConfig
from src.levelset.cases import AnalyticCase, SpaceTimeFunction, get_case
from src.mesh.background_mesh import BackgroundMesh, Rectangle, build_uniform_mesh
from src.mesh.refinement import box_region, refine_region
from src.twophase.params import WallCondition


@dataclass(frozen=True)
class BenchCase:
    """A runnable experiment: analytic data plus how the bench drives it"""
    name: str
    analytic: AnalyticCase
    kind: Literal["surfactant", "flow"]
    source_takes_diffusion: bool = False

    @property
    def shear_rate(self) -> float:
        return float(self.analytic.metadata.get("shear_rate", 0.0))

    def source(self, diffusion: float) -> Optional[SpaceTimeFunction]:
        if self.analytic.source is None:
            return None
        if self.source_takes_diffusion:
            return partial(self.analytic.source, diffusion=diffusion)
        return self.analytic.source

    def walls(self, config: RunConfig) -> Dict[str, WallCondition]:
        """Wall conditions: the configured kind per side, shear data u = (rate y, 0) where the case has one"""
        rate = self.shear_rate
        data = None
        if rate:
            def data(t, points, rate=rate):
                return np.column_stack([rate * points[:, 1], np.zeros(len(points))])
        return {side: WallCondition(kind=config.walls.get(side, "no_slip"), data=data)
                for side in ("left", "right", "bottom", "top")}

    def build_mesh(self, config: RunConfig) -> BackgroundMesh:
        domain = Rectangle.from_bounds(self.analytic.domain)
        mesh = build_uniform_mesh(domain, config.nx, config.ny)
        if config.refine_levels:
            box = config.refine_box or self.analytic.drop_bounds
            mesh = refine_region(mesh, box_region(*box), config.refine_levels)
        return mesh

    def nominal_h(self, config: RunConfig) -> float:
        """Cell size of the unrefined mesh, the h of the time-step rule"""
        x0, x1, y0, y1 = self.analytic.domain
        return max((x1 - x0) / config.nx, (y1 - y0) / config.ny)


class CaseFactory:
    """Factory for registered experiments"""

    _cases: Dict[str, Dict] = {
        'example1': {'analytic': 'example1', 'kind': 'surfactant', 'source_takes_diffusion': True},
        'example1_nonconservative': {'analytic': 'example1', 'kind': 'surfactant',
                                     'source_takes_diffusion': True},
        'stretching_circle': {'analytic': 'stretching_circle', 'kind': 'surfactant'},
        'rising_drop': {'analytic': 'rising_drop', 'kind': 'flow'},
        'shear_flow': {'analytic': 'shear', 'kind': 'flow'},
        'drop_pair': {'analytic': 'drop_pair', 'kind': 'flow'},
        'static_drop': {'analytic': 'static_drop', 'kind': 'flow'},
    }

    @classmethod
    def create_case(cls, name: str) -> BenchCase:
        """
        Create a registered experiment

        Args:
            name: Case name

        Raises:
            ValueError: If the case is not registered
        """
        if name not in cls._cases:
            raise ValueError(f"Case '{name}' not supported. Available cases: {list(cls._cases.keys())}")
        entry = cls._cases[name]
        return BenchCase(name, get_case(entry['analytic']), entry['kind'],
                         entry.get('source_takes_diffusion', False))

    @classmethod
    def get_available_cases(cls) -> list:
        return list(cls._cases.keys())
