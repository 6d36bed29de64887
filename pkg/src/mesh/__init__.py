from .background_mesh import (
    BackgroundMesh, Rectangle, ElementMaps, BOUNDARY_TAGS, LOCAL_EDGES, build_uniform_mesh
)
from .refinement import refine_region, marked_elements, box_region

__all__ = [
    'BackgroundMesh', 'Rectangle', 'ElementMaps', 'BOUNDARY_TAGS', 'LOCAL_EDGES',
    'build_uniform_mesh', 'refine_region', 'marked_elements', 'box_region'
]
