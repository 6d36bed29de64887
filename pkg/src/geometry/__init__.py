from .quadrature import (
    TimeQuadrature, simpson_rule, PointSet, FacePointSet, triangle_rule, segment_rule,
    element_point_set, boundary_point_set, face_point_set
)
from .classification import ElementLabel, classify_elements, snap_vertex_values
from .interface import (
    InterfaceMesh, reconstruct_interface, tangential_projector, count_interface_components
)
from .cut_cells import CutDecomposition, decompose_cut_element, decompose_elements
from .slab import (
    TimeSlice, SlabGeometry, build_time_slice, build_slab_sets, build_slab_geometry
)

__all__ = [
    'TimeQuadrature', 'simpson_rule', 'PointSet', 'FacePointSet', 'triangle_rule', 'segment_rule',
    'element_point_set', 'boundary_point_set', 'face_point_set',
    'ElementLabel', 'classify_elements', 'snap_vertex_values',
    'InterfaceMesh', 'reconstruct_interface', 'tangential_projector', 'count_interface_components',
    'CutDecomposition', 'decompose_cut_element', 'decompose_elements',
    'TimeSlice', 'SlabGeometry', 'build_time_slice', 'build_slab_sets', 'build_slab_geometry'
]
