import logging

import numpy as np

from src.levelset.level_set import LevelSetField
from src.spaces.lagrange import lagrange_nodes

logger = logging.getLogger(__name__)

_CHUNK = 4096


def redistance_to_interface(phi: LevelSetField) -> LevelSetField:
    """
    Replace phi by the signed distance to its reconstructed P1 zero contour

    Signs are kept node by node; only magnitudes change. The sign pattern at the
    vertices survives, but the P1 zero crossings on cut edges move with the new
    nodal values, so the reconstructed interface is preserved to O(h^2) only.
    """
    from src.geometry.classification import classify_elements
    from src.geometry.interface import reconstruct_interface
    from src.levelset.level_set import project_to_p1

    linear = project_to_p1(phi)
    interface = reconstruct_interface(linear, classify_elements(linear))
    if len(interface) == 0:
        logger.warning("Redistancing skipped at t=%.6g: empty interface", phi.time)
        return phi
    a, b = interface.endpoints[:, 0], interface.endpoints[:, 1]
    ab = b - a
    length2 = np.maximum(np.einsum("sd,sd->s", ab, ab), 1e-300)

    nodes = lagrange_nodes(phi.mesh, phi.degree)
    distance = np.empty(len(nodes))
    for start in range(0, len(nodes), _CHUNK):
        p = nodes[start:start + _CHUNK]
        ap = p[:, None, :] - a[None, :, :]
        s = np.clip(np.einsum("nsd,sd->ns", ap, ab) / length2, 0.0, 1.0)
        closest = a[None, :, :] + s[:, :, None] * ab[None, :, :]
        distance[start:start + _CHUNK] = np.linalg.norm(p[:, None, :] - closest, axis=2).min(axis=1)
    sign = np.where(phi.coeffs < 0.0, -1.0, 1.0)
    logger.debug("Redistanced level set at t=%.6g over %d segments", phi.time, len(interface))
    return phi.with_coeffs(sign * distance, phi.time)
