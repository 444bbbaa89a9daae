"""mesh.py -- graded P1 triangulation of the continuum region

The mesh of Omega_c = Omega \\ Omega_core is built from concentric square
layers.  Out to the half-width of Omega_o,ex every unit square is split into
the two right triangles of the atomistic triangulation.  Beyond it, one-cell
wide square layers of cell size h follow, with h doubled whenever the target
size max(1, (|x|_inf/r_a)^p) permits and the layer boundary is aligned to
2h.  The first layer after a doubling splits each side cell at the midpoint
of its inner edge into three triangles (minimum angle atan(1/2) ~ 26.6 deg).

- 04/20/26 (dlk): Created.
- 04/27/26 (dlk): Add transition layers and node tags.
- 05/04/26 (dlk): Check resolution, node placement and angles after every construction.
- 07/08/26 (ams): Add mesh dump.
"""

from __future__ import annotations

import logging
import math
import warnings

import numpy as np

from . import constants, exception, geometry, modes

logger = logging.getLogger(__name__)


################################################################
# mesh container
################################################################

class FEMesh:
    """P1 triangulation with integer nodes and boundary tags.

    Attributes:
        geom (geometry.DomainGeometry): geometry meshed
        nodes (np.ndarray): (n, 2) integer node positions, lexicographic
        triangles (np.ndarray): (m, 3) node ordinals, counterclockwise
        tags (np.ndarray): (n,) NodeTag values
        h (np.ndarray): (m,) triangle diameters
        min_angle (float): smallest interior angle, degrees
    """

    def __init__(self, geom, nodes, triangles):
        self.geom = geom
        self.nodes = np.asarray(nodes, dtype=int)
        self.triangles = np.asarray(triangles, dtype=np.int64)
        self._index = geometry.LatticeIndex(self.nodes, geom.interaction_range)
        norm = np.abs(self.nodes).max(axis=1)
        self.tags = np.full(len(self.nodes), modes.NodeTag.kInterior.value)
        self.tags[norm == geom.r_core] = modes.NodeTag.kGammaCore.value
        self.tags[norm == geom.r_c] = modes.NodeTag.kGammaC.value
        vertices = self.vertices
        edges = np.stack([
            vertices[:, 1]-vertices[:, 0], vertices[:, 2]-vertices[:, 1], vertices[:, 0]-vertices[:, 2]
        ], axis=1).astype(float)
        self.h = np.linalg.norm(edges, axis=2).max(axis=1)
        self.min_angle = float(triangle_angles(vertices).min()) if len(vertices) else 0.0
        self._gradients = {}

    def __len__(self):
        return len(self.nodes)

    @property
    def vertices(self):
        return self.nodes[self.triangles]

    @property
    def areas(self):
        v = self.vertices.astype(float)
        e1 = v[:, 1]-v[:, 0]
        e2 = v[:, 2]-v[:, 0]
        return 0.5*(e1[:, 0]*e2[:, 1]-e1[:, 1]*e2[:, 0])

    @property
    def centroids(self):
        return self.vertices.mean(axis=1)

    def tagged(self, tag):
        """Ordinals of nodes carrying a NodeTag."""
        return np.flatnonzero(self.tags == tag.value)

    def ordinal(self, points):
        return self._index.ordinal(points)

    def triangles_in(self, tag):
        """Ordinals of triangles whose centroid lies in a domain (open annulus)."""
        (outer, inner) = self.geom.half_widths(tag)
        norm = np.abs(self.centroids).max(axis=1)
        mask = norm < outer
        if inner is not None:
            mask &= norm > inner
        return np.flatnonzero(mask)

    def gradient_operator(self, tag=modes.DomainTag.kContinuum):
        """P1 gradient operator over the triangles of a domain.

        Arguments:
            tag (modes.DomainTag): kContinuum (all triangles) or kOverlap

        Returns:
            (geometry.P1Gradient): operator over all mesh nodes
        """
        if tag not in self._gradients:
            selected = np.arange(len(self.triangles)) if tag is modes.DomainTag.kContinuum else self.triangles_in(tag)
            self._gradients[tag] = geometry.P1Gradient(
                self.triangles[selected], self.vertices[selected], len(self.nodes)
            )
        return self._gradients[tag]

    def dump(self, stream):
        """Write the plain-text node and triangle listing.

        Lines "id x y tag" per node, then "id n0 n1 n2" per triangle; section
        headers start with "#".

        Arguments:
            stream (file-like): text stream
        """
        labels = {tag.value: tag.label for tag in modes.NodeTag}
        stream.write("# nodes {:d}\n".format(len(self.nodes)))
        for (i, (x, y)) in enumerate(self.nodes):
            stream.write("{:d} {:d} {:d} {:s}\n".format(i, x, y, labels[self.tags[i]]))
        stream.write("# triangles {:d}\n".format(len(self.triangles)))
        for (i, (n0, n1, n2)) in enumerate(self.triangles):
            stream.write("{:d} {:d} {:d} {:d}\n".format(i, n0, n1, n2))


def triangle_angles(vertices):
    """Interior angles (m, 3) in degrees."""
    v = np.asarray(vertices, dtype=float)
    angles = []
    for k in range(3):
        a = v[:, (k+1) % 3]-v[:, k]
        b = v[:, (k+2) % 3]-v[:, k]
        cos = np.einsum("mi,mi->m", a, b)/(np.linalg.norm(a, axis=1)*np.linalg.norm(b, axis=1))
        angles.append(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))))
    return np.stack(angles, axis=1)


################################################################
# layer construction
################################################################

def _square_cells(L, h):
    """Lower-left corners of the one-cell layer [-(L+h), L+h]^2 \\ [-L, L]^2."""
    n = (2*L)//h
    along = -L+h*np.arange(n)
    bottom = np.stack([along, np.full(n, -L-h)], axis=1)
    top = np.stack([along, np.full(n, L)], axis=1)
    left = np.stack([np.full(n, -L-h), along], axis=1)
    right = np.stack([np.full(n, L), along], axis=1)
    corners = np.array([[-L-h, -L-h], [L, -L-h], [L, L], [-L-h, L]])
    return (bottom, top, left, right, corners)


def _split_diagonal(corners, h):
    e1 = np.array([h, 0])
    e2 = np.array([0, h])
    lower = np.stack([corners, corners+e1, corners+e1+e2], axis=1)
    upper = np.stack([corners, corners+e1+e2, corners+e2], axis=1)
    return np.concatenate([lower, upper])


def _split_transition(corners, h, inner_edge):
    """Three triangles per cell, sharing the midpoint of the inner edge.

    Arguments:
        corners (np.ndarray): (k, 2) lower-left corners
        h (int): cell size
        inner_edge (str): "top", "bottom", "left" or "right" edge of the cell
            that faces the finer layer
    """
    c = corners
    ll = c
    lr = c+np.array([h, 0])
    ur = c+np.array([h, h])
    ul = c+np.array([0, h])
    # (P, Q) inner edge, (P', Q') the opposite vertices
    (P, Q, Pp, Qp) = {
        "bottom": (ll, lr, ul, ur),
        "top": (ul, ur, ll, lr),
        "left": (ll, ul, lr, ur),
        "right": (lr, ur, ll, ul),
    }[inner_edge]
    M = (P+Q)//2
    return np.concatenate([
        np.stack([P, M, Pp], axis=1),
        np.stack([M, Q, Qp], axis=1),
        np.stack([M, Qp, Pp], axis=1),
    ])


def _layer_triangles(L, h, transition):
    (bottom, top, left, right, corners) = _square_cells(L, h)
    pieces = [_split_diagonal(corners, h)]
    if transition:
        pieces += [
            _split_transition(bottom, h, "top"),
            _split_transition(top, h, "bottom"),
            _split_transition(left, h, "right"),
            _split_transition(right, h, "left"),
        ]
    else:
        pieces += [_split_diagonal(cells, h) for cells in (bottom, top, left, right)]
    return np.concatenate(pieces)


def layer_plan(geom, grading_exponent, delay=0):
    """Sequence of coarse layers (inner half-width, cell size, transition flag).

    Arguments:
        geom (geometry.DomainGeometry): geometry
        grading_exponent (float): exponent p of the target size (|x|_inf/r_a)^p
        delay (int, optional): minimum number of layers between doublings

    Returns:
        (list of tuple): layers from the resolved region outward
    """
    plan = []
    L = geom.r_ex
    h = 1
    since_doubling = delay
    while L < geom.r_c:
        target = max(1.0, (L/geom.r_a)**grading_exponent)
        transition = False
        if (2*h <= target and L % (2*h) == 0 and geom.r_c % (2*h) == 0
                and L+2*h <= geom.r_c and since_doubling >= delay):
            h *= 2
            transition = True
            since_doubling = 0
        plan.append((L, h, transition))
        L += h
        since_doubling += 1
    return plan


def _orient(triangles):
    v = triangles.astype(float)
    e1 = v[:, 1]-v[:, 0]
    e2 = v[:, 2]-v[:, 0]
    negative = (e1[:, 0]*e2[:, 1]-e1[:, 1]*e2[:, 0]) < 0
    triangles = triangles.copy()
    triangles[negative, 1], triangles[negative, 2] = triangles[negative, 2].copy(), triangles[negative, 1].copy()
    return triangles


def _assemble(geom, grading_exponent, delay):
    pieces = [geometry.unit_triangles(geom.r_ex, geom.r_core)]
    for (L, h, transition) in layer_plan(geom, grading_exponent, delay):
        pieces.append(_layer_triangles(L, h, transition))
    triangles = _orient(np.concatenate(pieces))

    # nodes in lexicographic order (y-major then x)
    flat = triangles.reshape(-1, 2)
    (swapped, inverse) = np.unique(flat[:, ::-1], axis=0, return_inverse=True)
    nodes = swapped[:, ::-1]
    connectivity = np.asarray(inverse).reshape(-1, 3)
    return FEMesh(geom, nodes, connectivity)


################################################################
# checks
################################################################

def lattice_triangle_mask(vertices):
    """Whether each triangle (m, 3, 2) is a triangle of the atomistic triangulation."""
    v = np.asarray(vertices, dtype=int)
    base = v.min(axis=1)
    offsets = np.sort((v-base[:, None, :]) @ np.array([1, 3]), axis=1)
    lower = np.array([0, 1, 4])   # (0,0), (1,0), (1,1)
    upper = np.array([0, 3, 4])   # (0,0), (0,1), (1,1)
    return np.all(offsets == lower, axis=1) | np.all(offsets == upper, axis=1)


def check_mesh(mesh, min_angle=constants.k_min_angle):
    """Check tiling of Omega_c, resolution of Omega_o,ex and the angle bound.

    Raises:
        exception.MeshError: on any violation
    """
    geom = mesh.geom
    areas = mesh.areas
    if np.any(areas <= 0):
        raise exception.MeshError("mesh has non-positively oriented triangles")
    expected = geom.area(modes.DomainTag.kContinuum)
    if abs(areas.sum()-expected) > 1e-9*expected:
        raise exception.MeshError("triangles cover area {} of {}".format(areas.sum(), expected))

    # triangles in Omega_o,ex are triangles of the atomistic triangulation
    resolved = mesh.triangles_in(modes.DomainTag.kOverlapExtended)
    is_unit = lattice_triangle_mask(mesh.vertices[resolved])
    if not np.all(is_unit):
        raise exception.MeshError("{} triangle(s) in the resolved region are not atomistic triangles".format(
            int(np.count_nonzero(~is_unit))
        ))

    # nodes are lattice points by construction (integer node array)
    if mesh.min_angle < min_angle:
        raise exception.MeshError("minimum angle {:.2f} below {:.2f} degrees".format(mesh.min_angle, min_angle))


def build_mesh(geom, grading_exponent=constants.k_grading_exponent, min_angle=constants.k_min_angle,
               retries=constants.k_mesh_retries):
    """Build the graded P1 mesh of Omega_c.

    Arguments:
        geom (geometry.DomainGeometry): geometry
        grading_exponent (float, optional): p in [1, d)
        min_angle (float, optional): minimum interior angle, degrees
        retries (int, optional): attempts with delayed coarsening after a
            failed angle check

    Returns:
        (FEMesh): mesh satisfying all checks

    Raises:
        ValueError: if grading_exponent is outside [1, d)
        exception.MeshError: if the geometry is too small or checks keep failing
    """
    if not 1 <= grading_exponent < constants.k_dim:
        raise ValueError("grading exponent {} outside [1, {})".format(grading_exponent, constants.k_dim))
    if geom.r_c <= geom.r_a or geom.r_ex <= geom.r_core:
        raise exception.MeshError("geometry too small to mesh ({})".format(geom.descriptor()))

    for delay in range(retries+1):
        mesh = _assemble(geom, grading_exponent, delay)
        try:
            check_mesh(mesh, min_angle)
        except exception.MeshError as err:
            if delay == retries:
                raise
            warnings.warn("mesh check failed ({}); retrying with finer layers".format(err), RuntimeWarning)
            logger.warning("mesh: retry %d after: %s", delay+1, err)
            continue
        logger.info(
            "mesh: %s nodes %d triangles %d min angle %.2f",
            geom.descriptor(), len(mesh.nodes), len(mesh.triangles), mesh.min_angle,
        )
        return mesh


def lattice_count(geom):
    """Number of lattice points in the closure of Omega_c."""
    return (2*geom.r_c+1)**2-(2*geom.r_core-1)**2


def reduction_ratio(mesh):
    """Lattice count of Omega_c over mesh node count."""
    return lattice_count(mesh.geom)/len(mesh.nodes)


def target_size(geom, x, grading_exponent=constants.k_grading_exponent):
    """Target mesh size max(1, (|x|_inf/r_a)^p)."""
    return max(1.0, (max(abs(c) for c in x)/geom.r_a)**grading_exponent)


# min angle of the transition split, for reference in checks and tests
k_transition_angle = math.degrees(math.atan(0.5))
