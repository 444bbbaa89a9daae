"""geometry.py -- computational domains, lattice index sets and stencils

- 04/02/26 (dlk): Created.
- 04/09/26 (dlk): Add LatticeIndex with dense ordinal lookup.
- 04/20/26 (dlk): Add unit_triangles() for the atomistic triangulation.
- 05/02/26 (dlk): Add LatticeField gauges.
- 08/14/26 (ams): Name first violated inequality in build_domains() errors.
- 08/21/26 (ams): Add LatticeField.interpolate().
"""

from __future__ import annotations

import dataclasses
import functools
import math
from typing import Optional, Tuple

import numpy as np
import scipy.sparse

from . import constants, exception, modes


################################################################
# interaction range
################################################################

@dataclasses.dataclass(frozen=True)
class InteractionRange:
    """Finite set of lattice offsets a site energy depends on.

    Arguments:
        offsets (tuple of tuple of int): nonzero integer offsets rho, point
            symmetric
    """

    offsets: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        offset_set = set(self.offsets)
        if len(offset_set) != len(self.offsets):
            raise ValueError("duplicate offsets in interaction range")
        for rho in self.offsets:
            if len(rho) != constants.k_dim:
                raise ValueError("offset {} is not a {}-vector".format(rho, constants.k_dim))
            if all(c == 0 for c in rho):
                raise ValueError("interaction range may not contain the zero offset")
            if tuple(-c for c in rho) not in offset_set:
                raise ValueError("interaction range is not point symmetric: {} lacks its negative".format(rho))

    @functools.cached_property
    def array(self):
        """(n_rho, d) integer array of offsets."""
        return np.array(self.offsets, dtype=int)

    @property
    def r_cut(self):
        return max(math.hypot(*rho) for rho in self.offsets)

    @property
    def reach(self):
        """Maximum offset component, in lattice units."""
        return int(np.abs(self.array).max())

    def __len__(self):
        return len(self.offsets)


def nn_range():
    """Nearest-neighbor interaction range {+-e1, +-e2}."""
    return InteractionRange(constants.k_nn_offsets)


def nn_nnn_range():
    """Nearest plus next-nearest neighbor interaction range, r_cut = sqrt(2)."""
    return InteractionRange(constants.k_nn_offsets + constants.k_nnn_offsets)


################################################################
# domain geometry
################################################################

@dataclasses.dataclass(frozen=True)
class DomainGeometry:
    """Nested square domains Omega_core in Omega_a in Omega.

    All boxes are axis-aligned squares [-L,L]^2 centered at the defect, so
    each is described by its half-width L (the inscribed radius).

    Use build_domains() to construct; it checks the preconditions.
    """

    R_core: int
    psi_a: int
    kappa: int
    interaction_range: InteractionRange
    d: int = constants.k_dim

    @property
    def r_core(self):
        return self.R_core

    @property
    def r_a(self):
        return self.psi_a*self.R_core

    @property
    def r_c(self):
        return self.R_core**(self.kappa+1)

    @property
    def r_ex(self):
        """Half-width of the outer box of Omega_o,ex, clipped to Omega."""
        return min(2*self.psi_a*self.R_core, self.r_c)

    def half_widths(self, tag):
        """Outer and inner half-widths of the closed region for a domain tag.

        Arguments:
            tag (modes.DomainTag): domain

        Returns:
            (tuple): (outer, inner) where inner is None for a full box
        """
        if tag is modes.DomainTag.kCore:
            return (self.r_core, None)
        elif tag is modes.DomainTag.kAtomistic:
            return (self.r_a, None)
        elif tag is modes.DomainTag.kContinuum:
            return (self.r_c, self.r_core)
        elif tag is modes.DomainTag.kOverlap:
            return (self.r_a, self.r_core)
        elif tag is modes.DomainTag.kOverlapExtended:
            return (self.r_ex, self.r_core)
        raise ValueError("unknown domain tag {}".format(tag))

    def area(self, tag):
        (outer, inner) = self.half_widths(tag)
        area = (2*outer)**2
        if inner is not None:
            area -= (2*inner)**2
        return float(area)

    def descriptor(self):
        return "Rcore{:d}-psi{:d}-kappa{:d}".format(self.R_core, self.psi_a, self.kappa)


def build_domains(R_core, psi_a, kappa, interaction_range=None):
    """Construct the nested domains from the scaling parameters.

    Arguments:
        R_core (int): half-width of the core region
        psi_a (int): ratio of atomistic to core half-widths
        kappa (int): continuum scaling exponent, r_c = r_core^(kappa+1)
        interaction_range (InteractionRange, optional): defaults to NN+NNN

    Returns:
        (DomainGeometry): the geometry

    Raises:
        exception.GeometryError: naming the first violated inequality
    """
    if interaction_range is None:
        interaction_range = nn_nnn_range()
    r_cut = interaction_range.r_cut

    if not (isinstance(R_core, (int, np.integer)) and R_core >= 1):
        raise exception.GeometryError("R_core >= 1 violated (R_core = {})".format(R_core))
    if not (isinstance(psi_a, (int, np.integer)) and psi_a >= 4):
        raise exception.GeometryError("psi_a >= 4 violated (psi_a = {})".format(psi_a))
    if not (isinstance(kappa, (int, np.integer)) and kappa >= 1):
        raise exception.GeometryError("kappa >= 1 violated (kappa = {})".format(kappa))
    if (psi_a-1)*R_core < constants.k_overlap_cut_factor*r_cut:
        raise exception.GeometryError(
            "(psi_a-1) r_core >= 4 r_cut violated ({:d} < {:.6f})".format(
                (psi_a-1)*R_core, constants.k_overlap_cut_factor*r_cut
            )
        )
    if not R_core**kappa > psi_a:
        raise exception.GeometryError(
            "r_core^kappa > psi_a violated ({:d}^{:d} = {:d} <= {:d})".format(
                R_core, kappa, R_core**kappa, psi_a
            )
        )

    return DomainGeometry(
        R_core=int(R_core), psi_a=int(psi_a), kappa=int(kappa),
        interaction_range=interaction_range,
    )


################################################################
# lattice index sets
################################################################

def _lexicographic(points):
    """Sort integer points y-major then x."""
    order = np.lexsort((points[:, 0], points[:, 1]))
    return points[order]


class LatticeIndex:
    """Ordered set of lattice sites with interior and boundary layers.

    Sites are stored in lexicographic order (y-major then x).  Ordinals are
    looked up through a dense array over the bounding box.

    Attributes:
        sites (np.ndarray): (n, 2) integer site coordinates
        interaction_range (InteractionRange): stencil offsets
        interior (np.ndarray): boolean mask of the interior L°
        double_interior (np.ndarray): boolean mask of L°°
        boundary (np.ndarray): boolean mask of the boundary layer L \\ L°°
        neighbors (np.ndarray): (n, n_rho) ordinals of xi+rho, -1 if absent
    """

    def __init__(self, points, interaction_range):
        points = np.asarray(points, dtype=int).reshape(-1, constants.k_dim)
        self.sites = _lexicographic(np.unique(points, axis=0))
        self.interaction_range = interaction_range

        if len(self.sites):
            self._lower = self.sites.min(axis=0)
            upper = self.sites.max(axis=0)
        else:
            self._lower = np.zeros(constants.k_dim, dtype=int)
            upper = -np.ones(constants.k_dim, dtype=int)
        shape = tuple(upper-self._lower+1)
        self._lookup = -np.ones(shape, dtype=np.int64)
        shifted = self.sites-self._lower
        self._lookup[shifted[:, 0], shifted[:, 1]] = np.arange(len(self.sites))

        offsets = interaction_range.array
        self.neighbors = np.stack(
            [self.ordinal(self.sites+rho) for rho in offsets], axis=1
        ) if len(self.sites) else np.zeros((0, len(offsets)), dtype=np.int64)
        backward = np.stack(
            [self.ordinal(self.sites-rho) for rho in offsets], axis=1
        ) if len(self.sites) else np.zeros((0, len(offsets)), dtype=np.int64)
        self.interior = np.all(backward >= 0, axis=1)
        # (L°)° uses the same offsets, restricted to members of L°
        interior_backward = np.where(backward >= 0, self.interior[np.maximum(backward, 0)], False)
        self.double_interior = self.interior & np.all(interior_backward, axis=1)
        self.boundary = ~self.double_interior

    def __len__(self):
        return len(self.sites)

    def ordinal(self, points):
        """Ordinals of points, -1 for points not in the set.

        Arguments:
            points (array-like): (m, 2) integer points

        Returns:
            (np.ndarray): (m,) ordinals
        """
        points = np.asarray(points, dtype=int).reshape(-1, constants.k_dim)
        shifted = points-self._lower
        shape = np.array(self._lookup.shape)
        inside = np.all((shifted >= 0) & (shifted < shape), axis=1)
        result = -np.ones(len(points), dtype=np.int64)
        result[inside] = self._lookup[shifted[inside, 0], shifted[inside, 1]]
        return result

    def contains(self, points):
        return self.ordinal(points) >= 0

    @property
    def interior_sites(self):
        return self.sites[self.interior]

    @property
    def double_interior_sites(self):
        return self.sites[self.double_interior]

    @property
    def boundary_sites(self):
        return self.sites[self.boundary]


def box_points(outer, inner=None):
    """Integer points of [-outer,outer]^2, minus the closed box [-inner,inner]^2.

    Arguments:
        outer (int): outer half-width
        inner (int, optional): half-width of the excluded box

    Returns:
        (np.ndarray): (n, 2) integer points, lexicographic
    """
    axis = np.arange(-outer, outer+1)
    (y, x) = np.meshgrid(axis, axis, indexing="ij")
    points = np.stack([x.ravel(), y.ravel()], axis=1)
    if inner is not None:
        points = points[np.abs(points).max(axis=1) > inner]
    return points


def lattice_sets(geom, which):
    """Lattice index set of a domain.

    The continuum and overlap sets exclude the closed core box, so that the
    overlap lattice equals L_a \\ L_core as point sets.

    Arguments:
        geom (DomainGeometry): geometry
        which (modes.DomainTag): domain

    Returns:
        (LatticeIndex): the index set with interior layers
    """
    (outer, inner) = geom.half_widths(which)
    return LatticeIndex(box_points(outer, inner), geom.interaction_range)


################################################################
# atomistic triangulation
################################################################

def unit_triangles(outer, inner=None):
    """Unit right triangles of the atomistic triangulation on a square annulus.

    Each unit square [x,x+1]x[y,y+1] is split along its (1,1) diagonal into
    (xi, xi+e1, xi+e1+e2) and (xi, xi+e1+e2, xi+e2), both counterclockwise.
    Squares lying inside the closed box [-inner,inner]^2 are skipped.

    Arguments:
        outer (int): outer half-width
        inner (int, optional): inner half-width

    Returns:
        (np.ndarray): (m, 3, 2) integer vertex coordinates
    """
    # lower-left corners of the unit squares
    axis = np.arange(-outer, outer)
    (y, x) = np.meshgrid(axis, axis, indexing="ij")
    corners = np.stack([x.ravel(), y.ravel()], axis=1)
    if inner is not None:
        inside = np.all((corners >= -inner) & (corners+1 <= inner), axis=1)
        corners = corners[~inside]
    e1 = np.array([1, 0])
    e2 = np.array([0, 1])
    lower = np.stack([corners, corners+e1, corners+e1+e2], axis=1)
    upper = np.stack([corners, corners+e1+e2, corners+e2], axis=1)
    triangles = np.empty((2*len(corners), 3, 2), dtype=int)
    triangles[0::2] = lower
    triangles[1::2] = upper
    return triangles


def triangle_gradients(vertices):
    """Shape-function gradients and areas of P1 triangles.

    Arguments:
        vertices (np.ndarray): (m, 3, 2) vertex coordinates

    Returns:
        (tuple): (grads, areas) with grads (m, 3, 2) holding grad phi_a for
            each vertex a, and areas (m,)
    """
    vertices = np.asarray(vertices, dtype=float)
    e1 = vertices[:, 1]-vertices[:, 0]
    e2 = vertices[:, 2]-vertices[:, 0]
    det = e1[:, 0]*e2[:, 1]-e1[:, 1]*e2[:, 0]
    areas = 0.5*det
    # rows of the inverse Jacobian give grad phi_1, grad phi_2
    g1 = np.stack([e2[:, 1], -e2[:, 0]], axis=1)/det[:, None]
    g2 = np.stack([-e1[:, 1], e1[:, 0]], axis=1)/det[:, None]
    g0 = -g1-g2
    return (np.stack([g0, g1, g2], axis=1), areas)


################################################################
# lattice fields
################################################################

@dataclasses.dataclass
class LatticeField:
    """Displacement field on a lattice index set.

    Arguments:
        index (LatticeIndex): sites
        values (np.ndarray): (n, d) displacements, in site order
        gauge (modes.Gauge): gauge the values are expressed in
        pinned_site (int, optional): ordinal pinned by kPinned gauge
    """

    index: LatticeIndex
    values: np.ndarray
    gauge: modes.Gauge = modes.Gauge.kRaw
    pinned_site: Optional[int] = None
    info: dict = dataclasses.field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.index), constants.k_dim):
            raise ValueError("field values have shape {}, expected {}".format(
                self.values.shape, (len(self.index), constants.k_dim)
            ))

    @classmethod
    def zeros(cls, index, gauge=modes.Gauge.kRaw):
        return cls(index, np.zeros((len(index), constants.k_dim)), gauge)

    @classmethod
    def affine(cls, index, G, shift=None):
        """Field u(xi) = G xi + shift."""
        values = index.sites @ np.asarray(G, dtype=float).T
        if shift is not None:
            values = values+np.asarray(shift, dtype=float)
        return cls(index, values)

    def copy(self):
        return LatticeField(self.index, self.values.copy(), self.gauge, self.pinned_site)

    def shifted(self, c):
        return LatticeField(self.index, self.values+np.asarray(c, dtype=float), modes.Gauge.kRaw)

    def regauge(self, gauge, site=None):
        """Return field expressed in another gauge.

        Arguments:
            gauge (modes.Gauge): target gauge
            site (int, optional): ordinal to pin for kPinned (default 0)

        Returns:
            (LatticeField): regauged field
        """
        if gauge is modes.Gauge.kMeanZero:
            values = self.values-self.values.mean(axis=0)
            return LatticeField(self.index, values, gauge)
        elif gauge is modes.Gauge.kPinned:
            site = 0 if site is None else site
            values = self.values-self.values[site]
            return LatticeField(self.index, values, gauge, site)
        elif gauge is modes.Gauge.kRaw:
            return LatticeField(self.index, self.values.copy(), gauge)
        raise ValueError("unknown gauge {}".format(gauge))

    def at(self, points):
        """Values at given sites.

        Raises:
            exception.CoverageError: if some point is not a site of the field
        """
        ordinals = self.index.ordinal(points)
        if np.any(ordinals < 0):
            raise exception.CoverageError("field does not cover {} requested site(s)".format(
                int(np.count_nonzero(ordinals < 0))
            ))
        return self.values[ordinals]

    def restrict(self, index):
        """Field restricted to a subset index."""
        return LatticeField(index, self.at(index.sites), modes.Gauge.kRaw)

    def interpolate(self, points):
        """Values of the P1 interpolant Iu on the atomistic triangulation.

        Arguments:
            points (array-like): (m, 2) real points

        Returns:
            (np.ndarray): (m, d) interpolated values

        Raises:
            exception.CoverageError: if a containing triangle has a vertex
                outside the field
        """
        points = np.asarray(points, dtype=float).reshape(-1, constants.k_dim)
        lower = self.index.sites.min(axis=0)
        upper = self.index.sites.max(axis=0)
        corner = np.clip(np.floor(points).astype(int), lower, np.maximum(upper-1, lower))
        f = points-corner
        e1 = np.array([1, 0])
        e2 = np.array([0, 1])
        u00 = self.at(corner)
        u11 = self.at(corner+e1+e2)
        above = (f[:, 1] > f[:, 0])[:, None]
        # lower triangle (c, c+e1, c+e1+e2); upper (c, c+e1+e2, c+e2)
        side = self.at(np.where(above, corner+e2, corner+e1))
        (fx, fy) = (f[:, 0, None], f[:, 1, None])
        below_values = u00+fx*(side-u00)+fy*(u11-side)
        above_values = u00+fy*(side-u00)+fx*(u11-side)
        return np.where(above, above_values, below_values)


def stencil(u, xi):
    """Finite-difference stencil (D_rho u(xi))_rho.

    Arguments:
        u (LatticeField): field
        xi (array-like): site

    Returns:
        (np.ndarray): (n_rho, d) differences u(xi+rho)-u(xi)

    Raises:
        exception.StencilRangeError: if some neighbor xi+rho is missing
    """
    xi = np.asarray(xi, dtype=int)
    center = u.index.ordinal(xi[None, :])[0]
    targets = u.index.ordinal(xi+u.index.interaction_range.array)
    if center < 0 or np.any(targets < 0):
        raise exception.StencilRangeError("stencil at {} leaves the lattice".format(tuple(xi)))
    return u.values[targets]-u.values[center]


def stencils(index, values, ordinals):
    """Stencils at many sites (vectorized stencil()).

    Arguments:
        index (LatticeIndex): sites
        values (np.ndarray): (n, d) field values
        ordinals (np.ndarray): (m,) ordinals of sites in the interior

    Returns:
        (np.ndarray): (m, n_rho, d) differences
    """
    targets = index.neighbors[ordinals]
    if np.any(targets < 0):
        raise exception.StencilRangeError("stencil requested outside lattice interior")
    return values[targets]-values[ordinals][:, None, :]


################################################################
# P1 gradient operators
################################################################

class P1Gradient:
    """Sparse map from nodal values to area-weighted P1 gradients.

    Row block of triangle T holds sqrt(|T|) grad u|_T flattened as (i, J),
    so that |P1Gradient @ v|^2 is the squared L2 norm of grad v over the
    triangles.

    Arguments:
        connectivity (np.ndarray): (m, 3) node ordinals per triangle
        vertices (np.ndarray): (m, 3, d) vertex coordinates
        n_nodes (int): number of nodes of the field
    """

    def __init__(self, connectivity, vertices, n_nodes):
        d = constants.k_dim
        self.connectivity = np.asarray(connectivity, dtype=np.int64)
        (grads, self.areas) = triangle_gradients(vertices)
        if np.any(self.areas <= 0):
            raise ValueError("triangles must be positively oriented")
        self.n_nodes = n_nodes
        m = len(self.connectivity)
        weight = np.sqrt(self.areas)
        # entry (T, i, J; a) = sqrt|T| grads[T, a, J], column node_a*d+i
        T = np.arange(m)[:, None, None, None]
        i = np.arange(d)[None, :, None, None]
        J = np.arange(d)[None, None, :, None]
        a = np.arange(3)[None, None, None, :]
        shape = (m, d, d, 3)
        rows = np.broadcast_to(T*d*d+i*d+J, shape).ravel()
        cols = np.broadcast_to(self.connectivity[:, None, None, :]*d+i, shape).ravel()
        vals = np.broadcast_to(
            weight[:, None, None, None]*np.transpose(grads, (0, 2, 1))[:, None, :, :], shape
        ).ravel()
        self.matrix = scipy.sparse.coo_matrix((vals, (rows, cols)), shape=(m*d*d, n_nodes*d)).tocsr()

    def __len__(self):
        return len(self.connectivity)

    @property
    def total_area(self):
        return float(self.areas.sum())

    def weighted(self, values):
        """Area-weighted flattened gradients of nodal values (n, d)."""
        return self.matrix @ np.asarray(values, dtype=float).ravel()

    def gradients(self, values):
        """Per-triangle gradients (m, d, d) of nodal values (n, d)."""
        w = self.weighted(values).reshape(-1, constants.k_dim, constants.k_dim)
        return w/np.sqrt(self.areas)[:, None, None]

    def seminorm(self, values):
        """L2 norm of the gradient over the triangles."""
        return float(np.linalg.norm(self.weighted(values)))

    def stiffness(self):
        """Vector P1 Laplacian matrix^T matrix, over all nodal DOFs."""
        return (self.matrix.T @ self.matrix).tocsr()


def lattice_gradient(index, outer, inner=None):
    """P1Gradient of the atomistic triangulation on a square annulus.

    Arguments:
        index (LatticeIndex): sites supplying nodal values; must contain
            every triangle vertex
        outer (int): outer half-width
        inner (int, optional): inner half-width

    Returns:
        (P1Gradient): operator over the index's sites
    """
    vertices = unit_triangles(outer, inner)
    connectivity = index.ordinal(vertices.reshape(-1, constants.k_dim)).reshape(-1, 3)
    if np.any(connectivity < 0):
        raise exception.CoverageError("lattice does not cover the triangulated region")
    return P1Gradient(connectivity, vertices, len(index))
