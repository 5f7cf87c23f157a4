"""Cross sections and truncated wire domains.

A wire is the cylinder R x omega, where omega is a bounded planar cross
section living in the (y, z) plane.  Everything downstream (demag matrices,
3D energies, the vortex construction) consumes the two objects defined here:

* ``CrossSection``: one of four boundary families (disc, ellipse, rectangle,
  polygon) together with its area, diameter, and a square lattice of interior
  cell centers.
* ``WireDomain``: a finite axial window of the scaled wire, discretized with
  uniform axial cells and the scaled cross-section lattice.

Conventions: ellipse/rectangle parameters a, b are semi-axes / half-widths
along y and z; polygons are counterclockwise vertex lists; boundary normals
point out of omega.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from matplotlib.path import Path
from scipy.special import ellipe


class GeometryError(ValueError):
    """Invalid cross-section or domain parameters; names the offending one."""


@dataclass(frozen=True, eq=False)
class InteriorGrid:
    """Square lattice of cell centers covering omega's bounding box."""

    ys: np.ndarray          # (ny,) cell-center y coordinates
    zs: np.ndarray          # (nz,) cell-center z coordinates
    cell: float             # lattice spacing (square cells)
    mask: np.ndarray        # (ny, nz) bool, True where the center lies in omega

    @property
    def covered_area(self) -> float:
        return float(self.mask.sum()) * self.cell**2


@dataclass(frozen=True, eq=False)
class CrossSection:
    kind: str                     # "disc" | "ellipse" | "rectangle" | "polygon"
    params: tuple                 # family parameters, see make_cross_section
    area: float
    diameter: float
    interior_grid: InteriorGrid

    @property
    def perimeter(self) -> float:
        return _perimeter(self)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Boolean inside-test for an (n, 2) array of (y, z) points."""
        return _contains(self, np.atleast_2d(np.asarray(pts, dtype=float)))


def make_cross_section(kind: str, params, resolution: int = 64) -> CrossSection:
    """Build a cross section of the given family.

    Parameters
    ----------
    kind : str
        "disc" (params: radius), "ellipse" (semi-axes a, b),
        "rectangle" (half-widths a, b), or "polygon" (CCW vertex list).
    params : sequence
        Family parameters as above.  For "polygon", an (n, 2) array-like of
        vertices ordered counterclockwise, n >= 3.
    resolution : int
        Number of interior-grid cells across the wider bounding-box side.

    Raises
    ------
    GeometryError
        If a parameter is non-positive, the polygon has fewer than three
        vertices, or its vertices are not counterclockwise.  The message
        names the offending parameter.
    """
    if resolution < 1:
        raise GeometryError(f"resolution must be >= 1, got {resolution}")
    if kind == "disc":
        (r,) = _positive_params(params, ("radius",))
        cs_params = (r,)
        area = np.pi * r * r
        diameter = 2.0 * r
    elif kind == "ellipse":
        a, b = _positive_params(params, ("a", "b"))
        cs_params = (a, b)
        area = np.pi * a * b
        diameter = 2.0 * max(a, b)
    elif kind == "rectangle":
        a, b = _positive_params(params, ("a", "b"))
        cs_params = (a, b)
        area = 4.0 * a * b
        diameter = 2.0 * np.hypot(a, b)
    elif kind == "polygon":
        verts = np.asarray(params, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise GeometryError(
                "vertices must be an (n, 2) array with n >= 3"
            )
        signed = _shoelace(verts)
        if signed <= 0:
            raise GeometryError(
                "vertices must be ordered counterclockwise (signed area > 0)"
            )
        cs_params = tuple(map(tuple, verts))
        area = signed
        diff = verts[:, None, :] - verts[None, :, :]
        diameter = float(np.sqrt((diff**2).sum(-1)).max())
    else:
        raise GeometryError(f"unknown cross-section kind {kind!r}")

    stub = CrossSection(kind, cs_params, float(area), float(diameter), None)
    grid = _build_interior_grid(stub, resolution)
    return CrossSection(kind, cs_params, float(area), float(diameter), grid)


def _positive_params(params, names):
    vals = np.atleast_1d(np.asarray(params, dtype=float))
    if vals.size != len(names):
        raise GeometryError(
            f"expected parameters {names}, got {vals.size} value(s)"
        )
    for name, v in zip(names, vals):
        if not np.isfinite(v) or v <= 0:
            raise GeometryError(f"{name} must be positive, got {v}")
    return [float(v) for v in vals]


def _shoelace(verts: np.ndarray) -> float:
    y, z = verts[:, 0], verts[:, 1]
    return 0.5 * float(np.sum(y * np.roll(z, -1) - np.roll(y, -1) * z))


def _vertices(cs: CrossSection) -> np.ndarray:
    if cs.kind == "rectangle":
        a, b = cs.params
        return np.array([(a, -b), (a, b), (-a, b), (-a, -b)])
    return np.asarray(cs.params, dtype=float)


def _bounding_box(cs: CrossSection):
    if cs.kind == "disc":
        r = cs.params[0]
        return (-r, r), (-r, r)
    if cs.kind == "ellipse" or cs.kind == "rectangle":
        a, b = cs.params
        return (-a, a), (-b, b)
    verts = _vertices(cs)
    return (verts[:, 0].min(), verts[:, 0].max()), (verts[:, 1].min(), verts[:, 1].max())


def _contains(cs: CrossSection, pts: np.ndarray) -> np.ndarray:
    y, z = pts[:, 0], pts[:, 1]
    if cs.kind == "disc":
        r = cs.params[0]
        return y * y + z * z <= r * r
    if cs.kind == "ellipse":
        a, b = cs.params
        return (y / a) ** 2 + (z / b) ** 2 <= 1.0
    if cs.kind == "rectangle":
        a, b = cs.params
        return (np.abs(y) <= a) & (np.abs(z) <= b)
    return Path(_vertices(cs)).contains_points(pts)


def _build_interior_grid(cs: CrossSection, resolution: int) -> InteriorGrid:
    (y0, y1), (z0, z1) = _bounding_box(cs)
    wy, wz = y1 - y0, z1 - z0
    cell = max(wy, wz) / resolution
    ny = max(1, int(round(wy / cell)))
    nz = max(1, int(round(wz / cell)))
    # center the lattice on the bounding box
    cy, cz = 0.5 * (y0 + y1), 0.5 * (z0 + z1)
    ys = cy + cell * (np.arange(ny) - 0.5 * (ny - 1))
    zs = cz + cell * (np.arange(nz) - 0.5 * (nz - 1))
    yy, zz = np.meshgrid(ys, zs, indexing="ij")
    pts = np.column_stack([yy.ravel(), zz.ravel()])
    mask = _contains(cs, pts).reshape(ny, nz)
    return InteriorGrid(ys=ys, zs=zs, cell=float(cell), mask=mask)


def interior_grid(cs: CrossSection, resolution: int) -> InteriorGrid:
    """Recompute the interior lattice of ``cs`` at a different resolution."""
    if resolution < 1:
        raise GeometryError(f"resolution must be >= 1, got {resolution}")
    return _build_interior_grid(cs, resolution)


def _perimeter(cs: CrossSection) -> float:
    if cs.kind == "disc":
        return 2.0 * np.pi * cs.params[0]
    if cs.kind == "ellipse":
        a, b = cs.params
        big, small = max(a, b), min(a, b)
        return 4.0 * big * float(ellipe(1.0 - (small / big) ** 2))
    verts = _vertices(cs)
    edges = np.roll(verts, -1, axis=0) - verts
    return float(np.hypot(edges[:, 0], edges[:, 1]).sum())


def boundary_quadrature(cs: CrossSection, n_points: int):
    """Midpoint quadrature nodes on the boundary of omega.

    Returns arrays ``(points, normals, weights)`` of shapes (n, 2), (n, 2),
    (n,).  Weights are arc-length measures: their sum converges to the
    perimeter.  Smooth families use equispaced parameter midpoints; polygon
    edges receive node counts proportional to their length (at least one
    each, largest-remainder rounding), with nodes at edge-interior midpoints,
    never at a corner.
    """
    if n_points < 8:
        raise GeometryError(f"n_points must be >= 8, got {n_points}")

    if cs.kind in ("disc", "ellipse"):
        if cs.kind == "disc":
            a = b = cs.params[0]
        else:
            a, b = cs.params
        t = (np.arange(n_points) + 0.5) / n_points
        ang = 2.0 * np.pi * t
        pts = np.column_stack([a * np.cos(ang), b * np.sin(ang)])
        dgamma = np.column_stack([-a * np.sin(ang), b * np.cos(ang)]) * (2.0 * np.pi)
        speed = np.hypot(dgamma[:, 0], dgamma[:, 1])
        tangents = dgamma / speed[:, None]
        normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
        weights = speed / n_points
        return pts, normals, weights

    verts = _vertices(cs)
    edges = np.roll(verts, -1, axis=0) - verts
    lengths = np.hypot(edges[:, 0], edges[:, 1])
    counts = _apportion(lengths, n_points)
    pts, normals, weights = [], [], []
    for v, e, L, k in zip(verts, edges, lengths, counts):
        s = (np.arange(k) + 0.5) / k
        pts.append(v + s[:, None] * e)
        tang = e / L
        normals.append(np.tile([tang[1], -tang[0]], (k, 1)))
        weights.append(np.full(k, L / k))
    return np.concatenate(pts), np.concatenate(normals), np.concatenate(weights)


def _apportion(lengths: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder apportionment with a floor of one node per edge."""
    n_edges = len(lengths)
    if total < n_edges:
        raise GeometryError(
            f"n_points must be >= number of edges ({n_edges}), got {total}"
        )
    quota = lengths / lengths.sum() * (total - n_edges)
    counts = np.floor(quota).astype(int)
    remainder = total - n_edges - counts.sum()
    order = np.argsort(-(quota - counts), kind="stable")
    counts[order[:remainder]] += 1
    return counts + 1


@dataclass(frozen=True, eq=False)
class WireDomain:
    """Axially truncated, transversely scaled wire (x_window x scale*omega).

    The axial coordinate is not scaled; only the cross section is multiplied
    by ``scale``.  Cell centers: xs along the wire, (ys, zs) from the scaled
    interior lattice of the cross section.
    """

    cross_section: CrossSection
    scale: float
    x_window: tuple
    axial_cells: int
    cross_cells: int
    xs: np.ndarray = field(repr=False, default=None)
    ys: np.ndarray = field(repr=False, default=None)
    zs: np.ndarray = field(repr=False, default=None)
    mask: np.ndarray = field(repr=False, default=None)

    @property
    def shape(self):
        return (len(self.xs), len(self.ys), len(self.zs))

    @property
    def spacings(self):
        hx = (self.x_window[1] - self.x_window[0]) / self.axial_cells
        if len(self.ys) > 1:
            hy = self.ys[1] - self.ys[0]
        else:
            hy = self.scale * interior_grid(self.cross_section, self.cross_cells).cell
        return (float(hx), float(hy), float(hy))

    @property
    def cell_volume(self) -> float:
        hx, hy, hz = self.spacings
        return hx * hy * hz


def make_wire_domain(
    cs: CrossSection,
    scale: float,
    x_window: tuple,
    axial_cells: int,
    cross_cells: int = 16,
) -> WireDomain:
    """Discretize the scaled wire over a finite axial window."""
    if scale <= 0:
        raise GeometryError(f"scale must be positive, got {scale}")
    x0, x1 = float(x_window[0]), float(x_window[1])
    if not x1 > x0:
        raise GeometryError(f"x_window must satisfy x0 < x1, got {x_window}")
    if axial_cells < 2:
        raise GeometryError(f"axial_cells must be >= 2, got {axial_cells}")
    if cross_cells < 1:
        raise GeometryError(f"cross_cells must be >= 1, got {cross_cells}")
    grid = interior_grid(cs, cross_cells)
    hx = (x1 - x0) / axial_cells
    xs = x0 + hx * (np.arange(axial_cells) + 0.5)
    return WireDomain(
        cross_section=cs,
        scale=float(scale),
        x_window=(x0, x1),
        axial_cells=int(axial_cells),
        cross_cells=int(cross_cells),
        xs=xs,
        ys=scale * grid.ys,
        zs=scale * grid.zs,
        mask=grid.mask.copy(),
    )


def cross_section_to_config(cs: CrossSection) -> dict:
    """Plain-dict form of a cross section, round-trippable via from_config."""
    cfg = {"shape": cs.kind}
    if cs.kind == "disc":
        cfg["radius"] = cs.params[0]
    elif cs.kind in ("ellipse", "rectangle"):
        cfg["a"], cfg["b"] = cs.params
    else:
        cfg["vertices"] = [list(v) for v in cs.params]
    return cfg


def cross_section_from_config(cfg: dict, resolution: int = 64) -> CrossSection:
    kind = cfg.get("shape")
    if kind == "disc":
        return make_cross_section("disc", (cfg["radius"],), resolution)
    if kind in ("ellipse", "rectangle"):
        return make_cross_section(kind, (cfg["a"], cfg["b"]), resolution)
    if kind == "polygon":
        return make_cross_section("polygon", cfg["vertices"], resolution)
    raise GeometryError(f"unknown cross-section kind {kind!r}")


def unit_diameter(cs: CrossSection, resolution: int = None) -> CrossSection:
    """Rescale a cross section so its diameter equals one."""
    res = resolution
    if res is None:
        g = cs.interior_grid
        res = max(len(g.ys), len(g.zs))
    f = 1.0 / cs.diameter
    if cs.kind == "disc":
        return make_cross_section("disc", (cs.params[0] * f,), res)
    if cs.kind in ("ellipse", "rectangle"):
        a, b = cs.params
        return make_cross_section(cs.kind, (a * f, b * f), res)
    verts = np.asarray(cs.params, dtype=float) * f
    return make_cross_section("polygon", verts, res)
