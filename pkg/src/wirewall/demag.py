"""Demagnetizing matrix of a wire cross section.

For a transversely constant magnetization the stray-field energy per unit
wire length is a quadratic form in the two in-plane components.  Its 2x2
matrix is a double boundary integral of the logarithmic kernel against the
outward-normal components,

    M_ij = -(1/2pi) * integral over boundary pairs of
           n_i(x) n_j(y) ln|x - y| ds(x) ds(y),    i, j in {y, z}.

The quadrature is a midpoint double sum.  The kernel's log singularity on
the diagonal is handled by replacing each node's own arc cell with the
analytic flat-panel integral of ln: over a cell of arclength w centered at
the node, integral of ln|u| du = w*(ln(w/2) - 1).  For polygons this patch
is exact; for smooth boundaries it is accurate to the cell's curvature.

Convergence is monitored by recomputing at half the node count; the
entrywise difference is reported as ``estimated_error``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import CrossSection, GeometryError, boundary_quadrature


class AccuracyError(RuntimeError):
    """Quadrature did not reach the caller's tolerance; carries both runs."""

    def __init__(self, estimated_error, tolerance, entries, entries_half):
        self.estimated_error = estimated_error
        self.tolerance = tolerance
        self.entries = entries
        self.entries_half = entries_half
        super().__init__(
            f"estimated_error {estimated_error:.3e} exceeds tolerance "
            f"{tolerance:.3e}; full-resolution entries {entries}, "
            f"half-resolution entries {entries_half}"
        )


@dataclass(frozen=True)
class DemagMatrix:
    """Symmetric 2x2 form with its eigendecomposition and quadrature info.

    ``rotation_angle`` is the CCW angle that, applied to the cross section,
    brings the form to diag(alpha2, alpha3); for a shape tilted by phi it
    reads -phi (mod pi).  When the eigenvalues are indistinguishable at the
    quadrature accuracy the frame is arbitrary: the angle is pinned to 0 and
    ``degenerate`` is set so alignment logic downstream knows.
    """

    m22: float
    m23: float
    m33: float
    alpha2: float       # smaller eigenvalue
    alpha3: float       # larger eigenvalue
    rotation_angle: float
    quad_points: int
    estimated_error: float
    degenerate: bool = False

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m22, self.m23], [self.m23, self.m33]])


def _entries(cs: CrossSection, n: int) -> np.ndarray:
    pts, normals, w = boundary_quadrature(cs, n)
    diff = pts[:, None, :] - pts[None, :, :]
    d2 = diff[..., 0] ** 2 + diff[..., 1] ** 2
    np.fill_diagonal(d2, 1.0)   # excluded pair; ln(1) = 0 drops out
    ln_d = 0.5 * np.log(d2)
    wn = w[:, None] * normals                       # (n, 2) weighted normals
    m = wn.T @ ln_d @ wn
    band = w * (np.log(0.5 * w) - 1.0)              # own-cell analytic patch
    m += normals.T @ (normals * (w * band)[:, None])
    m = -m / (2.0 * np.pi)
    return 0.5 * (m + m.T)      # symmetrize away quadrature roundoff


def diagonalize(dm) -> tuple[float, float, float]:
    """Eigenvalues (ascending) and rotation angle of a symmetric 2x2 form.

    Accepts a DemagMatrix or any 2x2 array-like.  Returns
    ``(alpha2, alpha3, rotation_angle)`` with alpha2 <= alpha3 and the angle
    theta in (-pi/2, pi/2] such that rotating coordinates counterclockwise
    by theta diagonalizes the form: R(theta) M R(theta)^T = diag(alpha2,
    alpha3).
    """
    if isinstance(dm, DemagMatrix):
        a, b, c = dm.m22, dm.m23, dm.m33
    else:
        arr = np.asarray(dm, dtype=float)
        if arr.shape != (2, 2):
            raise ValueError(f"expected a 2x2 matrix, got shape {arr.shape}")
        if abs(arr[0, 1] - arr[1, 0]) > 1e-12 * max(1.0, abs(arr).max()):
            raise ValueError("matrix must be symmetric")
        a, b, c = arr[0, 0], arr[0, 1], arr[1, 1]
    mean = 0.5 * (a + c)
    half_gap = 0.5 * np.hypot(c - a, 2.0 * b)
    theta = 0.5 * np.arctan2(2.0 * b, c - a)
    if theta <= -0.5 * np.pi:   # atan2 returns -pi on the negative-zero branch
        theta += np.pi
    return float(mean - half_gap), float(mean + half_gap), float(theta)


def compute_demag_matrix(
    cs: CrossSection, n_points: int, tolerance: float | None = None
) -> DemagMatrix:
    """Assemble the demagnetizing matrix with n_points boundary nodes.

    n_points must be at least 32 so that the half-resolution comparison run
    stays above the quadrature minimum.  If ``tolerance`` is given and the
    Richardson comparison exceeds it, AccuracyError reports both runs.
    """
    if n_points < 32:
        raise GeometryError(f"n_points must be >= 32, got {n_points}")
    m = _entries(cs, n_points)
    m_half = _entries(cs, n_points // 2)
    est = float(np.max(np.abs(m - m_half)))
    if tolerance is not None and est > tolerance:
        raise AccuracyError(
            est,
            tolerance,
            (float(m[0, 0]), float(m[0, 1]), float(m[1, 1])),
            (float(m_half[0, 0]), float(m_half[0, 1]), float(m_half[1, 1])),
        )
    alpha2, alpha3, angle = diagonalize(m)
    degenerate = alpha3 - alpha2 <= est
    if degenerate:
        angle = 0.0
    return DemagMatrix(
        m22=float(m[0, 0]),
        m23=float(m[0, 1]),
        m33=float(m[1, 1]),
        alpha2=alpha2,
        alpha3=alpha3,
        rotation_angle=angle,
        quad_points=int(n_points),
        estimated_error=est,
        degenerate=degenerate,
    )


def alpha_omega(dm: DemagMatrix, cs: CrossSection) -> float:
    """Area-normalized smallest eigenvalue: the wall-width coefficient."""
    return dm.alpha2 / cs.area
