"""Discretized 3D magnetizations on a truncated wire.

Fields live at the cell centers of a WireDomain and are unit 3-vectors
inside the cross section, zero outside, with the axial tails clamped to
(-1,0,0) and (1,0,0) beyond the window.  The module evaluates the exchange
energy by face differences, the magnetostatic energy by a direct double sum
over volume and surface charges with analytic self-terms, takes per-slice
averages, applies the uniform scaling that trades exchange against stray
field, checks a per-slice Poincare inequality, bounds the number of axial
level crossings of the averaged profile from the energy, and runs projected
descent on the total energy for small grids.
"""

from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .demag import compute_demag_matrix
from .geometry import CrossSection, WireDomain, interior_grid, make_wire_domain

# Direct-sum ceiling.  Beyond ~1e5 charges the O(N^2) pass leaves the
# minutes-per-run regime this solver is built for.
DEFAULT_MAX_CHARGES = 120_000

# Payne-Weinberger: ||u - mean|| <= (diam/pi) ||grad u|| on convex domains.
CONVEX_POINCARE_CONSTANT = 1.0 / np.pi**2


class CapacityError(RuntimeError):
    """Charge count too large for the direct O(N^2) sum; coarsen the grid."""


@dataclass(eq=False)
class Field3D:
    """Unit-vector samples at the cell centers of a truncated wire.

    ``values`` has shape domain.shape + (3,).  Entries outside the cross
    section mask are stored as zeros; entries inside are renormalized to
    exact unit length at construction (inputs further than 1e-8 from the
    sphere are rejected as errors rather than silently rescaled).
    """

    domain: WireDomain
    values: np.ndarray
    tail_convention: str = "clamped"

    def __post_init__(self):
        self.values = np.array(self.values, dtype=float)
        expected = self.domain.shape + (3,)
        if self.values.shape != expected:
            raise ValueError(
                f"values shape {self.values.shape} does not match domain {expected}"
            )
        if self.tail_convention != "clamped":
            raise ValueError(f"unsupported tail convention {self.tail_convention!r}")
        mask = self.domain.mask
        self.values[:, ~mask] = 0.0
        norms = np.linalg.norm(self.values[:, mask], axis=-1)
        if norms.size:
            defect = np.abs(norms - 1.0).max()
            if defect > 1e-8:
                raise ValueError(
                    f"field samples deviate from unit length by {defect:.3e}"
                )
            self.values[:, mask] /= norms[..., None]

    def norm_defect(self) -> float:
        norms = np.linalg.norm(self.values[:, self.domain.mask], axis=-1)
        return float(np.abs(norms - 1.0).max()) if norms.size else 0.0


def uniform_field(domain: WireDomain, direction) -> Field3D:
    """Constant unit field over the wire."""
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    values = np.zeros(domain.shape + (3,))
    values[:, domain.mask] = direction
    return Field3D(domain=domain, values=values)


def sample_field(domain: WireDomain, fn) -> Field3D:
    """Evaluate ``fn(X, Y, Z) -> (..., 3)`` at the cell centers.

    The callable receives broadcast coordinate arrays of shape domain.shape
    and must return unit vectors (up to rounding) stacked on the last axis.
    """
    X = domain.xs[:, None, None]
    Y = domain.ys[None, :, None]
    Z = domain.zs[None, None, :]
    X, Y, Z = np.broadcast_arrays(X, Y, Z)
    values = np.asarray(fn(X, Y, Z), dtype=float)
    if values.shape != domain.shape + (3,):
        raise ValueError(f"field function returned shape {values.shape}")
    return Field3D(domain=domain, values=values)


def extend_profile(domain: WireDomain, profile) -> Field3D:
    """Extend a 1D wall profile constantly over the cross section.

    ``profile`` is any object with uniform ``grid`` and ``values`` arrays;
    values are interpolated onto the domain's axial cell centers with the
    clamped tails (-1,0,0) / (1,0,0) outside the profile's own window.
    """
    grid = np.asarray(profile.grid, dtype=float)
    vals = np.asarray(profile.values, dtype=float)
    line = np.empty((len(domain.xs), 3))
    line[:, 0] = np.interp(domain.xs, grid, vals[:, 0], left=-1.0, right=1.0)
    line[:, 1] = np.interp(domain.xs, grid, vals[:, 1], left=0.0, right=0.0)
    line[:, 2] = np.interp(domain.xs, grid, vals[:, 2], left=0.0, right=0.0)
    line /= np.linalg.norm(line, axis=1, keepdims=True)
    values = np.zeros(domain.shape + (3,))
    values[:, domain.mask] = line[:, None, :]
    return Field3D(domain=domain, values=values)


@dataclass(frozen=True)
class EnergyReport:
    """Exchange and magnetostatic energies of one field snapshot."""

    exchange: float
    magnetostatic: float
    grid_shape: tuple
    cell_size: tuple
    method: str = "direct-sum"   # magnetostatic evaluation; "none" if skipped

    def __post_init__(self):
        if self.exchange < 0:
            raise ValueError(f"exchange energy must be nonnegative, got {self.exchange}")
        if self.magnetostatic < -1e-9 * (1.0 + self.exchange):
            # the center-to-center charge sum can dip below zero for
            # boundary-tangential fields on staircase (non-grid-aligned)
            # sections; that is outside this report's envelope
            raise ValueError(
                f"magnetostatic energy came out negative ({self.magnetostatic:.3e}); "
                "the direct charge sum is reliable only on grid-aligned sections"
            )

    @property
    def total(self) -> float:
        return self.exchange + self.magnetostatic


# --------------------------------------------------------------- exchange

def _pair_masks(mask: np.ndarray):
    pair_y = mask[:-1, :] & mask[1:, :]
    pair_z = mask[:, :-1] & mask[:, 1:]
    return pair_y, pair_z


def _exchange_energy(values: np.ndarray, domain: WireDomain) -> float:
    hx, hy, hz = domain.spacings
    vol = hx * hy * hz
    mask = domain.mask
    pair_y, pair_z = _pair_masks(mask)
    e = 0.0
    d = values[1:] - values[:-1]
    e += float((d[:, mask] ** 2).sum()) * vol / hx**2
    d = values[:, 1:] - values[:, :-1]
    e += float((d[:, pair_y] ** 2).sum()) * vol / hy**2
    d = values[:, :, 1:] - values[:, :, :-1]
    e += float((d[:, pair_z] ** 2).sum()) * vol / hz**2
    return e


def _exchange_gradient(values: np.ndarray, domain: WireDomain) -> np.ndarray:
    hx, hy, hz = domain.spacings
    vol = hx * hy * hz
    mask = domain.mask
    pair_y, pair_z = _pair_masks(mask)
    g = np.zeros_like(values)

    d = values[1:] - values[:-1]
    d[:, ~mask] = 0.0
    c = 2.0 * vol / hx**2
    g[1:] += c * d
    g[:-1] -= c * d

    d = values[:, 1:] - values[:, :-1]
    d[:, ~pair_y] = 0.0
    c = 2.0 * vol / hy**2
    g[:, 1:] += c * d
    g[:, :-1] -= c * d

    d = values[:, :, 1:] - values[:, :, :-1]
    d[:, ~pair_z] = 0.0
    c = 2.0 * vol / hz**2
    g[:, :, 1:] += c * d
    g[:, :, :-1] -= c * d

    g[:, ~mask] = 0.0
    return g


def exchange_energy(f: Field3D) -> float:
    """Face-difference Dirichlet energy sum_faces |m_A - m_B|^2 V / h^2.

    Faces with a missing neighbor (outside the section or beyond the axial
    window) contribute nothing, the natural boundary convention.
    """
    return _exchange_energy(f.values, f.domain)


def exchange_energy_gradient(f: Field3D) -> np.ndarray:
    """Exact gradient of exchange_energy with respect to every sample."""
    return _exchange_gradient(f.values, f.domain)


# ----------------------------------------------------------- magnetostatics

def _corner_potential(a, b, c):
    # potential integral of a unit-density box [0,a]x[0,b]x[0,c] at its corner
    r = np.sqrt(a * a + b * b + c * c)
    return (
        b * c * np.arcsinh(a / np.hypot(b, c))
        + c * a * np.arcsinh(b / np.hypot(c, a))
        + a * b * np.arcsinh(c / np.hypot(a, b))
        - 0.5 * a * a * np.arctan(b * c / (a * r))
        - 0.5 * b * b * np.arctan(c * a / (b * r))
        - 0.5 * c * c * np.arctan(a * b / (c * r))
    )


def _box_potential(hx, hy, hz):
    """integral over an hx*hy*hz box of 1/|center - xi|; length^2 units."""
    return 8.0 * _corner_potential(0.5 * hx, 0.5 * hy, 0.5 * hz)


def _face_potential(ha, hb):
    """integral over an ha*hb rectangle of 1/|center - xi|; length units."""
    u, v = 0.5 * ha, 0.5 * hb
    return 4.0 * (u * np.arcsinh(v / u) + v * np.arcsinh(u / v))


@dataclass(eq=False)
class _ChargeSystem:
    matrix: sp.csr_matrix          # flattened field values -> charges
    positions: np.ndarray          # (n, 3) charge locations
    self_diag: np.ndarray          # analytic self-interaction coefficients
    n_volume: int
    near: sp.csr_matrix | None = None   # near-pair quadrature correction

    @property
    def size(self) -> int:
        return len(self.self_diag)


def _near_field_correction(
    positions: np.ndarray, hx: float, k: int, r_cut: float
) -> sp.csr_matrix | None:
    """Sparse correction replacing 1/(4 pi r) on close pairs by sub-sums.

    Every charge extends hx along the axis; for pairs with center distance
    below r_cut that extent is not negligible, so both members split into k
    equal slices (the charge density is uniform) and the interaction becomes
    the mean of the slice-to-slice Coulomb terms.  The returned symmetric
    matrix holds the difference to the plain center-to-center kernel.
    """
    n = len(positions)
    X, Y, Z = positions[:, 0], positions[:, 1], positions[:, 2]
    ii, jj = [], []
    block = max(16, int(4_000_000 // max(n, 1)))
    for s in range(0, n, block):
        e = min(s + block, n)
        d = X[s:e, None] - X[None, :]
        r2 = d * d
        d = Y[s:e, None] - Y[None, :]
        r2 += d * d
        d = Z[s:e, None] - Z[None, :]
        r2 += d * d
        a, b = np.nonzero(r2 < r_cut * r_cut)
        keep = s + a < b          # strict upper triangle, no diagonal
        ii.append(s + a[keep])
        jj.append(b[keep])
    ii = np.concatenate(ii) if ii else np.empty(0, dtype=int)
    jj = np.concatenate(jj) if jj else np.empty(0, dtype=int)
    if ii.size == 0:
        return None
    if ii.size * k * k > 1_200_000_000:
        raise CapacityError(
            f"{ii.size} near pairs at subdivision {k} exceed the correction "
            "budget; use closer-to-isotropic cells or a coarser grid"
        )

    offsets = hx * ((np.arange(k) + 0.5) / k - 0.5)
    doff = offsets[:, None] - offsets[None, :]      # (k, k) slice separations
    vals = np.empty(ii.size)
    chunk = max(1, int(8_000_000 // (k * k)))
    for s in range(0, ii.size, chunk):
        e = min(s + chunk, ii.size)
        i, j = ii[s:e], jj[s:e]
        dx = (X[i] - X[j])[:, None, None] + doff[None, :, :]
        rt2 = (Y[i] - Y[j]) ** 2 + (Z[i] - Z[j]) ** 2
        r = np.sqrt(dx * dx + rt2[:, None, None])
        exact = np.mean(1.0 / r, axis=(1, 2))
        center = 1.0 / np.hypot(X[i] - X[j], np.sqrt(rt2))
        vals[s:e] = (exact - center) / (4.0 * np.pi)
    upper = sp.csr_matrix((vals, (ii, jj)), shape=(n, n))
    return upper + upper.T


def _charge_system(domain: WireDomain) -> _ChargeSystem:
    """Assemble the linear map from field samples to lumped charges.

    Volume rows hold -div m * cell volume with centered differences inside
    and one-sided differences where a neighbor is missing; surface rows hold
    m . nu * face area from the face-adjacent cell.  The two axial end faces
    are omitted: the clamped tails continue the wire, so their charge
    cancels against the semi-infinite continuation.
    """
    nx, ny, nz = domain.shape
    hx, hy, hz = domain.spacings
    vol = hx * hy * hz
    mask = domain.mask
    xs, ys, zs = domain.xs, domain.ys, domain.zs

    def flat(i, j, k, c):
        return ((i * ny + j) * nz + k) * 3 + c

    rows, cols, data = [], [], []
    positions = []
    self_diag = []
    row = 0

    inside = np.argwhere(mask)
    box_self = _box_potential(hx, hy, hz) / (4.0 * np.pi * vol)

    # volume charges, one per interior cell and axial index
    for j, k in inside:
        has_ym = j > 0 and mask[j - 1, k]
        has_yp = j < ny - 1 and mask[j + 1, k]
        has_zm = k > 0 and mask[j, k - 1]
        has_zp = k < nz - 1 and mask[j, k + 1]
        for i in range(nx):
            # d m1 / dx
            if 0 < i < nx - 1:
                rows += [row, row]
                cols += [flat(i + 1, j, k, 0), flat(i - 1, j, k, 0)]
                data += [-vol / (2 * hx), vol / (2 * hx)]
            elif i == 0:
                rows += [row, row]
                cols += [flat(1, j, k, 0), flat(0, j, k, 0)]
                data += [-vol / hx, vol / hx]
            else:
                rows += [row, row]
                cols += [flat(nx - 1, j, k, 0), flat(nx - 2, j, k, 0)]
                data += [-vol / hx, vol / hx]
            # d m2 / dy
            if has_ym and has_yp:
                rows += [row, row]
                cols += [flat(i, j + 1, k, 1), flat(i, j - 1, k, 1)]
                data += [-vol / (2 * hy), vol / (2 * hy)]
            elif has_yp:
                rows += [row, row]
                cols += [flat(i, j + 1, k, 1), flat(i, j, k, 1)]
                data += [-vol / hy, vol / hy]
            elif has_ym:
                rows += [row, row]
                cols += [flat(i, j, k, 1), flat(i, j - 1, k, 1)]
                data += [-vol / hy, vol / hy]
            # d m3 / dz
            if has_zm and has_zp:
                rows += [row, row]
                cols += [flat(i, j, k + 1, 2), flat(i, j, k - 1, 2)]
                data += [-vol / (2 * hz), vol / (2 * hz)]
            elif has_zp:
                rows += [row, row]
                cols += [flat(i, j, k + 1, 2), flat(i, j, k, 2)]
                data += [-vol / hz, vol / hz]
            elif has_zm:
                rows += [row, row]
                cols += [flat(i, j, k, 2), flat(i, j, k - 1, 2)]
                data += [-vol / hz, vol / hz]
            positions.append((xs[i], ys[j], zs[k]))
            self_diag.append(box_self)
            row += 1

    n_volume = row
    area_y = hx * hz
    area_z = hx * hy
    face_self_y = _face_potential(hx, hz) / (4.0 * np.pi * area_y)
    face_self_z = _face_potential(hx, hy) / (4.0 * np.pi * area_z)

    # lateral surface charges where a transverse neighbor is missing
    for j, k in inside:
        sides = []
        if j == 0 or not mask[j - 1, k]:
            sides.append((1, -1.0, area_y, (0.0, -0.5 * hy, 0.0), face_self_y))
        if j == ny - 1 or not mask[j + 1, k]:
            sides.append((1, 1.0, area_y, (0.0, 0.5 * hy, 0.0), face_self_y))
        if k == 0 or not mask[j, k - 1]:
            sides.append((2, -1.0, area_z, (0.0, 0.0, -0.5 * hz), face_self_z))
        if k == nz - 1 or not mask[j, k + 1]:
            sides.append((2, 1.0, area_z, (0.0, 0.0, 0.5 * hz), face_self_z))
        for comp, sign, area, offset, fself in sides:
            for i in range(nx):
                rows.append(row)
                cols.append(flat(i, j, k, comp))
                data.append(sign * area)
                positions.append(
                    (xs[i] + offset[0], ys[j] + offset[1], zs[k] + offset[2])
                )
                self_diag.append(fself)
                row += 1

    matrix = sp.csr_matrix(
        (data, (rows, cols)), shape=(row, nx * ny * nz * 3)
    )
    positions = np.asarray(positions, dtype=float)

    # Cells elongated along the wire lose the near-cancellation between
    # close opposite-face charges; refine close pairs by slicing along x.
    near = None
    hmin = min(hy, hz)
    if hx > 1.5 * hmin:
        k = int(np.ceil(hx / hmin))
        near = _near_field_correction(positions, hx, k, 3.0 * hx)

    return _ChargeSystem(
        matrix=matrix,
        positions=positions,
        self_diag=np.asarray(self_diag, dtype=float),
        n_volume=n_volume,
        near=near,
    )


def _potentials(csys: _ChargeSystem, q: np.ndarray, threads: int | None) -> np.ndarray:
    """phi_i = sum_j q_j / (4 pi r_ij) + self_i q_i, blocked and deterministic.

    The row range is split into fixed blocks; each block's contribution is
    computed independently and written to a disjoint slice, so the result is
    identical for any thread count.
    """
    n = csys.size
    X, Y, Z = (np.ascontiguousarray(csys.positions[:, c]) for c in range(3))
    phi = np.empty(n)
    workers = threads if threads and threads > 0 else 1
    block = max(16, int(4_000_000 // max(n, 1)))
    spans = [(s, min(s + block, n)) for s in range(0, n, block)]

    def fill(span):
        s, e = span
        d = X[s:e, None] - X[None, :]
        r = d * d
        d = Y[s:e, None] - Y[None, :]
        r += d * d
        d = Z[s:e, None] - Z[None, :]
        r += d * d
        np.sqrt(r, out=r)
        r[np.arange(e - s), np.arange(s, e)] = np.inf
        np.divide(1.0, r, out=r)
        phi[s:e] = (r @ q) / (4.0 * np.pi) + csys.self_diag[s:e] * q[s:e]

    if workers == 1 or len(spans) == 1:
        for span in spans:
            fill(span)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, spans))
    if csys.near is not None:
        phi += csys.near @ q
    return phi


def _check_capacity(n: int, max_charges: int):
    if n > max_charges:
        raise CapacityError(
            f"{n} charges exceed the direct-sum capacity of {max_charges}; "
            "coarsen the grid or raise max_charges"
        )


def magnetostatic_energy(
    f: Field3D,
    threads: int | None = None,
    max_charges: int = DEFAULT_MAX_CHARGES,
) -> float:
    """Stray-field energy by the direct charge double sum.

    E = sum_ij q_i q_j / (4 pi r_ij), with the diagonal replaced by the
    analytic potential of a uniformly charged box (volume terms) or face
    (surface terms) evaluated at its own center.
    """
    csys = _charge_system(f.domain)
    _check_capacity(csys.size, max_charges)
    q = csys.matrix @ f.values.ravel()
    phi = _potentials(csys, q, threads)
    return float(q @ phi)


def magnetostatic_energy_gradient(
    f: Field3D,
    threads: int | None = None,
    max_charges: int = DEFAULT_MAX_CHARGES,
) -> np.ndarray:
    """Gradient of the charge double sum with respect to every sample."""
    csys = _charge_system(f.domain)
    _check_capacity(csys.size, max_charges)
    q = csys.matrix @ f.values.ravel()
    phi = _potentials(csys, q, threads)
    return (2.0 * (csys.matrix.T @ phi)).reshape(f.values.shape)


def total_energy(
    f: Field3D,
    threads: int | None = None,
    max_charges: int = DEFAULT_MAX_CHARGES,
    magnetostatics: bool = True,
) -> EnergyReport:
    """EnergyReport for one field; set magnetostatics=False to skip the sum."""
    mag = magnetostatic_energy(f, threads, max_charges) if magnetostatics else 0.0
    return EnergyReport(
        exchange=exchange_energy(f),
        magnetostatic=mag,
        grid_shape=f.domain.shape,
        cell_size=f.domain.spacings,
        method="direct-sum" if magnetostatics else "none",
    )


def charge_totals(f: Field3D) -> tuple[float, float]:
    """(net volume charge, net surface charge); their sum is O(h) small."""
    csys = _charge_system(f.domain)
    q = csys.matrix @ f.values.ravel()
    return float(q[: csys.n_volume].sum()), float(q[csys.n_volume :].sum())


# ------------------------------------------------------------ slice averages

@dataclass(eq=False)
class AveragedProfile:
    """Cross-section mean of a field per axial slice.

    The mean of unit vectors never leaves the unit ball, so |values| <= 1
    holds sample-wise by convexity.
    """

    grid: np.ndarray       # axial cell centers
    values: np.ndarray     # (nx, 3) slice means

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.grid), 3):
            raise ValueError("values must be (len(grid), 3)")


def average_profile(f: Field3D) -> AveragedProfile:
    """Mean of m over the interior cells of each axial slice."""
    means = f.values[:, f.domain.mask].mean(axis=1)
    return AveragedProfile(grid=f.domain.xs.copy(), values=means)


def poincare_check(f: Field3D, c_p: float | None = None, enforce: bool = True):
    """Per-slice transverse Poincare estimate.

    Returns (lhs, rhs) arrays over the axial slices, where
    lhs = int |m - mbar|^2 over the slice and
    rhs = c_p * (section diameter)^2 * int |grad_yz m|^2.
    The default constant 1/pi^2 is the sharp convex-domain value; calibrate
    a section-specific constant with calibrate_poincare.  With enforce=True
    any slice violating lhs <= rhs raises.
    """
    if c_p is None:
        c_p = CONVEX_POINCARE_CONSTANT
    mask = f.domain.mask
    hx, hy, hz = f.domain.spacings
    cell_area = hy * hz
    mbar = average_profile(f).values
    dev = f.values[:, mask] - mbar[:, None, :]
    lhs = (dev**2).sum(axis=(1, 2)) * cell_area

    pair_y, pair_z = _pair_masks(mask)
    d = f.values[:, 1:] - f.values[:, :-1]
    grad2 = (d[:, pair_y] ** 2).sum(axis=(1, 2)) / hy**2
    d = f.values[:, :, 1:] - f.values[:, :, :-1]
    grad2 = grad2 + (d[:, pair_z] ** 2).sum(axis=(1, 2)) / hz**2
    diameter = f.domain.scale * f.domain.cross_section.diameter
    rhs = c_p * diameter**2 * grad2 * cell_area

    if enforce:
        slack = 1e-9 * (1.0 + float(lhs.max(initial=0.0)))
        bad = np.nonzero(lhs > rhs + slack)[0]
        if bad.size:
            i = int(bad[np.argmax((lhs - rhs)[bad])])
            raise ValueError(
                f"Poincare estimate fails at slice {i}: "
                f"{lhs[i]:.6e} > {rhs[i]:.6e} with c_p = {c_p:.6g}"
            )
    return lhs, rhs


def calibrate_poincare(cs: CrossSection, resolution: int = 32, modes: int = 3) -> float:
    """Measure a Poincare constant for one cross-section shape.

    Maximizes int(u - mean)^2 / (diam^2 int |grad u|^2) over a basis of
    low-frequency product cosines on the section's interior grid, using the
    same face-difference quadrature as poincare_check.  The returned value
    is a usable c_p for fields dominated by those frequencies.
    """
    g = interior_grid(cs, resolution)
    mask = g.mask
    h = g.cell
    ys = g.ys
    zs = g.zs
    ly = ys[-1] - ys[0] + h
    lz = zs[-1] - zs[0] + h
    y0 = ys[0] - 0.5 * h
    z0 = zs[0] - 0.5 * h
    pair_y = mask[:-1, :] & mask[1:, :]
    pair_z = mask[:, :-1] & mask[:, 1:]
    best = 0.0
    for ky in range(modes + 1):
        for kz in range(modes + 1):
            if ky == 0 and kz == 0:
                continue
            u = np.cos(ky * np.pi * (ys[:, None] - y0) / ly) * np.cos(
                kz * np.pi * (zs[None, :] - z0) / lz
            )
            mean = u[mask].mean()
            num = ((u[mask] - mean) ** 2).sum()
            dy = u[1:, :] - u[:-1, :]
            dz = u[:, 1:] - u[:, :-1]
            den = (dy[pair_y] ** 2).sum() / h**2 + (dz[pair_z] ** 2).sum() / h**2
            if den > 0:
                best = max(best, num / (den * cs.diameter**2))
    return best


# ------------------------------------------------------------------ scaling

def scale_field(f: Field3D, t: float) -> Field3D:
    """Magnify the wire by t and carry the samples along, m_t(xi) = m(xi/t).

    Cell centers of the scaled domain are exactly t times the original
    centers, so no resampling happens: the values array transfers verbatim.
    Exchange energy scales exactly by t and the charge-sum magnetostatic
    energy exactly by t^3.
    """
    if t <= 0:
        raise ValueError(f"scale factor must be positive, got {t}")
    dom = f.domain
    scaled = make_wire_domain(
        dom.cross_section,
        dom.scale * t,
        (dom.x_window[0] * t, dom.x_window[1] * t),
        dom.axial_cells,
        dom.cross_cells,
    )
    return Field3D(domain=scaled, values=f.values.copy(),
                   tail_convention=f.tail_convention)


# ----------------------------------------------------- oscillation counting

@dataclass(frozen=True)
class CrossingFamilies:
    """Axial intervals where the averaged m1 swings between two levels."""

    count: int
    total_length: float
    intervals: tuple


def _validate_levels(alpha: float, beta: float, rho: float):
    if not -1.0 < alpha < beta < 1.0:
        raise ValueError(
            f"levels must satisfy -1 < alpha < beta < 1, got ({alpha}, {beta})"
        )
    if not 0.0 < rho < 1.0:
        raise ValueError(f"rho must lie in (0, 1), got {rho}")


def crossing_families(profile, alpha: float, beta: float, rho: float) -> CrossingFamilies:
    """Count monotone-in-level crossings of the averaged axial component.

    A crossing runs from the last sample at or below alpha to the first
    subsequent sample at or above beta (or the mirror image), with every
    strictly intermediate sample confined to |m1| <= rho.  Exceeding rho
    without reaching the far level voids the pending crossing.
    """
    _validate_levels(alpha, beta, rho)
    xs = np.asarray(profile.grid, dtype=float)
    m1 = np.asarray(profile.values, dtype=float)[:, 0]
    side = None
    exit_x = None
    broken = False
    intervals = []
    for x, v in zip(xs, m1):
        if v <= alpha:
            if side == "high" and not broken:
                intervals.append((exit_x, x))
            side = "low"
            exit_x = x
            broken = False
        elif v >= beta:
            if side == "low" and not broken:
                intervals.append((exit_x, x))
            side = "high"
            exit_x = x
            broken = False
        elif abs(v) > rho:
            broken = True
    total = float(sum(b - a for a, b in intervals))
    return CrossingFamilies(
        count=len(intervals), total_length=total, intervals=tuple(intervals)
    )


def oscillation_constant(
    alpha: float,
    beta: float,
    rho: float,
    cs: CrossSection,
    energy: float,
    d: float,
    c_p: float | None = None,
    n_points: int = 256,
) -> float:
    """Energy-derived cap on the number of crossing families.

    M = (E/(beta-alpha)^2 + (C1 + c_p d^2 E)/(1 - rho^2)) / area, where
    C1 = 2E/min(alpha2, alpha3) controls the transverse averages at small
    section size.  Zero energy gives M = 0: constant fields cross nothing.
    """
    _validate_levels(alpha, beta, rho)
    if energy < 0:
        raise ValueError(f"energy must be nonnegative, got {energy}")
    if d <= 0:
        raise ValueError(f"section size d must be positive, got {d}")
    if c_p is None:
        c_p = CONVEX_POINCARE_CONSTANT
    dm = compute_demag_matrix(cs, n_points)
    c1 = 2.0 * energy / min(dm.alpha2, dm.alpha3)
    return (
        energy / (beta - alpha) ** 2 + (c1 + c_p * d * d * energy) / (1.0 - rho * rho)
    ) / cs.area


# ------------------------------------------------------------------ descent

@dataclass
class Descent3DOptions:
    step: float = 0.1
    max_iters: int = 500
    grad_tol: float = 1e-3
    threads: int | None = None
    max_charges: int = DEFAULT_MAX_CHARGES


@dataclass
class Energy3DHistory:
    reports: list
    converged: bool
    iterations: int
    final_grad_norm: float

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.total for r in self.reports])


def _clamp_ends(values: np.ndarray, mask: np.ndarray):
    values[0, mask] = (-1.0, 0.0, 0.0)
    values[-1, mask] = (1.0, 0.0, 0.0)


def _renormalize_cells(values: np.ndarray, mask: np.ndarray):
    norms = np.linalg.norm(values[:, mask], axis=-1)
    values[:, mask] /= norms[..., None]


def minimize_3d(
    f: Field3D, opts: Descent3DOptions | None = None
) -> tuple[Field3D, Energy3DHistory]:
    """Projected descent on exchange plus magnetostatic energy.

    Mirrors the 1D flow: Euclidean gradient with the radial part removed,
    renormalization to the sphere each step, the two axial end slices held
    at (-1,0,0) and (1,0,0), and backtracking that keeps the recorded
    energies nonincreasing.  Guarded by the direct-sum capacity; on hitting
    the iteration budget the best iterate found is returned with a warning.
    """
    opts = opts or Descent3DOptions()
    dom = f.domain
    mask = dom.mask
    csys = _charge_system(dom)
    _check_capacity(csys.size, opts.max_charges)

    values = f.values.copy()
    _clamp_ends(values, mask)

    def make_report(ex, mag):
        return EnergyReport(
            exchange=ex,
            magnetostatic=mag,
            grid_shape=dom.shape,
            cell_size=dom.spacings,
            method="direct-sum",
        )

    def mag_and_phi(v):
        q = csys.matrix @ v.ravel()
        phi = _potentials(csys, q, opts.threads)
        return float(q @ phi), phi

    ex = _exchange_energy(values, dom)
    mag, phi = mag_and_phi(values)
    energy = ex + mag
    reports = [make_report(ex, mag)]
    step = opts.step
    grad_norm = np.inf
    converged = False
    it = 0

    for it in range(1, opts.max_iters + 1):
        g = _exchange_gradient(values, dom)
        g += (2.0 * (csys.matrix.T @ phi)).reshape(values.shape)
        radial = (g * values).sum(axis=-1, keepdims=True)
        g -= radial * values
        g[0] = g[-1] = 0.0
        g[:, ~mask] = 0.0
        grad_norm = float(np.abs(g).max())
        if grad_norm < opts.grad_tol:
            converged = True
            break
        accepted = False
        while step > 1e-14:
            trial = values - step * g
            _renormalize_cells(trial, mask)
            _clamp_ends(trial, mask)
            trial_ex = _exchange_energy(trial, dom)
            trial_mag, trial_phi = mag_and_phi(trial)
            if trial_ex + trial_mag <= energy:
                values = trial
                ex, mag, phi = trial_ex, trial_mag, trial_phi
                energy = ex + mag
                reports.append(make_report(ex, mag))
                step *= 1.1
                accepted = True
                break
            step *= 0.5
        if not accepted:
            break   # step underflow: converged to grid resolution

    if not converged:
        warnings.warn(
            f"descent stopped after {it} iterations with projected gradient "
            f"{grad_norm:.3e} above tolerance {opts.grad_tol:.3e}",
            stacklevel=2,
        )
    history = Energy3DHistory(
        reports=reports,
        converged=converged,
        iterations=it,
        final_grad_norm=grad_norm,
    )
    return Field3D(domain=dom, values=values), history
