"""Command-line front end: parameter sweeps to CSV, gnuplot scripts, figures.

Subcommands
-----------
compute-matrix    demagnetizing matrix of one cross section
minimize-profile  reduced 1D descent with profile and energy-history output
energy3d          3D energies of a reference field over a thickness ladder
minimize3d        3D projected descent over a thickness ladder
vortex-scan       thick-wire circulating construction against its budget
verify-lemmas     inequality check suite as a CSV report

Values can come from a key=value config file (--config, # comments); explicit
flags win over file entries. Every successful run echoes its fully resolved
configuration into the output directory next to the CSVs; with --threads 1
the emitted files are byte-identical across reruns. Output is buffered until
the run finishes, so a failing run writes nothing. Exit codes: 0 success,
1 bad input, 2 internal failure. Failing bound checks are data, not errors.
"""

import argparse
import csv
import io
import math
import os
import sys
from pathlib import Path

import numpy as np

from .demag import AccuracyError, compute_demag_matrix
from .field3d import (
    CapacityError,
    Descent3DOptions,
    Field3D,
    average_profile,
    extend_profile,
    minimize_3d,
    total_energy,
)
from .geometry import GeometryError, make_cross_section, make_wire_domain, unit_diameter
from .lemmas import LemmaSuiteConfig, run_all
from .profiles import (
    DescentOptions,
    ReducedEnergyParams,
    WallProfile,
    align_profile,
    closed_form_minimum,
    default_window,
    fixed_minimizer,
    minimize_reduced,
    transverse_profile,
)
from .vortex import VortexParams, energy_slope, verify_bounds


class UsageError(ValueError):
    """Bad flags, config keys, or parameter values; exits with code 1."""


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.17g}"
    return str(x)


def _cast_float(key, raw):
    try:
        return float(raw)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for {key}: {raw!r}") from None


def _cast_int(key, raw):
    try:
        return int(raw)
    except (TypeError, ValueError):
        raise UsageError(f"invalid value for {key}: {raw!r}") from None


def _cast_bool(key, raw):
    if isinstance(raw, bool):
        return raw
    text = str(raw).strip().lower()
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise UsageError(f"invalid value for {key}: {raw!r}")


def _cast_floats(key, raw):
    parts = [p for p in str(raw).split(",") if p.strip()]
    return tuple(_cast_float(key, p) for p in parts)


def _cast_str(key, raw):
    return str(raw)


class _Opt:
    def __init__(self, name, cast=_cast_str, default=None, flag=False, help=""):
        self.name = name
        self.cast = cast
        self.default = default
        self.flag = flag
        self.help = help

    @property
    def dest(self):
        return self.name.replace("-", "_")


_COMMON = [
    _Opt("outdir", help="output directory (default: $WIREWALL_OUTDIR or .)"),
    _Opt("threads", _cast_int, help="worker cap for the charge sums"),
]
_GEOMETRY = [
    _Opt("shape", help="disc | ellipse | rectangle | polygon"),
    _Opt("radius", _cast_float, help="disc radius"),
    _Opt("a", _cast_float, help="first semi-axis / half-width"),
    _Opt("b", _cast_float, help="second semi-axis / half-width"),
    _Opt("vertices", help="polygon vertices 'x1,y1;x2,y2;...' counterclockwise"),
    _Opt("resolution", _cast_int, 64, help="interior-grid cells across the section"),
    _Opt("unit-diameter", _cast_bool, False, flag=True, help="rescale to diameter 1"),
]
_PLOT = [_Opt("no-plot", _cast_bool, False, flag=True, help="skip gnuplot script and figures")]

_SUBCOMMANDS = {
    "compute-matrix": _COMMON
    + _GEOMETRY
    + [
        _Opt("n", _cast_int, 256, help="boundary quadrature points"),
        _Opt("tolerance", _cast_float, help="fail if the error estimate exceeds this"),
    ],
    "minimize-profile": _COMMON
    + _GEOMETRY
    + _PLOT
    + [
        _Opt("alpha2", _cast_float, help="smaller quadratic coefficient"),
        _Opt("alpha3", _cast_float, help="larger quadratic coefficient"),
        _Opt("area", _cast_float, help="cross-section area weighting the exchange"),
        _Opt("n", _cast_int, 256, help="boundary quadrature points (geometry route)"),
        _Opt("samples", _cast_int, 4096, help="profile sample count"),
        _Opt("window", _cast_float, help="half-width of the x window"),
        _Opt("init", _cast_str, "closed-form", help="closed-form | perturbed | rotated"),
        _Opt("seed", _cast_int, 0, help="seed for the perturbed initialization"),
        _Opt("step", _cast_float, 0.05, help="initial descent step"),
        _Opt("max-iters", _cast_int, 20000),
        _Opt("grad-tol", _cast_float, 1e-6),
        _Opt("transverse-seed", _cast_float, help="symmetry-breaking bump amplitude"),
    ],
    "energy3d": _COMMON
    + _GEOMETRY
    + _PLOT
    + [
        _Opt("d-ladder", _cast_floats, help="comma list of section scales"),
        _Opt("axial-cells", _cast_int, 64),
        _Opt("cross-cells", _cast_int, 8),
        _Opt("window", _cast_float, 10.0, help="half-width of the x window"),
        _Opt("init", _cast_str, "closed-form", help="closed-form | perturbed | rotated"),
        _Opt("seed", _cast_int, 0),
        _Opt("n", _cast_int, 256, help="boundary quadrature points"),
        _Opt("max-charges", _cast_int, 120_000),
    ],
    "minimize3d": _COMMON
    + _GEOMETRY
    + _PLOT
    + [
        _Opt("d-ladder", _cast_floats, help="comma list of section scales"),
        _Opt("axial-cells", _cast_int, 64),
        _Opt("cross-cells", _cast_int, 8),
        _Opt("window", _cast_float, 10.0),
        _Opt("init", _cast_str, "closed-form", help="closed-form | perturbed | rotated"),
        _Opt("seed", _cast_int, 0),
        _Opt("n", _cast_int, 256),
        _Opt("max-charges", _cast_int, 120_000),
        _Opt("step", _cast_float, 0.1),
        _Opt("max-iters", _cast_int, 500),
        _Opt("grad-tol", _cast_float, 1e-3),
    ],
    "vortex-scan": _COMMON
    + _PLOT
    + [
        _Opt("d-ladder", _cast_floats, (4.0, 8.0, 16.0), help="section half-widths"),
        _Opt("grid", _cast_int, 8, help="cells per section half-width"),
        _Opt("length", _cast_float, help="explicit half-length (single-d scans only)"),
        _Opt("max-charges", _cast_int, 120_000),
    ],
    "verify-lemmas": _COMMON
    + [
        _Opt("seed", _cast_int, 0),
        _Opt("set", _cast_str, "all", help="all or comma list of A1,A2,A3,L31,L32,L33"),
        _Opt("a1-pairs", _cast_int, 6),
        _Opt("a2-cases", _cast_int, 12),
        _Opt("a3-cases", _cast_int, 12),
    ],
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_config_file(path: str) -> dict:
    entries = {}
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, 1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {text!r}")
        key, value = text.split("=", 1)
        entries[key.strip()] = value.strip()
    return entries


def parse_config(argv) -> tuple:
    """Resolve (subcommand, config dict); flags override file entries."""
    parser = _Parser(prog="wirewall", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand")
    for name, opts in _SUBCOMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="key=value config file")
        for opt in opts:
            if opt.flag:
                p.add_argument(f"--{opt.name}", action="store_true", default=None, help=opt.help)
            else:
                p.add_argument(f"--{opt.name}", default=None, help=opt.help)
    args = parser.parse_args(argv)
    if args.subcommand is None:
        raise UsageError("a subcommand is required (see --help)")

    file_cfg = _read_config_file(args.config) if args.config else {}
    resolved = {}
    for opt in _SUBCOMMANDS[args.subcommand]:
        raw = getattr(args, opt.dest)
        file_raw = file_cfg.pop(opt.name, None)
        if raw is None:
            raw = file_raw
        if raw is None:
            resolved[opt.name] = opt.default
        elif opt.flag:
            resolved[opt.name] = _cast_bool(opt.name, raw)
        else:
            resolved[opt.name] = opt.cast(opt.name, raw)
    if file_cfg:
        key = sorted(file_cfg)[0]
        raise UsageError(f"unknown config key {key!r} for {args.subcommand}")
    return args.subcommand, resolved


class _Emitter:
    """Buffers every output file; nothing touches disk until flush().

    A run that errors out therefore leaves the output directory exactly as
    it found it (it is not even created).
    """

    def __init__(self, outdir: Path):
        self.outdir = outdir
        self._files = []  # (name, bytes)

    def csv(self, name, header, rows):
        if not rows:
            raise UsageError(f"refusing to write empty table {name}")
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\r\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
        self._files.append((name, buf.getvalue().encode()))

    def text(self, name, lines):
        self._files.append((name, ("\n".join(lines) + "\n").encode()))

    def png(self, name, draw):
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        fig, ax = plt.subplots(figsize=(7.5, 5.0))
        draw(ax)
        fig.tight_layout()
        buf = io.BytesIO()
        fig.savefig(buf, format="png", dpi=120)
        plt.close(fig)
        self._files.append((name, buf.getvalue()))

    def flush(self):
        self.outdir.mkdir(parents=True, exist_ok=True)
        for name, payload in self._files:
            (self.outdir / name).write_bytes(payload)
            print(f"wrote {self.outdir / name}")


def _echo_config(em: _Emitter, subcommand: str, cfg: dict):
    lines = [f"subcommand={subcommand}"]
    for key in sorted(cfg):
        value = cfg[key]
        if value is None:
            continue
        if isinstance(value, tuple):
            value = ",".join(_fmt(v) for v in value)
        else:
            value = _fmt(value)
        lines.append(f"{key}={value}")
    em.text(f"{subcommand.replace('-', '_')}_config.txt", lines)


def _build_cross_section(cfg):
    shape = cfg.get("shape")
    if shape is None:
        raise UsageError("missing required parameter 'shape'")
    if shape == "disc":
        if cfg.get("radius") is None:
            raise UsageError("shape disc needs --radius")
        params = (cfg["radius"],)
    elif shape in ("ellipse", "rectangle"):
        if cfg.get("a") is None or cfg.get("b") is None:
            raise UsageError(f"shape {shape} needs --a and --b")
        params = (cfg["a"], cfg["b"])
    elif shape == "polygon":
        raw = cfg.get("vertices")
        if raw is None:
            raise UsageError("shape polygon needs --vertices")
        try:
            params = [tuple(map(float, pair.split(","))) for pair in raw.split(";") if pair.strip()]
        except ValueError:
            raise UsageError(f"invalid value for vertices: {raw!r}") from None
    else:
        raise UsageError(f"unknown shape {shape!r}")
    cs = make_cross_section(shape, params, cfg["resolution"])
    if cfg.get("unit-diameter"):
        cs = unit_diameter(cs)
    return cs


def _reduced_params(cfg) -> ReducedEnergyParams:
    explicit = [cfg.get(k) is not None for k in ("alpha2", "alpha3", "area")]
    if any(explicit):
        if not all(explicit):
            raise UsageError("give all of --alpha2, --alpha3, --area or a geometry block")
        if cfg.get("shape") is not None:
            raise UsageError("give either explicit coefficients or a shape, not both")
        return ReducedEnergyParams(area=cfg["area"], alpha2=cfg["alpha2"], alpha3=cfg["alpha3"])
    cs = _build_cross_section(cfg)
    dm = compute_demag_matrix(cs, cfg["n"])
    return ReducedEnergyParams(area=cs.area, alpha2=dm.alpha2, alpha3=dm.alpha3)


def _gnuplot_header(output_png: str) -> list:
    return [
        "set datafile separator comma",
        "set terminal pngcairo size 900,600",
        f"set output '{output_png}'",
    ]


# ------------------------------------------------------------- subcommands


def _cmd_compute_matrix(cfg, em: _Emitter) -> int:
    cs = _build_cross_section(cfg)
    dm = compute_demag_matrix(cs, cfg["n"], cfg.get("tolerance"))
    header = [
        "shape", "params", "quad_points", "m22", "m23", "m33",
        "alpha2", "alpha3", "rotation_angle", "estimated_error", "degenerate",
    ]
    row = [
        cs.kind,
        ";".join(_fmt(float(p)) for p in np.asarray(cs.params).ravel()),
        dm.quad_points, dm.m22, dm.m23, dm.m33,
        dm.alpha2, dm.alpha3, dm.rotation_angle, dm.estimated_error, dm.degenerate,
    ]
    em.csv("demag_matrix.csv", header, [row])
    print(",".join(header))
    print(",".join(_fmt(v) for v in row))
    return 0


def _profile_initial(cfg, params: ReducedEnergyParams, grid):
    kind = cfg["init"]
    transverse_seed = cfg.get("transverse-seed")
    if kind == "closed-form":
        prof = fixed_minimizer(params, grid)
    elif kind == "perturbed":
        rng = np.random.default_rng(cfg["seed"])
        vals = transverse_profile(params.alpha_omega, 1.0, 0.0, grid)
        c1, c2 = rng.uniform(-3.0, 3.0, size=2)
        vals[:, 1] += 0.3 * np.exp(-((grid - c1) ** 2) / 8.0)
        vals[:, 2] += 0.4 * np.exp(-((grid - c2) ** 2) / 6.0)
        vals[:, 0] += 0.2 * np.sin(grid / 3.0) * np.exp(-(grid**2) / 50.0)
        vals /= np.linalg.norm(vals, axis=1, keepdims=True)
        prof = WallProfile(grid=grid, values=vals)
    elif kind == "rotated":
        # an exactly rotated wall sits on a saddle; a small transverse bump
        # inside the descent lets it leave
        vals = transverse_profile(params.alpha_omega, 1.0, math.pi / 2.0, grid)
        prof = WallProfile(grid=grid, values=vals)
        if transverse_seed is None:
            transverse_seed = 1e-3
    else:
        raise UsageError(f"unknown init {kind!r}")
    return prof, (0.0 if transverse_seed is None else transverse_seed)


def _cmd_minimize_profile(cfg, em: _Emitter) -> int:
    params = _reduced_params(cfg)
    if cfg.get("window") is None:
        grid = default_window(params, cfg["samples"])
    else:
        grid = np.linspace(-cfg["window"], cfg["window"], cfg["samples"])
    init, transverse_seed = _profile_initial(cfg, params, grid)
    opts = DescentOptions(
        step=cfg["step"],
        max_iters=cfg["max-iters"],
        grad_tol=cfg["grad-tol"],
        transverse_seed=transverse_seed,
    )
    final, hist = minimize_reduced(params, init, opts)

    em.csv(
        "profile.csv",
        ["x", "m1", "m2", "m3"],
        [[x, v[0], v[1], v[2]] for x, v in zip(final.grid, final.values)],
    )
    em.csv(
        "energy_history.csv",
        ["iteration", "energy"],
        [[i, e] for i, e in enumerate(hist.energies)],
    )
    if not cfg["no-plot"]:
        em.text("profile.gp", _gnuplot_header("profile_gnuplot.png") + [
            "set xlabel 'x'",
            "set ylabel 'component'",
            "plot 'profile.csv' every ::1 using 1:2 with lines title 'm1', \\",
            "     '' every ::1 using 1:3 with lines title 'm2', \\",
            "     '' every ::1 using 1:4 with lines title 'm3'",
            "set output 'energy_history_gnuplot.png'",
            "set xlabel 'iteration'",
            "set ylabel 'energy'",
            "plot 'energy_history.csv' every ::1 using 1:2 with lines title 'energy'",
        ])
        em.png("profile.png", lambda ax: (
            ax.plot(final.grid, final.values[:, 0], label="m1"),
            ax.plot(final.grid, final.values[:, 1], label="m2"),
            ax.plot(final.grid, final.values[:, 2], label="m3"),
            ax.set_xlabel("x"), ax.set_ylabel("component"), ax.legend(),
        ))
        em.png("energy_history.png", lambda ax: (
            ax.plot(np.arange(len(hist.energies)), hist.energies),
            ax.set_xlabel("iteration"), ax.set_ylabel("energy"),
        ))

    reference = fixed_minimizer(params, grid)
    _, _, dist = align_profile(final, reference)
    print(f"final energy {_fmt(hist.energies[-1])} "
          f"(closed-form minimum {_fmt(closed_form_minimum(params))})")
    print(f"converged={_fmt(hist.converged)} iterations={hist.iterations} "
          f"aligned_distance={_fmt(dist)}")
    return 0


def _field_initial(cfg, dom, params: ReducedEnergyParams) -> Field3D:
    x0, x1 = dom.x_window
    grid = np.linspace(x0 - 2.0, x1 + 2.0, 1025)
    kind = cfg["init"]
    if kind == "closed-form":
        prof = fixed_minimizer(params, grid)
    elif kind == "rotated":
        vals = transverse_profile(params.alpha_omega, 1.0, math.pi / 2.0, grid)
        vals[:, 1] += 1e-3 / np.cosh(grid * math.sqrt(params.alpha_omega))
        vals /= np.linalg.norm(vals, axis=1, keepdims=True)
        prof = WallProfile(grid=grid, values=vals)
    elif kind == "perturbed":
        rng = np.random.default_rng(cfg["seed"])
        vals = transverse_profile(params.alpha_omega, 1.0, 0.0, grid)
        c1, c2 = rng.uniform(-2.0, 2.0, size=2)
        vals[:, 1] += 0.2 * np.exp(-((grid - c1) ** 2) / 6.0)
        vals[:, 2] += 0.3 * np.exp(-((grid - c2) ** 2) / 8.0)
        vals /= np.linalg.norm(vals, axis=1, keepdims=True)
        prof = WallProfile(grid=grid, values=vals)
    else:
        raise UsageError(f"unknown init {kind!r}")
    return extend_profile(dom, prof)


_ENERGY_HEADER = ["d", "nx", "ny", "nz", "e_exchange", "e_magnetostatic", "e_total", "e_per_d2"]


def _energy_row(d, dom, report):
    return [
        d, dom.shape[0], dom.shape[1], dom.shape[2],
        report.exchange, report.magnetostatic, report.total, report.total / d**2,
    ]


def _ladder_plot(em: _Emitter, stem: str, ds, per_d2, reference, no_plot):
    if no_plot:
        return
    em.text(f"{stem}.gp", _gnuplot_header(f"{stem}_gnuplot.png") + [
        "set xlabel 'd'",
        "set ylabel 'E / d^2'",
        f"plot '{stem}.csv' every ::1 using 1:8 with linespoints title 'E/d^2', \\",
        f"     {_fmt(reference)} with lines dashtype 2 title 'reduced minimum'",
    ])
    em.png(f"{stem}.png", lambda ax: (
        ax.plot(ds, per_d2, "o-", label="E/d^2"),
        ax.axhline(reference, ls="--", color="gray", label="reduced minimum"),
        ax.set_xlabel("d"), ax.set_ylabel("E/d^2"), ax.legend(),
    ))


def _ladder_domains(cfg):
    ladder = cfg.get("d-ladder") or ()
    if not ladder:
        raise UsageError("d-ladder must list at least one scale")
    if any(d <= 0 for d in ladder):
        raise UsageError("d-ladder entries must be positive")
    cs = _build_cross_section(cfg)
    dm = compute_demag_matrix(cs, cfg["n"])
    params = ReducedEnergyParams(area=cs.area, alpha2=dm.alpha2, alpha3=dm.alpha3)
    w = cfg["window"]
    domains = [
        make_wire_domain(cs, d, (-w, w), cfg["axial-cells"], cfg["cross-cells"])
        for d in ladder
    ]
    return ladder, domains, params


def _cmd_energy3d(cfg, em: _Emitter) -> int:
    ladder, domains, params = _ladder_domains(cfg)
    rows = []
    for d, dom in zip(ladder, domains):
        f = _field_initial(cfg, dom, params)
        report = total_energy(f, threads=cfg.get("threads"), max_charges=cfg["max-charges"])
        rows.append(_energy_row(d, dom, report))
        print(f"d={_fmt(d)} E={_fmt(report.total)} E/d^2={_fmt(rows[-1][-1])}")
    em.csv("energy3d.csv", _ENERGY_HEADER, rows)
    _ladder_plot(em, "energy3d", list(ladder), [r[7] for r in rows],
                 closed_form_minimum(params), cfg["no-plot"])
    return 0


def _cmd_minimize3d(cfg, em: _Emitter) -> int:
    ladder, domains, params = _ladder_domains(cfg)
    opts = Descent3DOptions(
        step=cfg["step"],
        max_iters=cfg["max-iters"],
        grad_tol=cfg["grad-tol"],
        threads=cfg.get("threads"),
        max_charges=cfg["max-charges"],
    )
    rows = []
    for d, dom in zip(ladder, domains):
        init = _field_initial(cfg, dom, params)
        final, hist = minimize_3d(init, opts)
        report = hist.reports[-1]
        rows.append(
            _energy_row(d, dom, report)
            + [hist.iterations, hist.converged, hist.final_grad_norm]
        )
        label = repr(float(d))
        mbar = average_profile(final)
        em.csv(
            f"averaged_profile_d{label}.csv",
            ["x", "m1", "m2", "m3"],
            [[x, v[0], v[1], v[2]] for x, v in zip(mbar.grid, mbar.values)],
        )
        em.csv(
            f"energy_history_d{label}.csv",
            ["iteration", "e_exchange", "e_magnetostatic", "e_total"],
            [[i, r.exchange, r.magnetostatic, r.total] for i, r in enumerate(hist.reports)],
        )
        print(f"d={_fmt(d)} E={_fmt(report.total)} E/d^2={_fmt(report.total / d**2)} "
              f"converged={_fmt(hist.converged)}")
    em.csv("minimize3d.csv", _ENERGY_HEADER + ["iterations", "converged", "final_grad_norm"], rows)
    _ladder_plot(em, "minimize3d", list(ladder), [r[7] for r in rows],
                 closed_form_minimum(params), cfg["no-plot"])
    return 0


_VORTEX_CHECK_SLUGS = (
    ("vortex stray field (jump)", "mag_jump"),
    ("vortex formal exchange", "formal_exchange"),
    ("vortex field distance", "distance_sq"),
    ("vortex stray-field gap", "mag_gap"),
    ("vortex exchange gap", "exchange_gap"),
    ("vortex total energy", "total"),
)


def _cmd_vortex_scan(cfg, em: _Emitter) -> int:
    ladder = cfg.get("d-ladder") or ()
    if not ladder:
        raise UsageError("d-ladder must list at least one half-width")
    if cfg.get("length") is not None and len(ladder) > 1:
        raise UsageError("--length applies to single-d scans only")
    header = [
        "d", "length", "nx", "ny", "nz", "charges",
        "e_exchange_smooth", "e_mag_jump", "e_mag_smooth",
        "formal_exchange", "difference_norm", "excluded_volume",
    ]
    for _, slug in _VORTEX_CHECK_SLUGS:
        header += [f"bound_{slug}", f"pass_{slug}"]
    header.append("all_pass")

    rows, totals = [], []
    for d in ladder:
        p = VortexParams(d=d, length=cfg.get("length"))
        rep = verify_bounds(
            p,
            cells_per_half_width=cfg["grid"],
            threads=cfg.get("threads"),
            max_charges=cfg["max-charges"],
        )
        row = [
            d, p.half_length, *rep.grid_shape, rep.charge_count,
            rep.e_ex_smooth, rep.e_mag_jump, rep.e_mag_smooth,
            rep.formal_exchange, rep.difference_norm, rep.excluded_volume,
        ]
        by_name = {c.name: c for c in rep.checks}
        for name, _ in _VORTEX_CHECK_SLUGS:
            c = by_name[name]
            row += [c.bound, "pass" if c.passed else "fail"]
        row.append("pass" if rep.passed else "fail")
        rows.append(row)
        totals.append(rep.total_energy)
        print(f"d={_fmt(d)} L={_fmt(p.half_length)} E={_fmt(rep.total_energy)} "
              f"{'pass' if rep.passed else 'fail'}")

    em.csv("vortex_scan.csv", header, rows)
    slope = None
    if len(ladder) >= 2:
        slope = energy_slope(ladder, totals)
        print(f"fitted log-log slope {_fmt(slope)}")
    if not cfg["no-plot"]:
        lines = _gnuplot_header("vortex_scan_gnuplot.png") + [
            "set logscale xy",
            "set xlabel 'd'",
            "set ylabel 'energy'",
        ]
        if slope is not None:
            lines.append(f"# fitted log-log slope of the total energy: {_fmt(slope)}")
        lines += [
            "plot 'vortex_scan.csv' every ::1 using 1:($7+$9) with linespoints title 'E(m)', \\",
            "     150.0*x**2.5*sqrt(log(x)) with lines dashtype 2 title 'budget'",
        ]
        em.text("vortex_scan.gp", lines)
        ds = [r[0] for r in rows]
        budget = [150.0 * d**2.5 * math.sqrt(math.log(d)) for d in ds]
        em.png("vortex_scan.png", lambda ax: (
            ax.loglog(ds, totals, "o-", label="E(m)"),
            ax.loglog(ds, budget, "--", label="budget"),
            ax.set_xlabel("d"), ax.set_ylabel("energy"), ax.legend(),
        ))
    return 0


def _cmd_verify_lemmas(cfg, em: _Emitter) -> int:
    tokens = [t.strip() for t in cfg["set"].split(",") if t.strip()]
    if not tokens:
        raise UsageError("set must name at least one check group")
    sets = []
    for tok in tokens:
        if tok == "all":
            sets.extend(("A1", "A2", "A3", "L31", "L32", "L33"))
        elif tok in ("A1", "A2", "A3", "L31", "L32", "L33"):
            sets.append(tok)
        else:
            raise UsageError(f"unknown check set {tok!r}")
    config = LemmaSuiteConfig(
        sets=tuple(dict.fromkeys(sets)),
        seed=cfg["seed"],
        a1_pairs=cfg["a1-pairs"],
        a2_cases=cfg["a2-cases"],
        a3_cases=cfg["a3-cases"],
        threads=cfg.get("threads"),
    )
    checks = run_all(config)
    em.csv(
        "lemma_report.csv",
        ["name", "measured", "bound", "margin", "pass"],
        [
            [c.name, c.measured, c.bound, c.margin, "pass" if c.passed else "fail"]
            for c in checks
        ],
    )
    passed = sum(c.passed for c in checks)
    print(f"{passed}/{len(checks)} checks passed")
    return 0


_RUNNERS = {
    "compute-matrix": _cmd_compute_matrix,
    "minimize-profile": _cmd_minimize_profile,
    "energy3d": _cmd_energy3d,
    "minimize3d": _cmd_minimize3d,
    "vortex-scan": _cmd_vortex_scan,
    "verify-lemmas": _cmd_verify_lemmas,
}


def main(argv=None) -> int:
    try:
        subcommand, cfg = parse_config(argv if argv is not None else sys.argv[1:])
        if cfg.get("threads") is not None and cfg["threads"] < 1:
            raise UsageError("threads must be at least 1")
        outdir = Path(cfg.get("outdir") or os.environ.get("WIREWALL_OUTDIR") or ".")
        em = _Emitter(outdir)
        _echo_config(em, subcommand, cfg)
        code = _RUNNERS[subcommand](cfg, em)
        em.flush()
        return code
    except (UsageError, GeometryError, AccuracyError, CapacityError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # pragma: no cover - defensive
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
