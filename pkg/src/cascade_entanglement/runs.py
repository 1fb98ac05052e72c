"""Orchestration behind the command line: reports, sweeps and data export."""
from __future__ import annotations

import io
import itertools
import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence, TextIO

import numpy as np

from .config import ConfigError, RunConfig, apply_overrides
from .projector import AmplitudeGrid, GridSpec, project, slice_3d
from .schmidt import converge_entropy, decompose
from .spectral import amplitude

SIG = 12


def fmt(x: float) -> str:
    return f"{x:.{SIG}g}"


def _round(x: float) -> float:
    return float(fmt(x))


def _check_fixed(config: RunConfig, n_free: int):
    need = config.route.arity - n_free
    if len(config.fixed) != need:
        raise ConfigError(
            f"route {config.route.name} needs {need} fixed photons, got {list(config.fixed_map)}"
        )


def schmidt_for(config: RunConfig, modes: bool = False):
    _check_fixed(config, 2)
    if config.converge:
        return converge_entropy(
            config.route,
            config.params,
            config.fixed_map,
            config.grid,
            tol=config.tol,
            max_points=config.max_points,
            modes=modes,
        )
    grid = project(config.route, config.params, config.fixed_map, config.grid)
    return decompose(grid, modes=modes)


def build_report(config: RunConfig, result, seconds: float) -> dict:
    k = config.n_eigenvalues
    lam = result.eigenvalues
    head = lam[:k]
    nz = head[head > 0]
    head_entropy = float(-np.sum(nz * np.log2(nz)))
    return {
        "config": config.echo(),
        "entropy": _round(result.entropy),
        "eigenvalues": [_round(x) for x in head],
        "tail_mass": _round(max(0.0, 1.0 - float(head.sum()))),
        "tail_entropy": _round(result.entropy - head_entropy),
        "schmidt_number": _round(result.schmidt_number),
        "convergence": {
            "converged": bool(result.converged),
            "delta_entropy": None if math.isnan(result.delta_entropy) else _round(result.delta_entropy),
            "tol": config.tol,
            "history": [[n, _round(s)] for n, s in result.history],
            "n_points": result.spec.n_points,
        },
        "timing": {"seconds": round(seconds, 3)},
    }


def dump_report(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def run_schmidt(config: RunConfig) -> dict:
    """Entropy report for one configuration; writes the final grid when ``out_grid`` is set."""
    t0 = time.perf_counter()
    result = schmidt_for(config)
    report = build_report(config, result, time.perf_counter() - t0)
    if config.out_grid:
        grid = project(config.route, config.params, config.fixed_map, result.spec)
        with open(config.out_grid, "w", newline="\n") as fh:
            write_grid_csv(grid, fh)
    return report


def write_grid_csv(grid: AmplitudeGrid, fh: TextIO):
    if grid.ndim != 2:
        raise ValueError("write_grid_csv expects a 2D grid")
    x = grid.axis
    j, k = np.meshgrid(x, x, indexing="ij")
    v = grid.values
    table = np.column_stack([j.ravel(), k.ravel(), v.real.ravel(), v.imag.ravel(), np.abs(v).ravel()])
    fh.write("axis1,axis2,re,im,abs\n")
    np.savetxt(fh, table, fmt=f"%.{SIG}g", delimiter=",", newline="\n")


def read_grid_csv(fh, axes: Sequence[str] = ("x", "y")) -> AmplitudeGrid:
    """Inverse of ``write_grid_csv``; the grid spec is recovered from the axis columns."""
    header = fh.readline().strip()
    if header != "axis1,axis2,re,im,abs":
        raise ValueError(f"unexpected grid header {header!r}")
    data = np.loadtxt(fh, delimiter=",", ndmin=2)
    n = int(round(math.sqrt(len(data))))
    if n * n != len(data):
        raise ValueError(f"{len(data)} rows do not form a square grid")
    spec = GridSpec(half_width=float(data[:, 0].max()), n_points=n, axes=tuple(axes))
    values = (data[:, 2] + 1j * data[:, 3]).reshape(n, n)
    return AmplitudeGrid(spec, values)


def _sweep_points(config: RunConfig) -> list[dict[str, float]]:
    names = [n for n, _ in config.sweep]
    lists = [v for _, v in config.sweep]
    combos = zip(*lists) if config.sweep_mode == "zip" else itertools.product(*lists)
    return [dict(zip(names, c)) for c in combos]


def _sweep_row(config: RunConfig, point: dict[str, float]):
    try:
        result = schmidt_for(apply_overrides(config, point))
    except Exception as exc:  # recorded per row, sweep continues
        return None, f"{type(exc).__name__}: {exc}"
    return result, ""


def run_sweep(config: RunConfig, workers: Optional[int] = None) -> str:
    """CSV table, one row per sweep point in deterministic input order."""
    if not config.sweep:
        raise ConfigError("sweep needs at least one sweep.<param> axis")
    points = _sweep_points(config)
    names = [n for n, _ in config.sweep]
    k = config.n_eigenvalues
    n_workers = workers or config.workers
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        rows = list(pool.map(lambda p: _sweep_row(config, p), points))
    out = io.StringIO()
    cols = names + ["entropy"] + [f"lambda_{i + 1}" for i in range(k)] + ["converged", "n_points", "error"]
    out.write(",".join(cols) + "\n")
    for point, (result, err) in zip(points, rows):
        cells = [fmt(point[n]) for n in names]
        if result is None:
            cells += [""] * (k + 3) + [err.replace(",", ";").replace("\n", " ")]
        else:
            lam = list(result.eigenvalues[:k]) + [0.0] * max(0, k - len(result.eigenvalues))
            cells += [fmt(result.entropy)] + [fmt(x) for x in lam]
            cells += [str(bool(result.converged)).lower(), str(result.spec.n_points), ""]
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def export_grid_3d(config: RunConfig, fh: TextIO):
    """Volumetric CSV of |f| normalized to unit maximum, for isosurface rendering."""
    _check_fixed(config, 3)
    spec = GridSpec(config.grid.half_width, config.volume_points, config.grid.axes)
    grid = slice_3d(config.route, config.params, config.fixed_map, spec)
    mod = np.abs(grid.values)
    peak = mod.max()
    if not peak > 0:
        raise ValueError("volume is identically zero")
    x = grid.axis
    a, b, c = np.meshgrid(x, x, x, indexing="ij")
    table = np.column_stack([a.ravel(), b.ravel(), c.ravel(), (mod / peak).ravel()])
    fh.write("axis1,axis2,axis3,abs_normalized\n")
    np.savetxt(fh, table, fmt=f"%.{SIG}g", delimiter=",", newline="\n")
    return grid


def grid_dependence(
    config: RunConfig,
    n_points: Sequence[int] = (256, 512, 1024, 2048),
    half_widths: Sequence[float] = (100.0, 200.0, 400.0, 800.0),
) -> str:
    """Entropy versus resolution (fixed window) and versus window (fixed spacing)."""
    _check_fixed(config, 2)
    hw0 = config.grid.half_width
    spacing = config.grid.spacing
    out = io.StringIO()
    out.write("series,half_width,n_points,spacing,entropy\n")

    def row(series, spec):
        grid = project(config.route, config.params, config.fixed_map, spec)
        s = decompose(grid, modes=False).entropy
        out.write(f"{series},{fmt(spec.half_width)},{spec.n_points},{fmt(spec.spacing)},{fmt(s)}\n")

    for n in n_points:
        row("n_points", GridSpec(hw0, n, config.grid.axes))
    for hw in half_widths:
        n = int(round(2 * hw / spacing)) + 1
        row("half_width", GridSpec(hw, n, config.grid.axes))
    return out.getvalue()


def evaluate(config: RunConfig, detunings: Sequence[float]) -> complex:
    if len(detunings) != config.route.arity:
        raise ConfigError(
            f"route {config.route.name} takes {config.route.arity} detunings "
            f"{config.route.photon_labels}, got {len(detunings)}"
        )
    return complex(amplitude(config.route, config.params, list(detunings)))

