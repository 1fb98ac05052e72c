"""Flat ``key=value`` run configuration.

Example::

    # B1 with the signal photon fixed at zero detuning
    route = B1
    fixed.s = 0
    gammaN = 5
    tau_a = 0.25
    tau_b = 0.25
    grid.half_width = 200
    grid.n_points = 1024
    sweep.tau_b = 0.25, 0.5, 1.0

Blank lines and ``#`` comments are ignored.  Photon labels accept primes
(``s'``, ``i''``) or digit suffixes (``s1``, ``i2``).
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Iterable, Optional

from .projector import GridSpec
from .schmidt import DEFAULT_TOL, MAX_POINTS
from .spectral import Route, SpectralParams, canonical_label


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    route: Route = Route.B1
    params: SpectralParams = SpectralParams()
    fixed: tuple[tuple[str, float], ...] = ()
    grid: GridSpec = GridSpec()
    tol: float = DEFAULT_TOL
    converge: bool = True
    max_points: int = MAX_POINTS
    n_eigenvalues: int = 10
    volume_points: int = 128
    workers: int = 1
    out_report: Optional[str] = None
    out_grid: Optional[str] = None
    out_volume: Optional[str] = None
    sweep: tuple[tuple[str, tuple[float, ...]], ...] = ()
    sweep_mode: str = "product"

    @property
    def fixed_map(self) -> dict[str, float]:
        return dict(self.fixed)

    def echo(self) -> dict:
        """Plain-data view of the resolved configuration."""
        p = self.params
        return {
            "route": self.route.name,
            "gammaN": list(p.gammaN),
            "tau_a": p.tau_a,
            "tau_b": p.tau_b,
            "delta_a3": p.delta_a3,
            "delta_omega_i": p.delta_omega_i,
            "fixed": {k: v for k, v in self.fixed},
            "grid": {
                "half_width": self.grid.half_width,
                "n_points": self.grid.n_points,
                "axes": list(self.grid.axes),
            },
            "tol": self.tol,
            "converge": self.converge,
            "max_points": self.max_points,
            "eigenvalues": self.n_eigenvalues,
        }


_SWEEPABLE = {"tau_a", "tau_b", "delta_a3", "delta_omega_i", "gammaN", "grid.half_width", "grid.n_points"}


def _is_sweepable(name: str) -> bool:
    if name in _SWEEPABLE or name.startswith("fixed."):
        return True
    head, _, idx = name.partition(".")
    return head == "gammaN" and idx.isdigit()


def _float(key, text, where):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"{where}: {key} expects a number, got {text!r}") from None


def _int(key, text, where):
    try:
        value = float(text)
    except ValueError:
        value = float("nan")
    if value != value or value != int(value):
        raise ConfigError(f"{where}: {key} expects an integer, got {text!r}")
    return int(value)


def _floats(key, text, where):
    parts = [t.strip() for t in text.split(",") if t.strip()]
    if not parts:
        raise ConfigError(f"{where}: {key} expects a comma-separated list of numbers")
    return tuple(_float(key, t, where) for t in parts)


def _bool(key, text, where):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"{where}: {key} expects true/false, got {text!r}")


def _pairs(text: str) -> Iterable[tuple[str, str, str]]:
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw.strip()!r}")
        key, value = (t.strip() for t in line.split("=", 1))
        yield key, value, f"line {lineno}"


def parse_config(text: str, overrides: Iterable[str] = ()) -> RunConfig:
    """Parse a configuration document; ``overrides`` are extra ``key=value`` lines applied last."""
    raw: dict[str, tuple[str, str]] = {}
    for key, value, where in _pairs(text):
        raw[_normalize_key(key, where)] = (value, where)
    for n, line in enumerate(overrides, 1):
        for key, value, _ in _pairs(line):
            raw[_normalize_key(key, f"override {n}")] = (value, f"override {n} ({line.strip()})")
    return _build(raw)


def _normalize_key(key: str, where: str) -> str:
    head, dot, rest = key.partition(".")
    if head == "fixed":
        return "fixed." + canonical_label(rest)
    if head == "sweep" and rest.startswith("fixed."):
        return "sweep.fixed." + canonical_label(rest[len("fixed."):])
    return key


def _build(raw: dict[str, tuple[str, str]]) -> RunConfig:
    kw: dict = {}
    params: dict = {}
    grid: dict = {}
    fixed: dict[str, float] = {}
    sweep: dict[str, tuple[float, ...]] = {}

    route_text, route_where = raw.get("route", ("B1", "default"))
    try:
        route = Route.parse(route_text)
    except ValueError as exc:
        raise ConfigError(f"{route_where}: {exc}") from None
    kw["route"] = route

    for key, (value, where) in raw.items():
        if key == "route":
            continue
        if key == "gammaN":
            params["gammaN"] = _floats(key, value, where)
        elif key in ("tau_a", "tau_b", "delta_a3", "delta_omega_i"):
            params[key] = _float(key, value, where)
        elif key == "tol":
            kw["tol"] = _float(key, value, where)
        elif key == "grid.half_width":
            grid["half_width"] = _float(key, value, where)
        elif key == "grid.n_points":
            grid["n_points"] = _int(key, value, where)
        elif key == "grid.axes":
            grid["axes"] = tuple(canonical_label(t) for t in value.split(",") if t.strip())
        elif key == "max_points":
            kw["max_points"] = _int(key, value, where)
        elif key == "eigenvalues":
            kw["n_eigenvalues"] = _int(key, value, where)
        elif key == "volume.n_points":
            kw["volume_points"] = _int(key, value, where)
        elif key == "workers":
            kw["workers"] = _int(key, value, where)
        elif key == "converge":
            kw["converge"] = _bool(key, value, where)
        elif key in ("out.report", "out.grid", "out.volume"):
            kw["out_" + key[4:]] = value
        elif key == "sweep.mode":
            if value not in ("product", "zip"):
                raise ConfigError(f"{where}: sweep.mode must be 'product' or 'zip', got {value!r}")
            kw["sweep_mode"] = value
        elif key.startswith("fixed."):
            label = key[len("fixed."):]
            if label not in route.photon_labels:
                raise ConfigError(
                    f"{where}: photon {label!r} is not in route {route.name} {route.photon_labels}"
                )
            fixed[label] = _float(key, value, where)
        elif key.startswith("sweep."):
            name = key[len("sweep."):]
            if not _is_sweepable(name):
                raise ConfigError(f"{where}: {name!r} is not a sweepable numeric parameter")
            if name.startswith("fixed.") and name[6:] not in route.photon_labels:
                raise ConfigError(f"{where}: photon {name[6:]!r} is not in route {route.name}")
            sweep[name] = _floats(key, value, where)
        else:
            raise ConfigError(f"{where}: unknown key {key!r}")

    for label in grid.get("axes", ()):
        if label not in route.photon_labels:
            raise ConfigError(f"grid.axes: photon {label!r} is not in route {route.name}")
    if kw.get("sweep_mode") == "zip" and len({len(v) for v in sweep.values()}) > 1:
        raise ConfigError("sweep.mode=zip needs sweep lists of equal length")
    try:
        kw["params"] = SpectralParams(**params)
        kw["grid"] = GridSpec(**grid)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if "tol" in kw and not kw["tol"] > 0:
        raise ConfigError(f"tol must be positive, got {kw['tol']}")
    for name in ("n_eigenvalues", "workers", "volume_points"):
        if name in kw and kw[name] < 1:
            raise ConfigError(f"{name} must be at least 1")
    kw["fixed"] = tuple((k, fixed[k]) for k in route.photon_labels if k in fixed)
    kw["sweep"] = tuple(sweep.items())
    return RunConfig(**kw)


def apply_overrides(config: RunConfig, values: dict[str, float]) -> RunConfig:
    """Return ``config`` with sweepable parameters replaced by ``values``."""
    params = dataclasses.asdict(config.params)
    params.pop("gamma3", None)
    grid = {"half_width": config.grid.half_width, "n_points": config.grid.n_points, "axes": config.grid.axes}
    fixed = config.fixed_map
    for name, value in values.items():
        if name == "gammaN":
            params["gammaN"] = (value,)
        elif name.startswith("gammaN."):
            idx = int(name.split(".")[1])
            rates = list(params["gammaN"])
            rates += [rates[-1]] * (idx + 1 - len(rates))
            rates[idx] = value
            params["gammaN"] = tuple(rates)
        elif name.startswith("fixed."):
            fixed[name[6:]] = value
        elif name == "grid.half_width":
            grid["half_width"] = value
        elif name == "grid.n_points":
            grid["n_points"] = int(value)
        else:
            params[name] = value
    return dataclasses.replace(
        config,
        params=SpectralParams(**params),
        grid=GridSpec(**grid),
        fixed=tuple((k, fixed[k]) for k in config.route.photon_labels if k in fixed),
    )
