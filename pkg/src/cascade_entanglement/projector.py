"""Collapse multiphoton amplitudes onto detuning grids by fixing photon detunings."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional

import numpy as np

from .spectral import Route, SpectralParams, amplitude, canonical_label


@dataclass(frozen=True)
class GridSpec:
    """Uniform symmetric detuning grid, identical on every axis."""

    half_width: float = 200.0
    n_points: int = 1024
    axes: tuple[str, ...] = ()

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise ValueError(f"n_points must be an integer >= 2, got {self.n_points}")
        if not (self.half_width > 0 and np.isfinite(self.half_width)):
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        object.__setattr__(self, "n_points", int(self.n_points))
        object.__setattr__(self, "half_width", float(self.half_width))
        object.__setattr__(self, "axes", tuple(canonical_label(a) for a in self.axes))

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    def with_axes(self, axes) -> "GridSpec":
        return GridSpec(self.half_width, self.n_points, tuple(axes))

    def refined(self, n_points: int) -> "GridSpec":
        return GridSpec(self.half_width, n_points, self.axes)


def make_grid(spec: GridSpec) -> np.ndarray:
    return np.linspace(-spec.half_width, spec.half_width, spec.n_points)


@dataclass(frozen=True)
class Provenance:
    route: Route
    params: SpectralParams
    fixed: tuple[tuple[str, float], ...]


@dataclass(frozen=True, eq=False)
class AmplitudeGrid:
    """Complex amplitude sampled on the tensor grid of ``spec``.

    ``values[j, k, ...]`` belongs to detunings ``(axis[j], axis[k], ...)``
    along ``spec.axes``.  Values are stored raw (unnormalized).
    """

    spec: GridSpec
    values: np.ndarray
    provenance: Optional[Provenance] = None

    def __post_init__(self):
        shape = (self.spec.n_points,) * len(self.spec.axes)
        if self.values.shape != shape:
            raise ValueError(f"values shape {self.values.shape} does not match grid {shape}")
        self.values.setflags(write=False)

    @property
    def axis(self) -> np.ndarray:
        return make_grid(self.spec)

    @property
    def ndim(self) -> int:
        return len(self.spec.axes)

    def with_values(self, values: np.ndarray) -> "AmplitudeGrid":
        return AmplitudeGrid(self.spec, values, self.provenance)


# Kept as separate names so call sites say which rank they expect.
AmplitudeGrid2D = AmplitudeGrid
AmplitudeGrid3D = AmplitudeGrid


def _resolve(route: Route, fixed: Mapping[str, float], spec: GridSpec, n_free: int):
    fixed = {canonical_label(k): float(v) for k, v in fixed.items()}
    labels = route.photon_labels
    unknown = [k for k in fixed if k not in labels]
    if unknown:
        raise ValueError(f"photons {unknown} are not part of route {route.name} {labels}")
    if len(fixed) != route.arity - n_free:
        raise ValueError(
            f"route {route.name} needs {route.arity - n_free} fixed photons for a "
            f"{n_free}-axis grid, got {sorted(fixed)}"
        )
    axes = spec.axes or tuple(l for l in labels if l not in fixed)
    if len(axes) != n_free or set(axes) | set(fixed) != set(labels) or set(axes) & set(fixed):
        raise ValueError(
            f"axes {axes} and fixed photons {sorted(fixed)} must partition {labels}"
        )
    return fixed, spec.with_axes(axes)


def _fill(route, params, fixed, spec) -> AmplitudeGrid:
    x = make_grid(spec)
    n_free = len(spec.axes)
    args = []
    for label in route.photon_labels:
        if label in fixed:
            args.append(fixed[label])
        else:
            shape = [1] * n_free
            shape[spec.axes.index(label)] = spec.n_points
            args.append(x.reshape(shape))
    values = np.broadcast_to(amplitude(route, params, args), (spec.n_points,) * n_free)
    prov = Provenance(route, params, tuple(sorted(fixed.items())))
    return AmplitudeGrid(spec, np.array(values, dtype=complex), prov)


def project(
    route: Route,
    params: SpectralParams,
    fixed: Mapping[str, float],
    spec: GridSpec = GridSpec(),
) -> AmplitudeGrid:
    """Effective biphoton amplitude with ``arity - 2`` photons fixed.

    When ``spec.axes`` is empty the two free photons are taken in route order.
    Fixed detunings are exact values (delta collapse); values outside the
    grid window are allowed.
    """
    fixed, spec = _resolve(route, fixed, spec, 2)
    return _fill(route, params, fixed, spec)


def slice_3d(
    route: Route,
    params: SpectralParams,
    fixed: Mapping[str, float],
    spec: GridSpec = GridSpec(n_points=128),
) -> AmplitudeGrid:
    if route.arity != 4:
        raise ValueError(f"slice_3d needs a four-photon route, got {route.name}")
    fixed, spec = _resolve(route, fixed, spec, 3)
    return _fill(route, params, fixed, spec)
