"""Schmidt decomposition of biphoton amplitude grids.

The decomposition is an SVD of the quadrature-weighted matrix
``A = f * dw``; with ``sum |A|^2 = 1`` the squared singular values are the
Schmidt eigenvalues.  ``kernel_eigenvalues`` diagonalizes the discretized
one-photon kernels directly and is kept as an independent check.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Literal, Mapping, Optional

import numpy as np
import scipy.linalg

from .projector import AmplitudeGrid, GridSpec, Provenance, project
from .spectral import Route, SpectralParams

log = logging.getLogger(__name__)

EIGENVALUE_FLOOR = 1e-12
MAX_POINTS = 4096
DEFAULT_TOL = 0.02


@dataclass(frozen=True, eq=False)
class SchmidtResult:
    eigenvalues: np.ndarray
    entropy: float
    spec: GridSpec
    provenance: Optional[Provenance] = None
    modes_psi: Optional[np.ndarray] = None
    modes_phi: Optional[np.ndarray] = None
    converged: bool = True
    delta_entropy: float = float("nan")
    history: tuple[tuple[int, float], ...] = ()

    @property
    def schmidt_number(self) -> float:
        return 1.0 / float(np.sum(self.eigenvalues**2))


def _check(grid: AmplitudeGrid):
    if grid.ndim != 2:
        raise ValueError(f"expected a 2D grid, got {grid.ndim} axes")
    if not np.all(np.isfinite(grid.values)):
        raise ValueError("grid contains non-finite values")


def normalize(grid: AmplitudeGrid) -> AmplitudeGrid:
    """Scale to unit norm under the Riemann weight: sum |f|^2 dw^2 = 1."""
    _check(grid)
    dw = grid.spec.spacing
    norm = np.sqrt(np.sum(np.abs(grid.values) ** 2)) * dw
    if norm == 0:
        raise ValueError("cannot normalize an identically zero grid")
    return grid.with_values(grid.values / norm)


def _weighted(grid: AmplitudeGrid) -> np.ndarray:
    g = normalize(grid)
    return g.values * g.spec.spacing


def decompose(grid: AmplitudeGrid, modes: bool = True, n_modes: Optional[int] = None) -> SchmidtResult:
    """Schmidt eigenvalues, entropy and (optionally) mode functions.

    Mode columns are scaled so that ``sum |psi_n|^2 dw = 1`` and the grid is
    rebuilt as ``f(w, w') = sum_n sqrt(lam_n) psi_n(w) phi_n(w')``.
    """
    a = _weighted(grid)
    if modes:
        u, sigma, vh = scipy.linalg.svd(a, full_matrices=False, check_finite=False)
    else:
        sigma = scipy.linalg.svd(a, compute_uv=False, check_finite=False)
    lam = sigma**2
    psi = phi = None
    if modes:
        k = len(sigma) if n_modes is None else n_modes
        scale = 1.0 / np.sqrt(grid.spec.spacing)
        psi = u[:, :k] * scale
        phi = vh[:k].T * scale
    return SchmidtResult(
        eigenvalues=lam,
        entropy=entropy(lam),
        spec=grid.spec,
        provenance=grid.provenance,
        modes_psi=psi,
        modes_phi=phi,
    )


def kernel_eigenvalues(grid: AmplitudeGrid, which: Literal["K1", "K2"] = "K1") -> np.ndarray:
    """Eigenvalues of the discretized one-photon kernel K1 (first photon) or K2."""
    a = _weighted(grid)
    if which == "K1":
        k = a @ a.conj().T
    elif which == "K2":
        k = a.T @ a.conj()
    else:
        raise ValueError(f"which must be 'K1' or 'K2', got {which!r}")
    lam = scipy.linalg.eigvalsh(k, check_finite=False)[::-1]
    return np.clip(lam, 0.0, None)


def entropy(eigenvalues) -> float:
    """Entropy of entanglement in bits, -sum lam log2 lam."""
    lam = np.asarray(eigenvalues, dtype=float)
    if lam.size == 0:
        raise ValueError("no eigenvalues")
    if np.any(lam < -1e-12):
        raise ValueError(f"negative eigenvalue {lam.min()}")
    lam = np.clip(lam, 0.0, None)
    total = lam.sum()
    if abs(total - 1.0) > 1e-6:
        raise ValueError(f"eigenvalues sum to {total}, expected 1")
    lam = lam / total
    lam = lam[lam >= EIGENVALUE_FLOOR]
    return float(max(0.0, -np.sum(lam * np.log2(lam))))


def converge_entropy(
    route: Route,
    params: SpectralParams,
    fixed: Mapping[str, float],
    spec: GridSpec = GridSpec(),
    tol: float = DEFAULT_TOL,
    max_points: int = MAX_POINTS,
    modes: bool = False,
) -> SchmidtResult:
    """Double ``n_points`` until successive entropies differ by less than ``tol``.

    Hitting ``max_points`` first returns the last result with
    ``converged=False``.  Mode functions are only computed for the final grid
    and only when ``modes`` is set.
    """
    if not tol > 0:
        raise ValueError(f"tol must be positive, got {tol}")
    n = spec.n_points
    history = []
    prev = None
    while True:
        grid = project(route, params, fixed, spec.refined(n))
        res = decompose(grid, modes=False)
        history.append((n, res.entropy))
        log.debug("%s n=%d S=%.6f", route.name, n, res.entropy)
        if prev is not None:
            delta = abs(res.entropy - prev)
            if delta < tol or 2 * n > max_points:
                break
        elif 2 * n > max_points:
            delta = float("nan")
            break
        prev = res.entropy
        n *= 2
    if modes:
        res = decompose(grid, modes=True)
    return SchmidtResult(
        eigenvalues=res.eigenvalues,
        entropy=res.entropy,
        spec=res.spec,
        provenance=res.provenance,
        modes_psi=res.modes_psi,
        modes_phi=res.modes_phi,
        converged=bool(delta < tol),
        delta_entropy=float(delta),
        history=tuple(history),
    )


def reconstruct(result: SchmidtResult, n_modes: Optional[int] = None) -> np.ndarray:
    """Rebuild the normalized amplitude from retained modes."""
    if result.modes_psi is None:
        raise ValueError("result carries no mode functions")
    k = result.modes_psi.shape[1] if n_modes is None else n_modes
    w = np.sqrt(result.eigenvalues[:k])
    return (result.modes_psi[:, :k] * w) @ result.modes_phi[:, :k].T
