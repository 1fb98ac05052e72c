"""Four-wave-mixing phase matching for the emission angles.

With counter-propagating excitations and |k_i| = |k_a|, |k_s| = |k_b|,
Delta k = 0 reduces to two scalar equations in (theta_i, theta_s).
Angles are radians throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SolverError(RuntimeError):
    def __init__(self, message, iterate, residual):
        self.iterate = tuple(float(v) for v in iterate)
        self.residual = tuple(float(v) for v in residual)
        super().__init__(f"{message}; last iterate {self.iterate}, residual {self.residual}")


@dataclass(frozen=True)
class FwmGeometry:
    theta_a: float
    theta_b: float
    ratio: float  # lambda_b / lambda_a

    def __post_init__(self):
        if not self.ratio > 0:
            raise ValueError(f"wavelength ratio must be positive, got {self.ratio}")
        for name in ("theta_a", "theta_b"):
            if not abs(getattr(self, name)) < np.pi / 2:
                raise ValueError(f"{name} must lie in (-pi/2, pi/2)")

    @classmethod
    def from_degrees(cls, theta_a, theta_b, ratio):
        return cls(np.radians(theta_a), np.radians(theta_b), ratio)


def residual(geom: FwmGeometry, theta_i: float, theta_s: float) -> tuple[float, float]:
    r = geom.ratio
    r1 = r * (np.cos(geom.theta_a) - np.cos(theta_i)) - (np.cos(geom.theta_b) - np.cos(theta_s))
    r2 = r * (np.sin(geom.theta_a) + np.sin(theta_i)) - (np.sin(geom.theta_b) + np.sin(theta_s))
    return float(r1), float(r2)


def _jacobian(geom, theta_i, theta_s):
    r = geom.ratio
    return np.array(
        [
            [r * np.sin(theta_i), -np.sin(theta_s)],
            [r * np.cos(theta_i), -np.cos(theta_s)],
        ]
    )


def solve_angles(geom: FwmGeometry, guess=None, tol=1e-12, max_iter=100) -> tuple[float, float]:
    """Newton iteration for (theta_i, theta_s), started at (theta_a, theta_b) by default.

    The system has several branches; the default start picks the root next
    to the excitation angles.
    """
    x = np.array(guess if guess is not None else (geom.theta_a, geom.theta_b), dtype=float)
    f = np.array(residual(geom, *x))
    for _ in range(max_iter):
        if np.max(np.abs(f)) < tol:
            return float(x[0]), float(x[1])
        jac = _jacobian(geom, *x)
        # det = ratio * sin(theta_s - theta_i)
        if abs(np.linalg.det(jac)) < 1e-14:
            raise SolverError("singular Jacobian", x, f)
        step = np.linalg.solve(jac, f)
        # backtrack so the residual norm never grows
        t = 1.0
        while True:
            trial = x - t * step
            f_trial = np.array(residual(geom, *trial))
            if np.max(np.abs(f_trial)) < np.max(np.abs(f)) or t < 1e-4:
                break
            t *= 0.5
        x, f = trial, f_trial
    if np.max(np.abs(f)) < tol:
        return float(x[0]), float(x[1])
    raise SolverError(f"no convergence in {max_iter} iterations", x, f)


def small_angle_approx(geom: FwmGeometry) -> tuple[float, float]:
    """Leading-order estimate theta_s ~ theta_b ~ 2 theta_i for theta_b = 2 theta_a << 1.

    Only an approximation; the caller is responsible for the regime.
    """
    theta_s = geom.theta_b
    return theta_s / 2.0, theta_s
