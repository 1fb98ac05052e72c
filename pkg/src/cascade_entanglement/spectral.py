"""Closed-form joint spectral amplitudes of cascaded cascade-emission sources.

All frequencies are in units of the intrinsic decay rate Gamma_3 (fixed to 1),
all times in units of 1/Gamma_3.  Every evaluator broadcasts over numpy
arrays, so the same functions serve scalar spot checks and full grid fills.

Returned values follow the ``Gamma_3**(arity - 1) * f`` convention: overall
prefactors (pump areas, couplings, atom number) are dropped since they only
set generation rates, never the spectral shape.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class Route(enum.Enum):
    """Cascade topology of a k-photon state.

    The value of each member is its ordered photon labels; detuning tuples
    passed to the evaluators follow the same order.
    """

    BIPHOTON = ("s", "i")
    B1 = ("s", "s'", "i'")
    B2 = ("i", "s'", "i'")
    C1 = ("s", "s'", "s''", "i''")
    C2 = ("s", "i'", "s''", "i''")
    C3 = ("s'", "i'", "s''", "i''")
    C4 = ("i", "s'", "s''", "i''")
    C5 = ("i", "i'", "s''", "i''")

    @property
    def photon_labels(self) -> tuple[str, ...]:
        return self.value

    @property
    def arity(self) -> int:
        return len(self.value)

    @property
    def stages(self) -> int:
        """Number of ensembles in the cascade (one idler Lorentzian each)."""
        return self.arity - 1

    @classmethod
    def parse(cls, name: str) -> "Route":
        key = name.strip().upper()
        try:
            return cls[key]
        except KeyError:
            valid = ", ".join(m.name for m in cls)
            raise ValueError(f"unknown route {name!r}; valid routes: {valid}") from None


_PRIME_ALIASES = {"′": "'", "″": "''", "‴": "'''"}


def canonical_label(label: str) -> str:
    """Normalize a photon label: ``s1``/``s′`` -> ``s'``, ``i2``/``i″`` -> ``i''``."""
    text = label.strip()
    for uni, ascii_ in _PRIME_ALIASES.items():
        text = text.replace(uni, ascii_)
    if len(text) == 2 and text[0] in "si" and text[1] in "012":
        text = text[0] + "'" * int(text[1])
    return text


@dataclass(frozen=True)
class SpectralParams:
    """Physical parameters shared by every route.

    ``gammaN`` holds the superradiant decay rates of the successive
    ensembles (AE, AE', AE'').  A single value is broadcast to all stages;
    a shorter list is padded with its last entry.
    """

    gammaN: tuple[float, ...] = (5.0,)
    tau_a: float = 0.25
    tau_b: float = 0.25
    delta_a3: float = 0.0
    delta_omega_i: float = 0.0
    gamma3: float = field(default=1.0, init=False)

    def __post_init__(self):
        rates = self.gammaN
        if np.isscalar(rates):
            rates = (rates,)
        rates = tuple(float(g) for g in rates)
        object.__setattr__(self, "gammaN", rates)
        if not rates:
            raise ValueError("gammaN needs at least one decay rate")
        if any(not np.isfinite(g) or g <= 0 for g in rates):
            raise ValueError(f"decay rates must be positive, got {rates}")
        for name in ("tau_a", "tau_b"):
            value = float(getattr(self, name))
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{name} must be positive, got {value}")
            object.__setattr__(self, name, value)
        for name in ("delta_a3", "delta_omega_i"):
            object.__setattr__(self, name, float(getattr(self, name)))

    def stage_rates(self, n: int) -> tuple[float, ...]:
        rates = self.gammaN
        if len(rates) > n:
            raise ValueError(f"{len(rates)} decay rates given for a {n}-stage route")
        return rates + (rates[-1],) * (n - len(rates))

    @property
    def tau_eff(self) -> float:
        return effective_pulse_width(self.tau_a, self.tau_b)


def effective_pulse_width(tau_a: float, tau_b: float) -> float:
    """Width sqrt(2) tau_a tau_b / sqrt(tau_a^2 + tau_b^2) of the two-pulse envelope."""
    if not (tau_a > 0 and tau_b > 0):
        raise ValueError(f"pulse widths must be positive, got {tau_a}, {tau_b}")
    # hypot avoids overflow for the tau_a -> infinity limit
    return np.sqrt(2.0) * tau_a * (tau_b / np.hypot(tau_a, tau_b))


def _envelope(total, tau_eff):
    return np.exp(-(total**2) * tau_eff**2 / 8.0)


def _pair(total, tau):
    return np.exp(-(total**2) * tau**2 / 4.0)


def _lorentz(rate, detuning):
    return 1.0 / (rate / 2.0 - 1j * detuning)


def eval_biphoton(params: SpectralParams, d_omega_s, d_omega_i):
    """Two-photon amplitude of a single ensemble."""
    (g,) = params.stage_rates(1)
    return _envelope(d_omega_s + d_omega_i, params.tau_eff) * _lorentz(g, d_omega_i)


def _b1(p: SpectralParams, s, s1, i1):
    g, g1 = p.stage_rates(2)
    shift = p.delta_a3 + p.delta_omega_i
    pair = s1 + i1
    return (
        _envelope(s + pair + shift, p.tau_eff)
        * _pair(pair, p.tau_b)
        * _lorentz(g, pair + shift)
        * _lorentz(g1, i1)
    )


def _b2(p: SpectralParams, i, s1, i1):
    g, g1 = p.stage_rates(2)
    pair = s1 + i1
    return (
        _envelope(i + pair, p.tau_eff)
        * _pair(pair, p.tau_a)
        * _lorentz(g, i)
        * _lorentz(g1, i1)
    )


def _c1(p: SpectralParams, s, s1, s2, i2):
    g, g1, g2 = p.stage_rates(3)
    last = s2 + i2
    return (
        _envelope(s + s1 + last, p.tau_eff)
        * _pair(s1 + last, p.tau_b)
        * _pair(last, p.tau_b)
        * _lorentz(g, s1 + last)
        * _lorentz(g1, last)
        * _lorentz(g2, i2)
    )


def _c2(p: SpectralParams, s, i1, s2, i2):
    g, g1, g2 = p.stage_rates(3)
    last = s2 + i2
    return (
        _envelope(s + i1 + last, p.tau_eff)
        * _pair(i1 + last, p.tau_b)
        * _pair(last, p.tau_a)
        * _lorentz(g, i1 + last)
        * _lorentz(g1, i1)
        * _lorentz(g2, i2)
    )


def _c3(p: SpectralParams, s1, i1, s2, i2):
    g, g1, g2 = p.stage_rates(3)
    first, last = s1 + i1, s2 + i2
    return (
        _envelope(first + last, p.tau_eff)
        * _pair(first, p.tau_a)
        * _pair(last, p.tau_b)
        * _lorentz(g, last)
        * _lorentz(g1, i1)
        * _lorentz(g2, i2)
    )


def _c4(p: SpectralParams, i, s1, s2, i2):
    g, g1, g2 = p.stage_rates(3)
    last = s2 + i2
    return (
        _envelope(s1 + i + last, p.tau_eff)
        * _pair(s1 + last, p.tau_a)
        * _pair(last, p.tau_b)
        * _lorentz(g, i)
        * _lorentz(g1, last)
        * _lorentz(g2, i2)
    )


def _c5(p: SpectralParams, i, i1, s2, i2):
    g, g1, g2 = p.stage_rates(3)
    last = s2 + i2
    return (
        _envelope(i + i1 + last, p.tau_eff)
        * _pair(i1 + last, p.tau_a)
        * _pair(last, p.tau_a)
        * _lorentz(g, i)
        * _lorentz(g1, i1)
        * _lorentz(g2, i2)
    )


_THREE = {Route.B1: _b1, Route.B2: _b2}
_FOUR = {Route.C1: _c1, Route.C2: _c2, Route.C3: _c3, Route.C4: _c4, Route.C5: _c5}


def eval_three_photon(route: Route, params: SpectralParams, d: Sequence):
    """Amplitude of route B1 or B2; ``d`` ordered as ``route.photon_labels``.

    The B1 form carries the extra shift ``delta_a3 + delta_omega_i``; with
    both at their default of zero it reduces to the Zeeman-compensated form.
    """
    if route not in _THREE:
        raise ValueError(f"{route.name} is not a three-photon route")
    if len(d) != 3:
        raise ValueError(f"{route.name} takes 3 detunings, got {len(d)}")
    return _THREE[route](params, *d)


def eval_four_photon(route: Route, params: SpectralParams, d: Sequence):
    if route not in _FOUR:
        raise ValueError(f"{route.name} is not a four-photon route")
    if len(d) != 4:
        raise ValueError(f"{route.name} takes 4 detunings, got {len(d)}")
    return _FOUR[route](params, *d)


def amplitude(route: Route, params: SpectralParams, d: Sequence):
    """Dispatch on route arity.  Detunings may be scalars or broadcastable arrays."""
    if route is Route.BIPHOTON:
        if len(d) != 2:
            raise ValueError(f"BIPHOTON takes 2 detunings, got {len(d)}")
        return eval_biphoton(params, *d)
    if route.arity == 3:
        return eval_three_photon(route, params, d)
    return eval_four_photon(route, params, d)
