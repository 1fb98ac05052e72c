import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from cascade_entanglement.projector import AmplitudeGrid, GridSpec, make_grid, project
from cascade_entanglement.schmidt import (
    converge_entropy,
    decompose,
    entropy,
    kernel_eigenvalues,
    normalize,
    reconstruct,
)
from cascade_entanglement.spectral import Route, SpectralParams

BASE = SpectralParams()


def _grid(fn, half_width=10.0, n=101):
    spec = GridSpec(half_width, n, ("x", "y"))
    x = make_grid(spec)
    X, Y = np.meshgrid(x, x, indexing="ij")
    return AmplitudeGrid(spec, np.asarray(fn(X, Y), dtype=complex))


def _norm2(g):
    return np.sum(np.abs(g.values) ** 2) * g.spec.spacing**2


def two_mode_gaussian(a, b, **kw):
    return _grid(lambda x, y: np.exp(-(x + y) ** 2 / (4 * a * a) - (x - y) ** 2 / (4 * b * b)), **kw)


def mehler_spectrum(a, b, n):
    """Analytic Schmidt spectrum of exp(-(x+y)^2/4a^2 - (x-y)^2/4b^2).

    In rotated coordinates u = (x+y)/sqrt2, v = (x-y)/sqrt2 the amplitude is a
    product of Gaussians of widths a and b; Mehler's formula expands it as
    sum_n t^n h_n(x) h_n(y) (Hermite functions) with t = (b - a)/(b + a), so
    the normalized Schmidt eigenvalues are (1 - t^2) t^(2n).  Check: the
    Schmidt number (1 + t^2)/(1 - t^2) equals (a/b + b/a)/2.
    """
    mu = ((b - a) / (b + a)) ** 2
    return (1 - mu) * mu ** np.arange(n)


def test_mehler_note_consistency():
    lam = mehler_spectrum(1.0, 3.0, 200)
    assert lam.sum() == pytest.approx(1.0, abs=1e-15)
    assert 1 / np.sum(lam**2) == pytest.approx((1 / 3 + 3) / 2, rel=1e-12)


def test_normalize_constant_grid():
    g = normalize(_grid(lambda x, y: 3.0 + 0 * x, n=11))
    n, dw = 11, g.spec.spacing
    np.testing.assert_allclose(g.values, 1 / (n * dw), rtol=1e-14)
    assert _norm2(g) == pytest.approx(1.0, abs=1e-14)


def test_normalize_idempotent_and_phase():
    g = normalize(two_mode_gaussian(1.0, 2.0))
    np.testing.assert_allclose(normalize(g).values, g.values, rtol=0, atol=1e-15)
    phase = np.exp(0.7j)
    gp = normalize(g.with_values(g.values * phase))
    np.testing.assert_allclose(gp.values, g.values * phase, rtol=1e-14)
    np.testing.assert_allclose(decompose(gp, modes=False).eigenvalues, decompose(g, modes=False).eigenvalues, atol=1e-15)


def test_normalize_rejects_zero_and_nonfinite():
    with pytest.raises(ValueError):
        normalize(_grid(lambda x, y: 0 * x))
    bad = _grid(lambda x, y: np.where(x == 0, np.nan, 1.0))
    with pytest.raises(ValueError):
        decompose(bad)


def test_separable_grid():
    r = decompose(_grid(lambda x, y: np.exp(-x**2) * (1 + 0.3j * y) * np.exp(-y**2 / 3)))
    assert r.eigenvalues[0] == pytest.approx(1.0, abs=1e-12)
    assert np.all(r.eigenvalues[1:] < 1e-12)
    assert r.entropy <= 1e-6
    np.testing.assert_allclose(kernel_eigenvalues(normalize(_grid(lambda x, y: np.exp(-x**2 - y**2))))[0], 1.0, atol=1e-12)


def test_mehler_oracle():
    a, b = 1.0, 3.0
    r = decompose(two_mode_gaussian(a, b, half_width=30.0, n=601))
    expected = mehler_spectrum(a, b, 10)
    np.testing.assert_allclose(r.eigenvalues[:10], expected, rtol=1e-6)
    mu = ((b - a) / (b + a)) ** 2
    s_exact = -(np.log2(1 - mu) + mu / (1 - mu) * np.log2(mu))
    assert r.entropy == pytest.approx(s_exact, abs=1e-9)


def _check_invariants(r, spec, tol_orth=1e-8):
    lam = r.eigenvalues
    assert abs(lam.sum() - 1) < 1e-9
    assert np.all(np.diff(lam) <= 0) and np.all(lam >= 0)
    assert r.entropy >= 0
    dw = spec.spacing
    k = min(20, r.modes_psi.shape[1])
    for m in (r.modes_psi[:, :k], r.modes_phi[:, :k]):
        gram = m.conj().T @ m * dw
        np.testing.assert_allclose(gram, np.eye(k), atol=tol_orth)


def test_result_invariants_and_reconstruction():
    g = project(Route.B1, BASE, {"s": 0.0}, GridSpec(60.0, 241))
    r = decompose(g)
    _check_invariants(r, g.spec)
    rebuilt = reconstruct(r)
    target = normalize(g).values
    rms = np.sqrt(np.mean(np.abs(rebuilt - target) ** 2))
    assert rms <= 1e-6


def test_svd_matches_both_kernels():
    for route, fixed in [(Route.B1, {"s": 0.0}), (Route.B2, {"s'": 0.0}), (Route.C3, {"s'": 0, "s''": 0})]:
        g = project(route, BASE, fixed, GridSpec(60.0, 241))
        lam = decompose(g, modes=False).eigenvalues
        k1 = kernel_eigenvalues(g, "K1")
        k2 = kernel_eigenvalues(g, "K2")
        keep = lam > 1e-10
        np.testing.assert_allclose(k1[keep], lam[keep], atol=1e-8, rtol=0)
        np.testing.assert_allclose(k2[keep], lam[keep], atol=1e-8, rtol=0)


def test_kernel_rejects_bad_which():
    with pytest.raises(ValueError):
        kernel_eigenvalues(two_mode_gaussian(1, 2), "K3")


def test_axis_swap():
    g = project(Route.B1, BASE, {"s": 0.0}, GridSpec(40.0, 161))
    gt = AmplitudeGrid(g.spec.with_axes(g.spec.axes[::-1]), g.values.T.copy())
    r, rt = decompose(g), decompose(gt)
    np.testing.assert_allclose(rt.eigenvalues, r.eigenvalues, atol=1e-14)
    assert rt.entropy == pytest.approx(r.entropy, abs=1e-12)
    # modes trade places up to a phase; compare well-separated leading modes
    for n in range(3):
        np.testing.assert_allclose(np.abs(rt.modes_psi[:, n]), np.abs(r.modes_phi[:, n]), atol=1e-8)
        np.testing.assert_allclose(np.abs(rt.modes_phi[:, n]), np.abs(r.modes_psi[:, n]), atol=1e-8)


@pytest.mark.parametrize("c", [2.0, 1e-7, 3e5 * np.exp(2.1j), -1j])
def test_scale_and_phase_invariance(c):
    g = project(Route.B2, BASE, {"i": 0.0}, GridSpec(60.0, 241))
    r = decompose(g, modes=False)
    rc = decompose(g.with_values(g.values * c), modes=False)
    assert abs(rc.entropy - r.entropy) <= 1e-10
    np.testing.assert_allclose(rc.eigenvalues, r.eigenvalues, atol=1e-10)


def test_entropy_examples():
    assert entropy([1.0]) == 0.0
    assert entropy([0.5, 0.5]) == 1.0
    assert entropy([0.25] * 4) == 2.0
    assert entropy([0.5, 0.5, 0.0, 0.0]) == 1.0
    for k in (3, 5, 7, 64):
        assert entropy(np.full(k, 1 / k)) == pytest.approx(math.log2(k), abs=1e-13)
    assert entropy([0.5, 0.5, -1e-13]) == 1.0


def test_entropy_errors():
    with pytest.raises(ValueError):
        entropy([1.1, -0.1])
    with pytest.raises(ValueError):
        entropy([0.5, 0.4])
    with pytest.raises(ValueError):
        entropy([])


@settings(max_examples=30, deadline=None)
@given(arrays(np.float64, (2, 12, 12), elements=st.floats(-1, 1)))
def test_random_grid_properties(parts):
    values = parts[0] + 1j * parts[1] + 0.01  # avoid the all-zero grid
    spec = GridSpec(3.0, 12, ("x", "y"))
    g = AmplitudeGrid(spec, values)
    r = decompose(g)
    _check_invariants(r, spec)
    np.testing.assert_allclose(reconstruct(r), normalize(g).values, atol=1e-10)
    keep = r.eigenvalues > 1e-10
    np.testing.assert_allclose(kernel_eigenvalues(g, "K1")[keep], r.eigenvalues[keep], atol=1e-8)
    np.testing.assert_allclose(kernel_eigenvalues(g, "K2")[keep], r.eigenvalues[keep], atol=1e-8)


def test_converge_separable_first_doubling():
    # very short pulses flatten the envelope, leaving the separable Lorentzian
    params = SpectralParams(gammaN=(5.0,), tau_a=1e-4, tau_b=1e-4)
    r = converge_entropy(Route.BIPHOTON, params, {}, GridSpec(100.0, 64), tol=0.02)
    assert r.converged
    assert [n for n, _ in r.history] == [64, 128]
    assert r.entropy < 1e-6


def test_converge_cap_reports_failure():
    r = converge_entropy(Route.B1, BASE, {"s": 0.0}, GridSpec(200.0, 16), tol=1e-9, max_points=64)
    assert not r.converged
    assert [n for n, _ in r.history] == [16, 32, 64]
    assert r.delta_entropy >= 1e-9
    with pytest.raises(ValueError):
        converge_entropy(Route.B1, BASE, {"s": 0.0}, GridSpec(200.0, 16), tol=0.0)


def test_converge_with_modes():
    r = converge_entropy(Route.C3, BASE, {"s'": 0, "s''": 0}, GridSpec(100.0, 128), tol=0.02, modes=True)
    assert r.converged and r.modes_psi is not None
    assert r.modes_psi.shape[0] == r.spec.n_points
