import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hnla_lab.errors import TruncationWarning
from hnla_lab.fock_core import (
    DensityMatrix,
    FockVector,
    SqueezedCoherentParams,
    TwoModeSchmidtState,
    coherent_squeezed_coeffs,
    coherent_squeezed_table,
    fidelity,
    hermite,
    inner_product,
    mix,
    pure_to_density,
    quadrature_stats,
    squeezing_from_db,
    thermal_cutoff,
    thermal_density,
    trace_distance,
    vacuum_squeezed_coeffs,
)
from hnla_lab.hnla_transform import auto_cutoff, tail_bound
from oracles import expm_state, fock_expansion_mp, hermite_explicit, quadrature_moments_matrix

R_4DB = 0.46052

radii = st.floats(0.0, 1.2)
angles = st.floats(0.0, 2 * math.pi)
small_complex = st.complex_numbers(max_magnitude=2.0, allow_nan=False, allow_infinity=False)


# --- hermite ---------------------------------------------------------------

def test_hermite_base_case():
    assert hermite(0, 3.7 - 1j) == 1


def test_hermite_even_at_zero():
    assert hermite(2, 0) == -2


def test_hermite_h3():
    assert hermite(3, 1.5) == pytest.approx(9.0, abs=1e-12)


@pytest.mark.parametrize("n", [0, 1, 2, 5, 10, 17])
@pytest.mark.parametrize("z", [0.3, -1.1 + 0.4j, 2.5j])
def test_hermite_matches_explicit_sum(n, z):
    assert hermite(n, z) == pytest.approx(hermite_explicit(n, z), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("n", [4, 8, 12])
def test_hermite_at_zero_closed_form(n):
    expected = (-1) ** (n // 2) * math.factorial(n) / math.factorial(n // 2)
    assert hermite(n, 0.0) == pytest.approx(expected)


@pytest.mark.parametrize("n", [-1, 10_001, 2.5])
def test_hermite_rejects_bad_order(n):
    with pytest.raises(ValueError):
        hermite(n, 0.1)


# --- vacuum squeezed -------------------------------------------------------

def test_vacuum_squeezed_zero_is_vacuum():
    v = vacuum_squeezed_coeffs(0.0, 0.0, 10)
    np.testing.assert_array_equal(v.amps, np.eye(11)[0])


@given(radii, angles, st.integers(0, 60))
def test_vacuum_squeezed_parity(r, phi, n_max):
    v = vacuum_squeezed_coeffs(r, phi, n_max)
    assert np.all(v.amps[1::2] == 0)


def test_vacuum_squeezed_truncated_norm_4db():
    # 40-digit direct summation of |c_0|^2 + |c_2|^2
    assert vacuum_squeezed_coeffs(R_4DB, 0.0, 2).norm_sq == pytest.approx(0.986228194213074, abs=1e-14)


def test_db_convention():
    assert squeezing_from_db(4.0) == pytest.approx(R_4DB, abs=1e-5)
    assert math.exp(-2 * squeezing_from_db(3.0)) == pytest.approx(10 ** -0.3)


def test_vacuum_squeezed_matches_expm():
    v = vacuum_squeezed_coeffs(0.7, 2.1, 60)
    np.testing.assert_allclose(v.amps, expm_state(0, 0.7, 2.1, 60), atol=1e-13)


def test_vacuum_squeezed_negative_r():
    with pytest.raises(ValueError):
        vacuum_squeezed_coeffs(-0.1, 0.0, 4)


# --- coherent squeezed -----------------------------------------------------

def test_coherent_squeezed_alpha_zero_reduces_to_vacuum_squeezed():
    a = coherent_squeezed_coeffs(SqueezedCoherentParams(0j, 0.3, math.pi / 4), 40)
    b = vacuum_squeezed_coeffs(0.3, math.pi / 4, 40)
    np.testing.assert_allclose(a.amps, b.amps, rtol=0, atol=1e-12)


def test_coherent_limit():
    v = coherent_squeezed_coeffs(SqueezedCoherentParams(1 + 0j, 0.0), 60)
    expected = [math.exp(-0.5) / math.sqrt(math.factorial(n)) for n in range(61)]
    np.testing.assert_allclose(v.amps, expected, rtol=1e-13, atol=1e-300)


def test_coherent_squeezed_normalization():
    v = coherent_squeezed_coeffs(SqueezedCoherentParams(0.7 + 0.2j, 0.5, 1.0), 80)
    assert v.norm_sq == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("alpha,r,phi", [(0.7 + 0.2j, 0.5, 1.0), (-1.3 + 0.8j, 0.9, 4.0), (2.0, 0.2, 0.0)])
def test_coherent_squeezed_matches_mp_expansion(alpha, r, phi):
    got = coherent_squeezed_coeffs(SqueezedCoherentParams(alpha, r, phi), 40).amps
    np.testing.assert_allclose(got, fock_expansion_mp(alpha, r, phi, 40), rtol=0, atol=1e-13)


@pytest.mark.parametrize("alpha,r,phi", [(0.7 + 0.2j, 0.5, 1.0), (1.5 - 0.5j, 0.3, 5.5)])
def test_coherent_squeezed_matches_expm(alpha, r, phi):
    # fixes the D(alpha) S(xi) ordering and sign conventions
    got = coherent_squeezed_coeffs(SqueezedCoherentParams(alpha, r, phi), 50).amps
    np.testing.assert_allclose(got, expm_state(alpha, r, phi, 50), atol=1e-12)


def test_coherent_squeezed_large_cutoff_stays_finite():
    # n! and H_n overflow near n = 170; the recurrence does not
    params = SqueezedCoherentParams(3 + 1j, 1.5, 0.3)
    v = coherent_squeezed_coeffs(params, 900)
    assert np.all(np.isfinite(v.amps))
    assert v.norm_sq == pytest.approx(1.0, abs=1e-10)


def test_coherent_squeezed_large_displacement():
    v = coherent_squeezed_coeffs(SqueezedCoherentParams(25 + 0j, 0.0), 1500)
    assert v.norm_sq == pytest.approx(1.0, abs=1e-10)


def test_table_matches_single_calls():
    alphas = [0.1, 1 - 1j, -0.4j]
    table = coherent_squeezed_table(alphas, 0.4, 2.0, 30)
    for row, a in zip(table, alphas):
        np.testing.assert_array_equal(row, coherent_squeezed_coeffs(SqueezedCoherentParams(a, 0.4, 2.0), 30).amps)


@given(small_complex, st.floats(0.0, 0.9), angles, angles)
def test_phase_covariance(alpha, r, phi, theta):
    n_max = 60
    base = coherent_squeezed_coeffs(SqueezedCoherentParams(alpha, r, phi), n_max)
    rotated = coherent_squeezed_coeffs(SqueezedCoherentParams(alpha * np.exp(1j * theta), r, phi + 2 * theta), n_max)
    np.testing.assert_allclose(rotated.amps, base.rotated(theta).amps, atol=1e-10)


@given(small_complex, st.floats(0.0, 1.0))
def test_norm_nondecreasing_in_cutoff(alpha, r):
    params = SqueezedCoherentParams(alpha, r, 0.4)
    norms = np.cumsum(np.abs(coherent_squeezed_coeffs(params, 150).amps) ** 2)
    assert np.all(np.diff(norms) >= 0)
    assert norms[-1] == pytest.approx(1.0, abs=1e-9)


def test_tail_bound_overestimates_true_tail(rng):
    for _ in range(100):
        params = SqueezedCoherentParams(complex(*rng.normal(0, 1.0, 2)), rng.uniform(0, 1.0), rng.uniform(0, 2 * np.pi))
        n_max = int(rng.integers(0, 40))
        amps = coherent_squeezed_coeffs(params, 400).amps
        true_tail = float(np.sum(np.abs(amps[n_max + 1:]) ** 2))
        assert tail_bound(params, n_max) >= true_tail


def test_auto_cutoff_meets_tail_budget(rng):
    for _ in range(20):
        params = SqueezedCoherentParams(complex(*rng.normal(0, 1.0, 2)), rng.uniform(0, 1.0), 0.0)
        n = auto_cutoff(params)
        assert 1.0 - coherent_squeezed_coeffs(params, n).norm_sq < 1e-10


def test_params_normalize_angle_and_reject_negative_r():
    p = SqueezedCoherentParams(1 + 2j, 0.1, -math.pi / 2)
    assert p.phi == pytest.approx(1.5 * math.pi)
    assert (p.x, p.p) == (2.0, 4.0)
    with pytest.raises(ValueError):
        SqueezedCoherentParams(0, -0.2, 0)


# --- inner product ---------------------------------------------------------

def test_inner_product_self_is_norm():
    v = coherent_squeezed_coeffs(SqueezedCoherentParams(0.3 - 0.2j, 0.4, 1.0), 30)
    ip = inner_product(v, v)
    assert ip.imag == 0 and ip.real == pytest.approx(v.norm_sq)


def test_inner_product_orthogonal():
    assert inner_product(FockVector.basis(0, 3), FockVector.basis(1, 3)) == 0


def test_inner_product_pads_shorter():
    a = FockVector([1, 2])
    b = FockVector([3, 4, 5])
    assert inner_product(a, b) == 11


def test_vacuum_squeezed_overlap():
    # 40-digit series summation, equal to (cosh(r' - r))^{-1/2}
    a = vacuum_squeezed_coeffs(0.3, 1.1, 200)
    b = vacuum_squeezed_coeffs(0.5, 1.1, 200)
    ip = inner_product(a, b)
    assert ip.real == pytest.approx(0.990115143629631, abs=1e-13)
    assert abs(ip.imag) < 1e-15


# --- quadratures -----------------------------------------------------------

def test_quadratures_vacuum():
    assert quadrature_stats(FockVector.basis(0, 5)) == pytest.approx((0, 0, 1, 1))


def test_quadratures_coherent():
    v = coherent_squeezed_coeffs(SqueezedCoherentParams.from_quadratures(1.2, -0.6), 60)
    assert quadrature_stats(v) == pytest.approx((1.2, -0.6, 1, 1), abs=1e-10)


def test_quadratures_vacuum_squeezed():
    r = 0.6
    v = vacuum_squeezed_coeffs(r, 0.0, 150)
    assert quadrature_stats(v) == pytest.approx((0, 0, math.exp(-2 * r), math.exp(2 * r)), abs=1e-8)


def test_quadratures_match_matrix_oracle(rng):
    for _ in range(5):
        params = SqueezedCoherentParams(complex(*rng.normal(0, 1, 2)), rng.uniform(0, 0.8), rng.uniform(0, 6))
        v = coherent_squeezed_coeffs(params, 120)
        assert quadrature_stats(v) == pytest.approx(quadrature_moments_matrix(v.amps), abs=1e-10)


@given(small_complex, st.floats(0.0, 0.9))
def test_minimum_uncertainty(alpha, r):
    v = coherent_squeezed_coeffs(SqueezedCoherentParams(alpha, r, 0.0), 150)
    _, _, vx, vp = quadrature_stats(v.normalized())
    assert vx * vp == pytest.approx(1.0, abs=1e-8)


def test_quadratures_warn_on_heavy_tail():
    v = coherent_squeezed_coeffs(SqueezedCoherentParams(2.0, 0.0), 8).normalized()
    with pytest.warns(TruncationWarning):
        quadrature_stats(v)


def test_quadratures_quiet_when_converged():
    v = vacuum_squeezed_coeffs(0.2, 0.0, 80)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        quadrature_stats(v)


def test_quadratures_need_normalized_input():
    with pytest.raises(ValueError):
        quadrature_stats(FockVector([1.0, 1.0]))


# --- densities -------------------------------------------------------------

def test_pure_to_density_projector():
    v = coherent_squeezed_coeffs(SqueezedCoherentParams(0.5j, 0.2, 0.7), 40)
    rho = pure_to_density(v)
    assert rho.trace == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(rho.elems @ rho.elems, rho.elems, atol=1e-12)


def test_equal_mix():
    rho = mix([(0.5, pure_to_density(FockVector.basis(0, 1))), (0.5, pure_to_density(FockVector.basis(1, 1)))])
    np.testing.assert_array_equal(rho.elems, np.diag([0.5, 0.5]))


def test_geometric_mix_is_thermal():
    s, n_max = 0.5, 40
    t2 = math.tanh(s) ** 2
    ens = [(t2**n / math.cosh(s) ** 2, pure_to_density(FockVector.basis(n, n_max))) for n in range(n_max + 1)]
    np.testing.assert_allclose(mix(ens).elems, thermal_density(s, n_max).elems, atol=1e-12)


def test_mix_rejects_negative_weight():
    with pytest.raises(ValueError):
        mix([(-0.1, pure_to_density(FockVector.basis(0, 1)))])


def test_mix_keeps_unnormalized_trace():
    rho = pure_to_density(FockVector.basis(0, 2))
    assert mix([(0.3, rho), (0.2, rho)]).trace == pytest.approx(0.5)


def test_density_rejects_non_hermitian():
    with pytest.raises(ValueError):
        DensityMatrix([[1, 1], [0, 0]])


def test_thermal_cutoff_budget():
    n = thermal_cutoff(0.56, 1e-10)
    t2 = math.tanh(0.56) ** 2
    assert t2 ** (n + 1) < 1e-10 <= t2**n


def test_thermal_density_trace_and_psd():
    rho = thermal_density(0.8, thermal_cutoff(0.8, 1e-13))
    assert rho.trace == pytest.approx(1.0, abs=1e-12)
    assert rho.is_psd()
    assert thermal_density(0.8, 5, renormalize=True).trace == pytest.approx(1.0, abs=1e-14)


def test_json_round_trip():
    v = coherent_squeezed_coeffs(SqueezedCoherentParams(0.1 + 0.3j, 0.2, 1.0), 6)
    back = FockVector.from_json(v.to_json())
    np.testing.assert_array_equal(back.amps, v.amps)
    rho = pure_to_density(v)
    np.testing.assert_array_equal(DensityMatrix.from_json(rho.to_json()).elems, rho.elems)


def test_schmidt_epr_and_filter():
    state = TwoModeSchmidtState.epr(0.5, 40)
    np.testing.assert_allclose(state.lambdas[1:] / state.lambdas[:-1], math.tanh(0.5))
    filtered, weight = state.filtered(1.1)
    assert filtered.norm_sq == pytest.approx(1.0)
    assert weight > state.norm_sq


# --- trace distance --------------------------------------------------------

def test_trace_distance_self():
    rho = thermal_density(0.4, 30, renormalize=True)
    assert trace_distance(rho, rho) == 0


def test_trace_distance_orthogonal():
    assert trace_distance(pure_to_density(FockVector.basis(0, 3)), pure_to_density(FockVector.basis(1, 3))) == pytest.approx(1.0)


def test_trace_distance_thermal_pair():
    # 40-digit half-L1 distance of the diagonals at cutoff 60
    s = 0.5
    s_out = math.atanh(1.1 * math.tanh(s))
    d = trace_distance(thermal_density(s, 60), thermal_density(s_out, 60))
    assert d == pytest.approx(0.0448459760771552, abs=1e-14)


def test_trace_distance_dimension_mismatch():
    with pytest.raises(ValueError):
        trace_distance(thermal_density(0.1, 20), thermal_density(0.1, 21))


def _random_density(rng, dim):
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = m @ m.conj().T
    rho = rho / np.trace(rho).real
    return DensityMatrix(0.5 * (rho + rho.conj().T))


def test_trace_distance_metric_axioms(rng):
    for _ in range(50):
        a, b, c = (_random_density(rng, 6) for _ in range(3))
        dab, dba = trace_distance(a, b), trace_distance(b, a)
        assert dab == pytest.approx(dba, abs=1e-14)
        assert 0 <= dab <= 1 + 1e-10
        assert trace_distance(a, c) <= dab + trace_distance(b, c) + 1e-12
        assert a.is_psd()


def test_trace_distance_zero_iff_equal(rng):
    a = _random_density(rng, 5)
    assert trace_distance(a, DensityMatrix(a.elems.copy())) == 0
    bumped = a.elems.copy()
    bumped[0, 0] += 1e-9
    bumped[1, 1] -= 1e-9
    assert trace_distance(a, DensityMatrix(bumped)) > 0
