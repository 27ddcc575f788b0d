import itertools
import json
import math

import numpy as np
import pytest

import _oracles as O
from lattc import (
    DomainError,
    SumResult,
    dual,
    epstein_zeta,
    lattice_energy,
    make_lattice,
    named_lattice,
    theta,
)
from lattc.special import theta_values

Z1, Z2 = named_lattice("zd:1"), named_lattice("zd:2")
TRI = named_lattice("triangular")
SHEARED = make_lattice([[1.0, 0.0], [0.4, 1.0]])


def random_lattices(n, seed):
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < n:
        b = rng.normal(size=(2, 2))
        if np.linalg.cond(b) < 8:
            out.append(make_lattice(b))
    return out


# ----------------------------------------------------------------- theta


def test_theta_z_closed_form():
    r = theta(Z1, 1.0, 1e-12)
    assert abs(r.value - O.THETA_Z[1.0]) < 1e-12
    assert r.tail_bound <= 1e-12 * r.value


def test_theta_z2_is_square():
    assert abs(theta(Z2, 1.0, 1e-12).value - O.THETA_Z2_1) < 1e-12


def test_theta_large_alpha():
    assert theta(Z2, 50.0, 1e-12).value - 1 < 1e-20


def test_theta_rejects_bad_input():
    with pytest.raises(DomainError):
        theta(Z2, 0.0)
    with pytest.raises(DomainError):
        theta(Z2, 1.0, tol=0)


@pytest.mark.parametrize("alpha", [0.3, 0.5, 2.0, 3.0])
def test_theta_z_oracle_grid(alpha):
    assert abs(theta(Z1, alpha, 1e-12).value - O.THETA_Z[alpha]) < 1e-11


def test_theta_triangular_oracle():
    assert abs(theta(TRI, 1.0, 1e-12).value - O.THETA_TRI_1) < 1e-12


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_theta_product_structure(d, alpha):
    L = named_lattice(f"zd:{d}")
    assert abs(theta(L, alpha, 1e-12).value - theta(Z1, alpha, 1e-12).value ** d) < 1e-10


def test_theta_small_alpha_uses_dual_consistently():
    # alpha below the Poisson threshold goes through the dual lattice
    direct = theta(SHEARED, 0.04, 1e-12, poisson_threshold=0.0).value
    via_dual = theta(SHEARED, 0.04, 1e-12).value
    assert abs(direct - via_dual) < 1e-9 * direct


def test_poisson_identity_random():
    for L in random_lattices(20, 7):
        D = dual(L)
        for a in (0.3, 1.0, 3.0):
            lhs = theta(L, a, 1e-12).value
            rhs = theta(D, 1 / a, 1e-12).value / (L.covolume * a)
            assert abs(lhs - rhs) < 1e-8 * lhs


def test_theta_strictly_decreasing():
    alphas = np.linspace(0.2, 4, 25)
    for L in (Z2, TRI, SHEARED, named_lattice("zd:3")):
        vals = [theta(L, a, 1e-12).value for a in alphas]
        assert all(x > y for x, y in zip(vals, vals[1:]))


@pytest.mark.parametrize("alpha", [0.5, 1.0, 2.0])
def test_montgomery_ordering(alpha):
    # a shear of a stretched rectangle, further from the triangular point than Z^2
    y = 1.6
    L = make_lattice([[1 / math.sqrt(y), 0.0], [0.15 / math.sqrt(y), math.sqrt(y)]])
    assert abs(L.covolume - 1) < 1e-14
    assert theta(TRI, alpha).value < theta(Z2, alpha).value < theta(L, alpha).value


def test_theta_values_vectorised():
    a = np.array([0.5, 1.0, 2.0])
    got = theta_values(Z1, a)
    assert np.allclose(got, [O.THETA_Z[0.5], O.THETA_Z[1.0], O.THETA_Z[2.0]], rtol=1e-12, atol=0)


def test_sum_result_json():
    r = theta(Z2, 1.0)
    d = json.loads(r.to_json())
    assert set(d) == {"value", "tail_bound", "terms_used", "cutoff_radius"}
    assert SumResult(**d) == r


# ------------------------------------------------------------------ zeta


def test_zeta_z_2():
    r = epstein_zeta(Z1, 2.0, 1e-10)
    assert abs(r.value - O.ZETA_Z_2) < 1e-9


def test_zeta_z2_4():
    assert abs(epstein_zeta(Z2, 4.0, 1e-8).value - O.ZETA_Z2[4]) < 1e-6


def test_zeta_domain():
    with pytest.raises(DomainError):
        epstein_zeta(Z2, 1.5)
    with pytest.raises(DomainError):
        epstein_zeta(Z2, 2.0)


@pytest.mark.parametrize("s", [3, 4, 5])
def test_zeta_closed_forms(s):
    assert abs(epstein_zeta(Z2, s, 1e-10).value - O.ZETA_Z2[s]) < 1e-8 * O.ZETA_Z2[s]
    assert abs(epstein_zeta(TRI, s, 1e-10).value - O.ZETA_TRI[s]) < 1e-8 * O.ZETA_TRI[s]


@pytest.mark.parametrize("s", [3, 4, 5])
def test_zeta_against_naive_double_loop(s):
    # naive box sum over |m|, |n| <= K; the missing part is bounded by a continuum tail
    K = 300
    for L in (Z2, TRI):
        ms = np.arange(-K, K + 1, dtype=float)
        M, N = np.meshgrid(ms, ms, indexing="ij")
        n2 = L.gram[0, 0] * M**2 + 2 * L.gram[0, 1] * M * N + L.gram[1, 1] * N**2
        n2[K, K] = np.inf
        total = float(np.sum(n2 ** (-s / 2)))
        ref = epstein_zeta(L, s, 1e-10)
        # the box misses only |p| > K * lambda_min(basis); bound by the continuum integral
        r_in = K * math.sqrt(np.linalg.eigvalsh(L.gram)[0])
        missing = 2 * math.pi * r_in ** (2 - s) / (s - 2) / L.covolume * 1.1
        assert 0 <= ref.value - total <= missing + ref.tail_bound


def test_zeta_error_estimate_is_reported():
    r = epstein_zeta(Z2, 3, 1e-8)
    assert 0 < r.tail_bound <= 1e-8 * r.value
    assert abs(r.value - O.ZETA_Z2[3]) < 10 * r.tail_bound + 1e-12


# ---------------------------------------------------------------- energies


def test_energy_gaussian_is_theta_minus_one():
    r = lattice_energy(Z2, lambda x: np.exp(-math.pi * x), decay=("exp", 1.0), tol=1e-12)
    assert abs(r.value - (O.THETA_Z2_1 - 1)) < 1e-11


def test_energy_inverse_square_is_zeta():
    r = lattice_energy(Z1, lambda x: 1.0 / x, decay=("power", 2.0), tol=1e-10)
    assert abs(r.value - O.ZETA_Z_2) < 1e-8
    assert abs(r.value - epstein_zeta(Z1, 2.0).value) < 1e-8


def test_energy_triangular_below_square():
    f = lambda x: np.exp(-math.pi * x)  # noqa: E731
    t = lattice_energy(TRI, f, tol=1e-12).value
    s = lattice_energy(Z2, f, tol=1e-12).value
    assert abs(t - (O.THETA_TRI_1 - 1)) < 1e-11
    assert t < s


def test_energy_scalar_only_function():
    r = lattice_energy(Z2, lambda x: math.exp(-math.pi * x), tol=1e-10)
    assert abs(r.value - (O.THETA_Z2_1 - 1)) < 1e-10


def test_energy_rejects_bad_hint():
    with pytest.raises(DomainError):
        lattice_energy(Z2, lambda x: x, decay=("poly", 1.0))
    with pytest.raises(DomainError):
        lattice_energy(Z2, lambda x: 1 / x, decay=("power", 1.5))


def test_brute_force_theta_double_loop():
    K = 8
    ms = range(-K, K + 1)
    for L in (TRI, SHEARED):
        brute = sum(
            math.exp(-math.pi * float(np.dot(z, L.gram @ np.array(z, dtype=float))))
            for z in itertools.product(ms, ms)
        )
        assert abs(theta(L, 1.0, 1e-13).value - brute) < 1e-12
