"""Group models, Darboux integration, Maurer-Cartan pullback, structure eq."""

import numpy as np
import pytest

from spinorforge.grid import ParamGrid
from spinorforge.lie_algebra import hn, rn, s3, sol3, semidirect
from spinorforge.lie_group import (
    GroupElement, IntegrationError, LieValuedOneForm, darboux_integrate,
    group_exp, left_translate, maurer_cartan_pullback, model_for,
    structure_residual,
)

rng = np.random.default_rng(97)

ALGS = [rn(3), s3(), sol3(), semidirect([[0.4, -0.3], [1.1, 0.2]]), hn(3)]


def random_payload(model):
    if model.name == "abelian":
        return rng.normal(size=model.n)
    if model.name == "s3":
        q = rng.normal(size=4)
        return q / np.linalg.norm(q)
    if model.name == "semidirect":
        return rng.normal(size=3)
    if model.name == "hn":
        g = rng.normal(size=model.n)
        g[-1] = np.exp(g[-1])
        return g
    raise AssertionError(model.name)


# =============================================================================
# Product laws
# =============================================================================

def test_hn_product_matches_closed_form():
    model = model_for(hn(2))
    a = np.array([1.0, 2.0])
    b = np.array([3.0, 4.0])
    assert np.allclose(model.multiply(a, b), [7.0, 8.0])


@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.catalog_tag)
def test_identity_and_inverse(alg):
    model = model_for(alg)
    e = GroupElement.identity(model)
    for _ in range(30):
        g = GroupElement(model, random_payload(model))
        assert np.allclose((g * e).payload, g.payload, atol=1e-12)
        assert np.allclose((e * g).payload, g.payload, atol=1e-12)
        assert np.allclose((g * g.inverse()).payload, e.payload, atol=1e-12)


@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.catalog_tag)
def test_associativity_random_triples(alg):
    model = model_for(alg)
    for _ in range(500):
        a, b, c = (random_payload(model) for _ in range(3))
        lhs = model.multiply(model.multiply(a, b), c)
        rhs = model.multiply(a, model.multiply(b, c))
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * max(1.0, np.max(np.abs(lhs)))


# =============================================================================
# Exponential
# =============================================================================

@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.catalog_tag)
def test_exp_zero_is_identity(alg):
    model = model_for(alg)
    assert np.allclose(group_exp(alg, np.zeros(model.n)).payload,
                       model.identity())


@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.catalog_tag)
def test_one_parameter_subgroup(alg):
    model = model_for(alg)
    for _ in range(40):
        v = rng.normal(size=model.n)
        st = rng.normal(size=2)
        lhs = group_exp(alg, v, st[0] + st[1]).payload
        rhs = model.multiply(group_exp(alg, v, st[0]).payload,
                             group_exp(alg, v, st[1]).payload)
        assert np.max(np.abs(lhs - rhs)) <= 1e-10


def test_s3_exp_e3_closed_form():
    # against a high-accuracy quaternion ODE integration q' = q * (e3/2-free)
    model = model_for(s3())
    v = np.array([0.0, 0.0, 1.0])
    for t in (0.3, 1.2, -0.8):
        got = group_exp(s3(), v, t).payload
        q = model.identity()
        m = 4096
        dt = t / m
        for _ in range(m):  # RK4 on q' = q * v (v constant pure quaternion)
            def f(q):
                return model.multiply(q, np.array([0.0, *v]))
            k1 = f(q)
            k2 = f(q + 0.5 * dt * k1)
            k3 = f(q + 0.5 * dt * k2)
            k4 = f(q + dt * k3)
            q = q + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            q /= np.linalg.norm(q)
        assert np.allclose(got, [np.cos(t), 0.0, 0.0, np.sin(t)], atol=1e-12)
        assert np.max(np.abs(q - got)) <= 1e-10


def test_semidirect_exp_series_oracle():
    # x-part of exp(w, s) must equal the series sum_k (sA)^k w / (k+1)!
    A = np.array([[0.3, -0.7], [0.5, 0.1]])
    alg = semidirect(A)
    for _ in range(20):
        v = rng.normal(size=3)
        got = group_exp(alg, v).payload
        w, sc = v[:2], v[2]
        M = sc * A
        acc = np.zeros((2, 2))
        powM = np.eye(2)
        fact = 1.0
        for k in range(60):
            acc += powM / (fact * (k + 1))
            powM = powM @ M
            fact *= (k + 1)
        want = np.concatenate([acc @ w, [sc]])
        assert np.max(np.abs(got - want)) <= 1e-12


@pytest.mark.parametrize("alg", ALGS, ids=lambda a: a.catalog_tag)
def test_log_inverts_exp(alg):
    model = model_for(alg)
    for _ in range(40):
        v = rng.normal(size=model.n) * 0.8
        g = group_exp(alg, v).payload
        assert np.max(np.abs(model.log(g) - v)) <= 1e-10


# =============================================================================
# Darboux integration
# =============================================================================

def constant_form(grid, alg, vx, vy):
    nx, ny = grid.shape
    return LieValuedOneForm(grid,
                            np.broadcast_to(vx, (nx, ny, len(vx))).copy(),
                            np.broadcast_to(vy, (nx, ny, len(vy))).copy())


def test_zero_form_gives_constant_map():
    alg = sol3()
    grid = ParamGrid(9, 9, 0.1)
    base = np.array([0.3, -0.2, 0.5])
    F = darboux_integrate(constant_form(grid, alg, np.zeros(3), np.zeros(3)),
                          alg, base)
    assert np.max(np.abs(F - base)) == 0.0


def test_abelian_line_integral():
    alg = rn(3)
    grid = ParamGrid(11, 7, 0.25)
    v = np.array([1.0, -2.0, 0.5])
    F = darboux_integrate(constant_form(grid, alg, v, np.zeros(3)), alg,
                          np.zeros(3))
    X, _ = grid.mesh()
    assert np.max(np.abs(F - X[..., None] * v)) <= 1e-12


def test_constant_form_on_s3_matches_group_exp():
    alg = s3()
    model = model_for(alg)
    grid = ParamGrid(33, 5, 0.05)
    v = np.array([0.4, -0.2, 0.9])
    base = random_payload(model)
    F = darboux_integrate(constant_form(grid, alg, v, np.zeros(3)), alg, base)
    for i in (5, 17, 32):
        want = model.multiply(base, group_exp(alg, v, i * grid.h).payload)
        assert np.max(np.abs(F[i, 0] - want)) <= 1e-12
        assert np.max(np.abs(F[i, 3] - want)) <= 1e-12  # zero y-component


def curved_map(alg, grid):
    """Non-separable test immersion F = exp(v(x, y)) sampled on the grid."""
    model = model_for(alg)
    X, Y = grid.mesh()
    v = np.stack([0.9 * X - 0.3 * Y + 0.8 * X * Y,
                  0.2 * X + 1.1 * Y - 0.5 * X * X,
                  -0.4 * X + 0.5 * Y + 0.6 * Y * Y], axis=-1)
    return model.exp(v)


def test_roundtrip_reconstruct_then_pullback():
    # pull back omega_G from an explicit non-separable F, integrate, and
    # compare to F: the error must shrink like h^2
    for alg in (s3(), sol3()):
        model = model_for(alg)
        errs = []
        for n_nodes in (17, 33):
            grid = ParamGrid(n_nodes, n_nodes, 1.0 / (n_nodes - 1))
            F = curved_map(alg, grid)
            xi_x, xi_y = maurer_cartan_pullback(F, model, grid)
            xi = LieValuedOneForm(grid, xi_x, xi_y)
            G = darboux_integrate(xi, alg, F[0, 0])
            errs.append(np.max(np.abs(G - F)))
        ratio = errs[0] / errs[1]
        assert 2.0 <= ratio <= 8.0  # O(h^2)
        assert errs[1] <= 5e-3


def test_left_invariance_exact_group_identity():
    alg = sol3()
    model = model_for(alg)
    grid = ParamGrid(9, 9, 0.125)
    xi_x = rng.normal(size=grid.shape + (3,)) * 0.3
    xi_y = rng.normal(size=grid.shape + (3,)) * 0.3
    xi = LieValuedOneForm(grid, xi_x, xi_y)
    base = random_payload(model)
    b = random_payload(model)
    F1 = darboux_integrate(xi, alg, base)
    new_base = model.multiply(b, base)
    F2 = darboux_integrate(xi, alg, new_base)
    want = left_translate(F1, model, b)
    assert np.max(np.abs(F2 - want)) <= 1e-10


def test_divergent_integration_reports_cell():
    alg = hn(3)
    grid = ParamGrid(5, 5, 1.0)
    v = np.array([0.0, 0.0, -2000.0])  # drives a_n to 0 through underflow
    xi = constant_form(grid, alg, np.zeros(3), v)
    with pytest.raises((IntegrationError, ValueError)):
        darboux_integrate(xi, alg, None)


# =============================================================================
# Structure equation
# =============================================================================

def test_structure_residual_zero_form():
    alg = sol3()
    grid = ParamGrid(9, 9, 0.1)
    xi = constant_form(grid, alg, np.zeros(3), np.zeros(3))
    assert np.max(structure_residual(xi, alg)) == 0.0


def test_structure_residual_abelian_is_curl():
    alg = rn(3)
    grid = ParamGrid(17, 17, 1.0 / 16)
    X, Y = grid.mesh()
    xi_x = np.stack([Y, X * 0, X * 0], axis=-1)   # not closed: curl = -1
    xi_y = np.zeros(grid.shape + (3,))
    xi = LieValuedOneForm(grid, xi_x, xi_y)
    res = structure_residual(xi, alg)
    assert np.max(np.abs(res - 1.0)) <= 1e-10


def test_structure_residual_refinement_on_exact_pullback():
    for alg in (s3(), sol3()):
        model = model_for(alg)
        res = []
        for n_nodes in (17, 33):
            grid = ParamGrid(n_nodes, n_nodes, 1.0 / (n_nodes - 1))
            a = np.array([0.9, 0.2, -0.4])
            b = np.array([-0.3, 1.1, 0.5])
            F = np.zeros(grid.shape + (model.payload_dim,))
            for i in range(grid.nx):
                ga = group_exp(alg, a, grid.xs()[i]).payload
                F[i] = model.multiply(
                    ga, np.stack([group_exp(alg, b, y).payload
                                  for y in grid.ys()]))
            xi_x, xi_y = maurer_cartan_pullback(F, model, grid)
            # the pullback itself carries an O(h^2) difference error, and the
            # structure residual of the exact form is another O(h^2)
            res.append(np.max(structure_residual(
                LieValuedOneForm(grid, xi_x, xi_y), alg)))
        ratio = res[0] / res[1]
        assert 2.5 <= ratio <= 6.5
