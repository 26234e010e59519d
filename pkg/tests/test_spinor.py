"""Killing transport, holonomy, xi, normalization, reconstruction, Dirac."""

import os

import numpy as np
import pytest

from spinorforge import fixtures, lie_algebra as la
from spinorforge.clifford import (
    Multivector, SpinElement, bivector_of_skew, exp_array, gp_array,
    reverse_array, vector_array, vector_part_array,
)
from spinorforge.grid import ParamGrid
from spinorforge.immersion import ImmersionData, ekt_gamma_bivector
from spinorforge.lie_group import structure_residual
from spinorforge.spinor import (
    KillingProblem, NotIntegrableError, SpinorField, connection_coefficient_fields,
    dirac_residual, killing_rhs, mean_curvature_vector, pair_dirac_residual,
    normalize_spinor, pair_to_phi, phi_from_psi_pair, phi_to_pair,
    psi_from_phi_pair, reconstruct_immersion, solve_killing,
    spinor_of_immersion, xi_from_spinor,
)

rng = np.random.default_rng(271828)


def random_spin(n):
    m = rng.normal(size=(n, n))
    return SpinElement(Multivector(n, exp_array(
        bivector_of_skew(m - m.T).coeffs, n)), tol=1e-9)


def flat_problem(n_nodes=9, n=3):
    grid = ParamGrid(n_nodes, n_nodes, 0.1)
    frames = np.broadcast_to(np.eye(n), grid.shape + (n, n)).copy()
    if n == 3:
        data = ImmersionData(grid, frames, S=np.zeros(grid.shape + (2, 2)))
    else:
        data = ImmersionData(grid, frames,
                             B=np.zeros(grid.shape + (2, 2, n - 2)))
    return KillingProblem(data, la.rn(n))


def analytic_problem(fx):
    """Problem seeded with the analytic spinor of the fixture's embedding."""
    afield, _ = spinor_of_immersion(fx.F, fx.alg, fx.grid)
    return KillingProblem(fx.data, fx.alg, base_spinor=afield.at((0, 0))), afield


# =============================================================================
# Right-hand side
# =============================================================================

def test_rhs_vanishes_for_flat_data():
    prob = flat_problem()
    phi = random_spin(3).value
    out = killing_rhs(prob, phi, [0.3, -0.7], (2, 2))
    assert out.allclose(Multivector.zero(3), tol=0.0)


def test_rhs_hypersurface_reduction():
    # sum_j e_j B(X, e_j) equals S(X) nu for q = 1, checked through the rhs
    grid = ParamGrid(3, 3, 0.5)
    frames = np.broadcast_to(np.eye(3), grid.shape + (3, 3)).copy()
    for _ in range(40):
        m = rng.normal(size=(2, 2))
        S = np.broadcast_to(0.5 * (m + m.T), grid.shape + (2, 2)).copy()
        data = ImmersionData(grid, frames, S=S)
        prob = KillingProblem(data, la.rn(3))
        X = rng.normal(size=2)
        phi = random_spin(3).value
        got = killing_rhs(prob, phi, X, (1, 1))
        SX = S[1, 1] @ X
        nu = Multivector.basis_vector(3, 2)
        want = (-0.5) * (Multivector.from_vector([SX[0], SX[1], 0.0], 3)
                         * nu * phi)
        assert got.allclose(want, tol=1e-12)


def test_rhs_matches_ekt_bivector_form():
    # on E(kappa, tau) data the connection part of the rhs is the reduced
    # bivector of the (T, f) picture
    kappa, tau = 1.3, 0.6
    data = fixtures.random_ekt_data(5, kappa, tau, seed=3)
    full = fixtures.ekt_frame_completion(data)
    prob = KillingProblem(full, la.e_kappa_tau(kappa, tau))
    for _ in range(20):
        X = rng.normal(size=2)
        v = (2, 3)
        phi = random_spin(3).value
        got = killing_rhs(prob, phi, X, v)
        SX = full.S[v] @ X
        nu = Multivector.basis_vector(3, 2)
        want = (-0.5) * (Multivector.from_vector([SX[0], SX[1], 0.0], 3) * nu
                         * phi) + 0.5 * (ekt_gamma_bivector(data, X, v) * phi)
        assert got.allclose(want, tol=1e-11)


# =============================================================================
# Transport
# =============================================================================

def test_flat_transport_is_constant():
    prob = flat_problem()
    field, report = solve_killing(prob)
    one = np.zeros(8)
    one[0] = 1.0
    assert np.max(np.abs(field.values - one)) <= 1e-14
    assert report["holonomy"] <= 1e-12
    assert report["integrable"]


@pytest.mark.parametrize("make", [fixtures.sphere_r3, fixtures.s3_sphere,
                                  fixtures.s3_equator, fixtures.sol3_plane,
                                  fixtures.h2xr_slice])
def test_solve_matches_analytic_spinor(make):
    devs = []
    for n in (17, 33):
        fx = make(n)
        prob, afield = analytic_problem(fx)
        field, report = solve_killing(prob)
        assert report["integrable"]
        devs.append(np.max(np.linalg.norm(field.values - afield.values,
                                          axis=-1)))
    assert 2.5 <= devs[0] / devs[1] <= 6.5
    assert devs[1] <= 2e-3


def test_holonomy_order_and_breakage():
    hol = []
    for n in (17, 33):
        fx = fixtures.sphere_r3(n)
        _, rep = solve_killing(KillingProblem(fx.data, fx.alg))
        hol.append(rep["holonomy"])
        assert rep["integrable"]
    assert 2.8 <= hol[0] / hol[1] <= 5.2
    for n in (17, 33, 65):
        fx = fixtures.sphere_r3(n, codazzi_eps=1e-2)
        _, rep = solve_killing(KillingProblem(fx.data, fx.alg))
        assert rep["holonomy"] > 1e-3


def test_threaded_columns_match_serial():
    fx = fixtures.sphere_r3(17)
    prob = KillingProblem(fx.data, fx.alg)
    serial, _ = solve_killing(prob)
    os.environ["SPINORFORGE_THREADS"] = "3"
    try:
        threaded, _ = solve_killing(prob)
    finally:
        os.environ.pop("SPINORFORGE_THREADS")
    assert np.array_equal(serial.values, threaded.values)


# =============================================================================
# xi
# =============================================================================

def test_xi_of_identity_spinor_is_frame_map():
    prob = flat_problem()
    one = np.zeros(prob.grid.shape + (8,))
    one[..., 0] = 1.0
    field = SpinorField(prob.grid, 3, one)
    xi, normals = xi_from_spinor(field, prob)
    assert np.max(np.abs(xi.xi_x - np.array([1.0, 0, 0]))) <= 1e-15
    assert np.max(np.abs(xi.xi_y - np.array([0, 1.0, 0]))) <= 1e-15
    assert np.max(np.abs(normals[..., 0, :] - np.array([0, 0, 1.0]))) <= 1e-15


def random_unit_field(grid, n):
    vals = np.zeros(grid.shape + (1 << n,))
    for i in range(grid.nx):
        for j in range(grid.ny):
            vals[i, j] = random_spin(n).value.coeffs
    return SpinorField(grid, n, vals)


def test_xi_grade_purity_and_norm_preservation():
    grid = ParamGrid(4, 4, 0.5)
    for n in (3, 4):
        frames = np.broadcast_to(np.eye(n), grid.shape + (n, n)).copy()
        if n == 3:
            data = ImmersionData(grid, frames, S=np.zeros(grid.shape + (2, 2)))
        else:
            data = ImmersionData(grid, frames,
                                 B=np.zeros(grid.shape + (2, 2, n - 2)))
        prob = KillingProblem(data, la.rn(n))
        field = random_unit_field(grid, n)
        xi, normals = xi_from_spinor(field, prob)  # purity enforced inside
        assert np.max(np.abs(np.linalg.norm(xi.xi_x, axis=-1) - 1.0)) <= 1e-8
        assert np.max(np.abs(np.linalg.norm(normals, axis=-1) - 1.0)) <= 1e-8


def test_xi_component_formula_dim3():
    # the complex-pair component formula agrees with the Clifford product
    for _ in range(200):
        g = random_spin(3).value.coeffs
        z1, z2 = phi_to_pair(g)
        X = rng.normal(size=3)
        out = gp_array(gp_array(reverse_array(g, 3), vector_array(X, 3), 3), g, 3)
        got = vector_part_array(out, 3)
        x1, x2, x3 = X
        xi3 = 2 * x1 * np.imag(z1 * np.conj(z2)) \
            - 2 * x2 * np.real(z1 * np.conj(z2)) \
            + x3 * (abs(z1) ** 2 - abs(z2) ** 2)
        beta = x1 * (z1 ** 2 + z2 ** 2) - 1j * x2 * (z1 ** 2 - z2 ** 2) \
            - 2j * x3 * z1 * z2
        want = np.array([np.real(beta), -np.imag(beta), xi3])
        assert np.max(np.abs(got - want)) <= 1e-12


def test_xi_equivariance_under_right_action():
    fx = fixtures.s3_sphere(5)
    prob, afield = analytic_problem(fx)
    xi0, _ = xi_from_spinor(afield, prob)
    for _ in range(100):
        a = random_spin(3)
        xia, _ = xi_from_spinor(afield.right_multiplied(a), prob)
        Ad_inv = a.inverse().adjoint_matrix()
        want = np.einsum("ij,xyj->xyi", Ad_inv, xi0.xi_x)
        assert np.max(np.abs(xia.xi_x - want)) <= 1e-10


def test_xi_sign_invariance():
    fx = fixtures.sphere_r3(5)
    prob, afield = analytic_problem(fx)
    xi0, _ = xi_from_spinor(afield, prob)
    minus = SpinorField(afield.grid, 3, -afield.values)
    xi1, _ = xi_from_spinor(minus, prob)
    assert np.array_equal(xi0.xi_x, xi1.xi_x)
    assert np.array_equal(xi0.xi_y, xi1.xi_y)


def test_xi_corruption_detected():
    prob = flat_problem(5)
    vals = np.zeros(prob.grid.shape + (8,))
    vals[..., 0] = 1.0
    field = SpinorField(prob.grid, 3, vals)
    field.values.flags.writeable = True
    field.values[2, 2, 0b001] = 0.3   # vector junk past validation
    with pytest.raises(ValueError):
        xi_from_spinor(field, prob)


# =============================================================================
# Normalization
# =============================================================================

def test_normalize_roundtrip_recovers_xi():
    fx = fixtures.s3_sphere(9)
    prob, afield = analytic_problem(fx)
    base = normalize_spinor(afield, prob)
    xi_base, _ = xi_from_spinor(base, prob)
    for _ in range(10):
        scrambled = afield.right_multiplied(random_spin(3))
        renorm = normalize_spinor(scrambled, prob)
        xi_re, _ = xi_from_spinor(renorm, prob)
        assert np.max(np.abs(xi_re.xi_x - xi_base.xi_x)) <= 1e-9
        assert np.max(np.abs(xi_re.xi_y - xi_base.xi_y)) <= 1e-9


def test_normalized_xi_matches_frame_map_at_base():
    fx = fixtures.sol3_plane(9)
    prob, _ = analytic_problem(fx)
    field, _ = solve_killing(prob)
    field = normalize_spinor(field, prob)
    from spinorforge.spinor import frame_map_at
    T = frame_map_at(field, prob, (0, 0))
    assert np.max(np.abs(T - np.eye(3))) <= 1e-10


def test_normalized_structure_residual_quadratic():
    res = []
    for n in (17, 33):
        fx = fixtures.s3_sphere(n)
        prob, _ = analytic_problem(fx)
        field, _ = solve_killing(prob)
        field = normalize_spinor(field, prob)
        xi, _ = xi_from_spinor(field, prob)
        res.append(np.max(structure_residual(xi, prob.alg)))
    assert 2.5 <= res[0] / res[1] <= 6.5


# =============================================================================
# Reconstruction
# =============================================================================

def test_flat_plane_reconstruction_exact():
    prob = flat_problem(9)
    F, _, report = reconstruct_immersion(prob)
    X, Y = prob.grid.mesh()
    want = np.stack([X, Y, np.zeros_like(X)], axis=-1)
    assert np.max(np.abs(F - want)) <= 1e-12
    assert report["isometry_error"] <= 1e-10
    assert report["second_fundamental_error"] <= 1e-10


@pytest.mark.parametrize("make", [fixtures.sphere_r3, fixtures.s3_sphere,
                                  fixtures.s3_equator, fixtures.sol3_plane,
                                  fixtures.h2xr_slice])
def test_reconstruction_recovers_fixture(make):
    for n in (17, 33):
        fx = make(n)
        prob, _ = analytic_problem(fx)
        F, _, report = reconstruct_immersion(prob, base_point=fx.F[0, 0])
        bound = 5 * fx.grid.h ** 2
        assert np.max(np.linalg.norm(F - fx.F, axis=-1)) <= bound
        assert report["isometry_error"] <= bound
        assert report["second_fundamental_error"] <= bound


def test_reconstruction_q2_twisted_sphere():
    fx = fixtures.sphere_r4_twisted(17)
    prob, _ = analytic_problem(fx)
    F, _, report = reconstruct_immersion(prob, base_point=fx.F[0, 0])
    bound = 5 * fx.grid.h ** 2
    assert np.max(np.linalg.norm(F - fx.F, axis=-1)) <= bound
    assert report["second_fundamental_error"] <= bound
    assert report["normal_connection_error"] <= bound


def test_not_integrable_raises():
    fx = fixtures.sphere_r3(17, codazzi_eps=1e-2)
    prob = KillingProblem(fx.data, fx.alg)
    with pytest.raises(NotIntegrableError):
        reconstruct_immersion(prob)
    # non-strict mode still returns the flagged report
    F, _, report = reconstruct_immersion(prob, strict=False)
    assert not report["integrable"]


# =============================================================================
# Converse
# =============================================================================

def test_identity_chart_gives_constant_spinor():
    grid = ParamGrid(9, 9, 0.1)
    X, Y = grid.mesh()
    F = np.stack([X, Y, np.zeros_like(X)], axis=-1)
    field, data = spinor_of_immersion(F, la.rn(3), grid)
    one = np.zeros(8)
    one[0] = 1.0
    dev = min(np.max(np.abs(field.values - one)),
              np.max(np.abs(field.values + one)))
    assert dev <= 1e-12
    assert np.max(np.abs(data.S)) <= 1e-10
    assert np.max(np.abs(data.grid.mu - 1.0)) <= 1e-12


def test_sphere_extraction_recovers_shape_operator():
    devs = []
    for n in (17, 33):
        fx = fixtures.sphere_r3(n, radius=0.8)
        _, data = spinor_of_immersion(fx.F, fx.alg, fx.grid)
        devs.append(np.max(np.abs(data.S - fx.data.S)))
    assert 2.5 <= devs[0] / devs[1] <= 6.5
    assert devs[1] <= 5e-3


def test_sol3_plane_extraction_matches_analytic_frames():
    fx = fixtures.sol3_plane(17)
    field, data = spinor_of_immersion(fx.F, fx.alg, fx.grid)
    h2 = fx.grid.h ** 2
    # constant frame directions come out exactly; mu and S carry the O(h^2)
    # truncation of the log differences
    assert np.max(np.abs(data.frames - fx.data.frames)) <= 1e-12
    assert np.max(np.abs(data.S)) <= 5 * h2
    assert np.max(np.abs(data.grid.mu - fx.grid.mu)) <= 5 * h2


def test_extracted_spinor_satisfies_killing_equation():
    devs = []
    for n in (17, 33):
        fx = fixtures.s3_sphere(n)
        field, _ = spinor_of_immersion(fx.F, fx.alg, fx.grid)
        prob = KillingProblem(fx.data, fx.alg)
        ex, ey = connection_coefficient_fields(prob)
        rx = fx.grid.dx(field.values) - gp_array(ex, field.values, 3)
        ry = fx.grid.dy(field.values) - gp_array(ey, field.values, 3)
        devs.append(max(np.max(np.abs(rx)), np.max(np.abs(ry))))
    assert 2.5 <= devs[0] / devs[1] <= 6.5


def test_roundtrip_up_to_rigid_motion():
    # reconstruct from data with an arbitrary base spinor / base point, then
    # extract data back: the geometry must agree to O(h^2) even though the
    # two immersions differ by a rigid motion
    fx = fixtures.s3_sphere(17)
    a = random_spin(3)
    prob = KillingProblem(fx.data, fx.alg, base_spinor=a)
    F, _, _ = reconstruct_immersion(prob)
    field2, data2 = spinor_of_immersion(F, fx.alg, fx.grid)
    h2 = fx.grid.h ** 2
    assert np.max(np.abs(data2.grid.mu - fx.grid.mu)) <= 5 * h2
    assert np.max(np.abs(data2.S - fx.data.S)) <= 10 * h2


def test_degenerate_immersion_rejected():
    grid = ParamGrid(5, 5, 0.25)
    F = np.zeros(grid.shape + (3,))   # constant map, F_* = 0
    with pytest.raises(ValueError):
        spinor_of_immersion(F, la.rn(3), grid)


def test_nonconformal_rejected():
    grid = ParamGrid(9, 9, 0.1)
    X, Y = grid.mesh()
    F = np.stack([X, 2.0 * Y, np.zeros_like(X)], axis=-1)
    with pytest.raises(ValueError):
        spinor_of_immersion(F, la.rn(3), grid)


# =============================================================================
# Dirac
# =============================================================================

def test_pair_dictionary_roundtrips():
    for _ in range(30):
        g = random_spin(3).value.coeffs
        z1, z2 = phi_to_pair(g)
        assert np.max(np.abs(pair_to_phi(z1, z2) - g)) == 0.0
        p, q = psi_from_phi_pair(z1, z2)
        w1, w2 = phi_from_psi_pair(p, q)
        assert abs(w1 - z1) == 0.0 and abs(w2 - z2) == 0.0


def test_killing_solution_satisfies_dirac():
    devs = []
    for n in (17, 33):
        fx = fixtures.s3_sphere(n)
        prob, afield = analytic_problem(fx)
        res = dirac_residual(afield, prob)
        devs.append(np.max(res))
    assert 2.5 <= devs[0] / devs[1] <= 6.5


def test_random_field_fails_dirac():
    fx = fixtures.s3_sphere(9)
    prob, _ = analytic_problem(fx)
    field = random_unit_field(fx.grid, 3)
    assert np.max(dirac_residual(field, prob)) >= 0.5


def test_equator_pair_dirac_residual_quadratic():
    devs = []
    for n in (17, 33):
        fx = fixtures.s3_equator(n)
        prob, afield = analytic_problem(fx)
        devs.append(np.max(pair_dirac_residual(afield, prob, H=0.0)))
        # the pair picture evaluates the same operator as the Clifford one
        assert abs(devs[-1] - np.max(dirac_residual(afield, prob))) <= 1e-10
    assert 2.5 <= devs[0] / devs[1] <= 6.5


def test_mean_curvature_vector():
    fx = fixtures.sphere_r3(5, radius=2.0)
    H = mean_curvature_vector(fx.data)
    assert np.max(np.abs(H - 0.5)) <= 1e-12
