import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from hamlift.hamiltonian_flow import (
    BumpTruncation,
    ExtendedPoint,
    FlowDivergenceError,
    FlowMap,
    Hamiltonian,
    QuadraticHamiltonian,
    banyaga_reconstruct,
    compose_hamiltonians,
    conjugate_hamiltonian,
    extend_hamiltonian,
    extended_flow,
    flow,
    hamilton_vector_field,
    integrate_flow,
    integrate_variational,
    invert_hamiltonian,
    rescale_time,
    smooth_step,
    truncate_support,
)
from hamlift.phase_space import QuadraticGeneratingFunction, generating_to_symplectic, standard_symplectic
from hamlift.presets import PRESETS, driven_oscillator, free_particle, oscillator, pendulum, xxpp, zero

J = standard_symplectic(1).J


def rotation(t):
    # z' = J z for H = |z|^2 / 2
    return expm(t * J)


def run(H, z0, t, steps=1000, t_from=0.0, method="rk4"):
    return integrate_flow(FlowMap(H, t_from, t, steps, method), np.asarray(z0, dtype=float), keep=False).final


# vector field


def test_vector_field_oscillator():
    np.testing.assert_allclose(hamilton_vector_field(oscillator(), [1.0, 0.0]), [0.0, -1.0])


def test_vector_field_constant():
    H = Hamiltonian(lambda z, t: 3.0 + 0 * z[..., 0], 1)
    np.testing.assert_allclose(hamilton_vector_field(H, np.array([0.4, -2.0])), [0.0, 0.0], atol=1e-10)


def test_vector_field_momentum():
    np.testing.assert_allclose(hamilton_vector_field(PRESETS["zero"](), [1.0, 2.0]), [0, 0])
    from hamlift.presets import linear_momentum

    np.testing.assert_allclose(hamilton_vector_field(linear_momentum(), [0.3, 0.2]), [1.0, 0.0])


def test_vector_field_rejects_nan():
    H = Hamiltonian(lambda z, t: z[..., 0], 1, grad_func=lambda z, t: np.full(z.shape, np.nan))
    with pytest.raises(ValueError):
        hamilton_vector_field(H, [0.0, 0.0])


# flows


def test_oscillator_period():
    np.testing.assert_allclose(run(oscillator(), [1, 0], 2 * np.pi, 4000), [1, 0], atol=1e-8)


def test_oscillator_matches_rotation():
    z = run(oscillator(), [0.3, -0.8], 1.3)
    np.testing.assert_allclose(z, rotation(1.3) @ [0.3, -0.8], atol=1e-10)


def test_zero_hamiltonian_fixes_points():
    np.testing.assert_array_equal(run(zero(), [0.3, -0.8], 5.0, 10), [0.3, -0.8])


def test_free_flight():
    np.testing.assert_allclose(run(free_particle(), [0, 1], 1.0, 10), [1, 1], atol=1e-14)


def test_flow_helper_step_count():
    fm = flow(oscillator(), 1.0, dt=1e-2)
    assert fm.steps == 100 and fm.t_to == 1.0


def test_zero_length_interval_keeps_point():
    traj = integrate_flow(FlowMap(oscillator(), 0.5, 0.5, 10), [1.0, 2.0])
    assert traj.t.tolist() == [0.5]
    np.testing.assert_array_equal(traj.z, [[1.0, 2.0]])


def test_batch_flow():
    Z = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    out = run(oscillator(), Z, 0.9)
    np.testing.assert_allclose(out, Z @ rotation(0.9).T, atol=1e-10)


def test_flow_rejects_bad_input():
    with pytest.raises(ValueError):
        FlowMap(oscillator(), 0, 1, 0)
    with pytest.raises(ValueError):
        FlowMap(oscillator(), 0, 1, 10, method="euler")
    with pytest.raises(ValueError):
        FlowMap(driven_oscillator(), 0, 1, 10, method="symplectic_leapfrog")
    with pytest.raises(ValueError):
        run(oscillator(), [1.0, 0.0, 0.0, 0.0], 1.0)


def test_leapfrog_pendulum_energy():
    H = pendulum()
    traj = integrate_flow(FlowMap(H, 0, 20, 2000, "symplectic_leapfrog"), np.array([1.0, 0.0]))
    drift = np.max(np.abs(H(traj.z) - H(traj.z[0])))
    assert drift < 1e-3
    ref = run(H, [1.0, 0.0], 20.0, 8000)
    np.testing.assert_allclose(traj.final, ref, atol=5e-3)


def test_divergence_reported():
    with pytest.raises(FlowDivergenceError):
        run(xxpp(), [2.0, 2.0], 10.0, 4000)


@settings(max_examples=10)
@given(st.floats(-2, 2), st.floats(-2, 2), st.floats(0.1, 2.0), st.floats(0.1, 2.0))
def test_group_law(x, p, t, s):
    H = pendulum()
    a = run(H, run(H, [x, p], s, 400), t, 400)
    b = run(H, [x, p], t + s, 800)
    np.testing.assert_allclose(a, b, atol=1e-7)


def test_two_parameter_laws():
    H = driven_oscillator()
    z = np.array([0.4, -0.2])
    np.testing.assert_array_equal(run(H, z, 0.3, t_from=0.3), z)
    a = run(H, run(H, z, 0.5, 500, t_from=1.2), 0.0, 500, t_from=0.5)
    np.testing.assert_allclose(a, run(H, z, 0.0, 1000, t_from=1.2), atol=1e-7)
    back = run(H, run(H, z, 1.0, 1000, t_from=0.2), 0.2, 1000, t_from=1.0)
    np.testing.assert_allclose(back, z, atol=1e-7)


def test_vector_field_transformation_law(rng):
    # X_{H o s}(z) = s^-1 X_H(s z) for linear symplectic s
    s = generating_to_symplectic(QuadraticGeneratingFunction(0.3, -0.7, 0.5))
    H = pendulum()
    Hs = Hamiltonian(lambda z, t: H(z @ s.T, t), 1, grad_func=lambda z, t: H.grad(z @ s.T, t) @ s)
    Z = rng.normal(size=(20, 2))
    lhs = hamilton_vector_field(Hs, Z)
    rhs = hamilton_vector_field(H, Z @ s.T) @ np.linalg.inv(s).T
    np.testing.assert_allclose(lhs, rhs, atol=1e-9)


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_derivatives_match_finite_differences(name):
    H = PRESETS[name]()
    rng = np.random.default_rng(3)
    Z = rng.uniform(-1.5, 1.5, size=(8, 2))
    Z[0] = [3.5, 1.0]  # inside the truncation ramp
    t, h = 0.4, 1e-4
    eye = np.eye(2)
    g_fd = np.stack([(H(Z + h * e, t) - H(Z - h * e, t)) / (2 * h) for e in eye], axis=-1)
    np.testing.assert_allclose(H.grad(Z, t), g_fd, atol=1e-6)
    h_fd = np.stack([(H.grad(Z + h * e, t) - H.grad(Z - h * e, t)) / (2 * h) for e in eye], axis=-1)
    np.testing.assert_allclose(H.hess(Z, t), 0.5 * (h_fd + np.swapaxes(h_fd, -1, -2)), atol=1e-6)
    g, hs = H.jet(Z, t)
    np.testing.assert_allclose(g, H.grad(Z, t), atol=1e-12)
    np.testing.assert_allclose(hs, H.hess(Z, t), atol=1e-12)


def test_quadratic_hamiltonian_blocks():
    H = QuadraticHamiltonian.from_blocks(2.0, 0.5, 3.0)
    np.testing.assert_array_equal(H.M(), [[2.0, 0.5], [0.5, 3.0]])
    assert H([1.0, 1.0]) == pytest.approx(0.5 * (2 + 1 + 3))
    with pytest.raises(ValueError):
        QuadraticHamiltonian(np.array([[1.0, 2.0], [0.0, 1.0]]))


# variational equation


def test_variational_identity_at_zero_length():
    jt = integrate_variational(pendulum(), [0.5, 0.1], 1.0, 1.0, 10)
    np.testing.assert_array_equal(jt.S[-1], np.eye(2))


def test_variational_oscillator_is_rotation():
    t = 2.1
    jt = integrate_variational(oscillator(), [0.5, 0.1], 0.0, t, 2000)
    np.testing.assert_allclose(jt.S[-1], [[np.cos(t), np.sin(t)], [-np.sin(t), np.cos(t)]], atol=1e-10)


def test_variational_quadratic_matches_expm():
    M = np.array([[1.0, 0.3], [0.3, 0.5]])
    jt = integrate_variational(QuadraticHamiltonian(M), [1.0, 0.0], 0.0, 1.5, 2000, keep=False)
    np.testing.assert_allclose(jt.S[-1], expm(1.5 * J @ M), atol=1e-10)


@settings(max_examples=10)
@given(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_variational_symplectic_property(x, p):
    jt = integrate_variational(pendulum(), [x, p], 0.0, 3.0, 1500, keep=False)
    assert jt.symplectic_defect() < 1e-8


def test_variational_batch_shapes():
    Z = np.array([[1.0, 0.0], [0.0, 1.0], [0.2, 0.3]])
    jt = integrate_variational(pendulum(), Z, 0.0, 1.0, 100)
    assert jt.S.shape == (101, 3, 2, 2)
    single = integrate_variational(pendulum(), Z[1], 0.0, 1.0, 100)
    np.testing.assert_allclose(jt.S[-1, 1], single.S[-1], atol=1e-14)


def test_variational_jacobian_matches_finite_difference():
    H, t, h = pendulum(), 1.7, 1e-6
    z = np.array([0.8, 0.2])
    jt = integrate_variational(H, z, 0.0, t, 1000, keep=False)
    fd = np.stack([(run(H, z + h * e, t) - run(H, z - h * e, t)) / (2 * h) for e in np.eye(2)], axis=-1)
    np.testing.assert_allclose(jt.S[-1], fd, atol=1e-7)


# group operations


def test_compose_with_zero_is_h():
    H = oscillator()
    HK = compose_hamiltonians(H, zero())
    Z = np.array([[0.3, 0.4], [1.0, -1.0]])
    np.testing.assert_allclose(HK(Z, 0.6), H(Z), atol=1e-12)


def test_compose_free_with_free():
    HK = compose_hamiltonians(free_particle(), free_particle())
    Z = np.array([[0.3, 0.4], [1.0, -1.0]])
    np.testing.assert_allclose(HK(Z, 0.8), Z[:, 1] ** 2, atol=1e-12)
    np.testing.assert_allclose(run(HK, Z, 0.8, 40), Z + 0.8 * np.outer(2 * Z[:, 1], [1, 0]) * 1, atol=1e-10)


def test_compose_oscillator_shear():
    H, K, t = oscillator(), free_particle(), 0.7
    Z = np.random.default_rng(0).uniform(-1, 1, (10, 2))
    # closed form: shear first, then rotation
    ref = (Z @ np.array([[1, t], [0, 1]]).T) @ rotation(t).T
    np.testing.assert_allclose(run(compose_hamiltonians(H, K), Z, t, 70), ref, atol=1e-6)


def test_invert_examples():
    Z = np.array([[0.3, 0.4], [1.0, -1.0]])
    np.testing.assert_allclose(invert_hamiltonian(zero())(Z, 0.5), 0.0)
    np.testing.assert_allclose(invert_hamiltonian(free_particle())(Z, 0.5), -0.5 * Z[:, 1] ** 2, atol=1e-14)
    H = oscillator()
    back = run(H, run(invert_hamiltonian(H), Z, 1.0, 100), 1.0)
    np.testing.assert_allclose(back, Z, atol=1e-6)


def test_conjugate_examples():
    Z = np.array([[0.3, 0.4], [1.0, -1.0]])
    H = oscillator()
    np.testing.assert_allclose(conjugate_hamiltonian(H, np.eye(2))(Z), H(Z))
    Hx = QuadraticHamiltonian(np.diag([1.0, 0.0]))
    np.testing.assert_allclose(conjugate_hamiltonian(Hx, J)(Z), 0.5 * Z[:, 1] ** 2)
    with pytest.raises(ValueError):
        conjugate_hamiltonian(H, np.diag([2.0, 2.0]))


def test_conjugate_flow_identity():
    s = generating_to_symplectic(QuadraticGeneratingFunction(0.3, -0.7, 0.5))
    H = pendulum()
    Z = np.random.default_rng(2).uniform(-1, 1, (10, 2))
    lhs = run(H, Z @ np.linalg.inv(s).T, 0.9) @ s.T
    np.testing.assert_allclose(lhs, run(conjugate_hamiltonian(H, s), Z, 0.9), atol=1e-6)


def test_rescale_time():
    K = rescale_time(oscillator(), np.pi / 2)
    np.testing.assert_allclose(run(K, [1, 0], 1.0, 2000), [0, -1], atol=1e-10)
    np.testing.assert_allclose(run(rescale_time(free_particle(), 2.0), [0, 1], 1.0, 10), [2, 1], atol=1e-14)
    H = pendulum()
    np.testing.assert_allclose(rescale_time(H, 1.0)([0.3, 0.2], 0.1), H([0.3, 0.2]))


# Banyaga


def test_banyaga_identity_family():
    H0 = lambda z: np.sum(z ** 2, axis=-1)  # noqa: E731
    Hr = banyaga_reconstruct(lambda z, t: z, H0=H0)
    Z = np.array([[0.3, 0.4], [1.0, -1.0]])
    np.testing.assert_allclose(Hr(Z, 0.5), H0(Z), atol=1e-12)


def test_banyaga_rotation_family():
    fam = lambda z, t: z @ rotation(t).T  # noqa: E731
    Hr = banyaga_reconstruct(fam)
    r = np.linspace(-1.4, 1.4, 7)
    Z = np.stack(np.meshgrid(r, r), axis=-1).reshape(-1, 2)
    ref = 0.5 * np.sum(Z * Z, axis=-1)
    assert np.max(np.abs(Hr(Z, 0.4) - ref)) / np.max(ref) < 1e-4


def test_banyaga_shear_family():
    fam = lambda z, t: np.stack([z[..., 0] + t * z[..., 1], z[..., 1]], axis=-1)  # noqa: E731
    Hr = banyaga_reconstruct(fam)
    Z = np.array([[0.3, 0.4], [1.0, -1.0], [-1.2, 0.7]])
    np.testing.assert_allclose(Hr(Z, 0.3), 0.5 * Z[:, 1] ** 2, rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(run(Hr, Z, 1.0, 50), fam(Z, 1.0), atol=1e-4)


def test_banyaga_rejects_bad_input():
    # collapses the x axis at t = 1
    Hr = banyaga_reconstruct(lambda z, t: z * np.array([1.0 - t, 1.0]))
    with pytest.raises(ValueError):
        Hr(np.array([[1.0, 1.0]]), 1.0)
    with pytest.raises(ValueError):
        banyaga_reconstruct(lambda z, t: z, quad_nodes=4)


# extended phase space


def test_extended_point_layout():
    e = ExtendedPoint(np.array([1.0, 2.0]), 3.0, 4.0)
    np.testing.assert_array_equal(e.to_vector(), [1.0, 4.0, 2.0, 3.0])
    back = ExtendedPoint.from_vector(e.to_vector())
    assert back.t == 3.0 and back.E == 4.0


def test_extended_energy_constant_for_autonomous():
    end = extended_flow(oscillator(), ExtendedPoint(np.array([0.5, 0.5]), 0.0, 1.0), 2.0)
    assert end.E == pytest.approx(1.0, abs=1e-14)


def test_extended_energy_bookkeeping():
    H = driven_oscillator()
    z0, E0 = np.array([0.8, -0.3]), 0.25
    end = extended_flow(H, ExtendedPoint(z0, 0.0, E0), 1.0)
    zt = run(H, z0, 1.0)
    np.testing.assert_allclose(end.z, zt, atol=1e-10)
    assert abs(end.E - (E0 + H(zt, 1.0) - H(z0, 0.0))) < 1e-6


@pytest.mark.parametrize("t0,s", [(0.0, 1.0), (0.7, 2.5)])
def test_extended_time_advances_linearly(t0, s):
    end = extended_flow(driven_oscillator(), ExtendedPoint(np.array([0.1, 0.2]), t0, 0.0), s, steps=200)
    assert end.t == pytest.approx(t0 + s, abs=1e-12)


def test_extended_hamiltonian_value():
    Ht = extend_hamiltonian(driven_oscillator())
    v = ExtendedPoint(np.array([0.3, 0.4]), 0.5, 2.0).to_vector()
    assert Ht(v) == pytest.approx(driven_oscillator()([0.3, 0.4], 0.5) - 2.0)


# truncation


def test_smooth_step_limits():
    v, d = smooth_step(np.array([-1.0, 0.0, 1.0, 2.0]))
    np.testing.assert_array_equal(v, [1, 1, 0, 0])
    np.testing.assert_array_equal(d, 0)
    v, _ = smooth_step(np.array([0.5]))
    assert v[0] == pytest.approx(0.5)


def test_truncation_inside_and_outside():
    H = truncate_support(pendulum(), BumpTruncation(np.zeros(2), 1.0, 2.0))
    inside = np.array([[0.3, 0.4], [-0.5, 0.5]])
    outside = np.array([[3.0, 0.0], [-2.0, 2.0]])
    np.testing.assert_array_equal(H(inside), pendulum()(inside))
    np.testing.assert_array_equal(H(outside), 0.0)
    with pytest.raises(ValueError):
        BumpTruncation(np.zeros(2), 2.0, 1.0)


def test_truncated_xxpp_stays_finite():
    H = truncate_support(xxpp(), BumpTruncation(np.zeros(2), 2.0, 3.0))
    traj = integrate_flow(FlowMap(H, 0.0, 10.0, 4000), np.array([[2.0, 2.0], [1.0, 1.5], [0.5, 0.5]]))
    assert np.all(np.isfinite(traj.z))
    assert np.max(np.abs(traj.z)) < 10


def test_trajectory_csv_columns():
    from hamlift.io import read_csv, trajectory_csv

    traj = integrate_flow(FlowMap(oscillator(), 0.0, 1.0, 4), np.array([1.0, 0.0]))
    header, rows = read_csv(trajectory_csv(traj.t, traj.z, oscillator()(traj.z)))
    assert header == ["t", "x1", "p1", "E"]
    np.testing.assert_array_equal(rows[:, 1:3], traj.z)
