import math

import numpy as np
import pytest
import scipy.sparse.linalg as spla

from shapeopt.errors import DegenerateInput, EllipticityViolation, InputError
from shapeopt.expr import CoefficientField
from shapeopt.fem import assemble, eigenvalues, integral_functional, load_vector, solve_source, subspace_eigs
from shapeopt.geometry import Box, polygon_from_vertices, regular_polygon, scale_about
from shapeopt.mesh import triangulate

SQUARE = polygon_from_vertices([(0, 0), (1, 0), (1, 1), (0, 1)])
LAPLACE = CoefficientField.laplacian()
DISK = regular_polygon(256, 1.0)


@pytest.fixture(scope="module")
def square_mesh():
    return triangulate(SQUARE, 0.04)


@pytest.fixture(scope="module")
def disk_solution():
    return solve_source(DISK, LAPLACE, "1", 0.05)


def test_mass_matrix_integrates_hat_functions(square_mesh):
    asm = assemble(square_mesh, LAPLACE)
    # int phi_i dx = (1/3) * sum of adjacent triangle areas
    ones = np.ones(square_mesh.dof)
    lumped = asm.mass @ ones
    tri, areas = square_mesh.triangles, square_mesh.areas
    expected = np.zeros(len(square_mesh.nodes))
    for k in range(3):
        np.add.at(expected, tri[:, k], areas / 3)
    # the mass row sum misses the boundary neighbours, so it is a lower bound
    assert np.all(lumped <= expected[square_mesh.n_boundary:] + 1e-15)
    assert np.allclose(asm.mass.toarray(), asm.mass.toarray().T)


def test_stiffness_is_spd(square_mesh):
    K = assemble(square_mesh, LAPLACE).stiffness
    assert abs(K - K.T).max() < 1e-12
    x = np.random.default_rng(0).standard_normal(K.shape[0])
    assert x @ (K @ x) > 0


def test_square_spectrum_separation_of_variables():
    spectrum = eigenvalues(SQUARE, LAPLACE, 3, 0.04)
    exact = np.array([2, 5, 5]) * math.pi**2
    assert np.all(np.abs(np.array(spectrum.eigenvalues) / exact - 1) < 0.01)
    # P1 eigenvalues approximate from above
    assert np.all(np.array(spectrum.eigenvalues) > exact)


def test_subspace_iteration_matches_scipy(square_mesh):
    asm = assemble(square_mesh, LAPLACE)
    vals, vecs, _ = subspace_eigs(asm.stiffness, asm.mass, 4)
    ref = np.sort(spla.eigsh(asm.stiffness, k=4, M=asm.mass, sigma=0, which="LM")[0])
    np.testing.assert_allclose(vals, ref, rtol=1e-9)
    # eigenvectors are M-orthonormal and satisfy the pencil
    G = vecs.T @ (asm.mass @ vecs)
    np.testing.assert_allclose(G, np.eye(4), atol=1e-8)
    r = asm.stiffness @ vecs - (asm.mass @ vecs) * vals
    assert np.abs(r).max() < 1e-6 * vals.max()


def test_eigenvalues_reproducible(square_mesh):
    a = eigenvalues(SQUARE, LAPLACE, 3, 0.04, mesh=square_mesh)
    b = eigenvalues(SQUARE, LAPLACE, 3, 0.04, mesh=square_mesh)
    assert a.eigenvalues == b.eigenvalues


def test_zero_order_shift(square_mesh):
    a = eigenvalues(SQUARE, LAPLACE, 3, 0.04, mesh=square_mesh)
    b = eigenvalues(SQUARE, CoefficientField.laplacian("1"), 3, 0.04, mesh=square_mesh)
    np.testing.assert_allclose(np.array(b.eigenvalues), np.array(a.eigenvalues) + 1, rtol=1e-6)


def test_anisotropic_constant_coefficients(square_mesh):
    # -(u_xx + 4 u_yy): lambda_{mn} = pi^2 (m^2 + 4 n^2)
    spectrum = eigenvalues(SQUARE, CoefficientField("1", "0", "4"), 2, 0.04, mesh=square_mesh)
    exact = np.array([5, 8]) * math.pi**2
    np.testing.assert_allclose(spectrum.eigenvalues, exact, rtol=0.01)


def test_scaled_coefficient_scales_spectrum(square_mesh):
    a = eigenvalues(SQUARE, LAPLACE, 2, 0.04, mesh=square_mesh)
    b = eigenvalues(SQUARE, CoefficientField("3", "0", "3"), 2, 0.04, mesh=square_mesh)
    np.testing.assert_allclose(b.eigenvalues, 3 * np.array(a.eigenvalues), rtol=1e-9)


def test_homogeneity_of_degree_minus_two():
    small = eigenvalues(SQUARE, LAPLACE, 1, 0.04)[0]
    big = eigenvalues(scale_about(SQUARE, (0, 0), 2.0), LAPLACE, 1, 0.08)[0]
    assert big * 4 == pytest.approx(small, rel=1e-9)  # identical meshes up to scaling


def test_eigen_preconditions():
    with pytest.raises(InputError):
        eigenvalues(SQUARE, LAPLACE, 0, 0.1)
    with pytest.raises(DegenerateInput):
        eigenvalues(SQUARE, LAPLACE, 60, 0.2)
    with pytest.raises(EllipticityViolation):
        eigenvalues(SQUARE, CoefficientField("1", "1", "1"), 1, 0.1)
    with pytest.raises(EllipticityViolation):
        eigenvalues(SQUARE, CoefficientField("x1 - 2", "0", "1"), 1, 0.1, box=Box((0, 0), (4, 4)))


def test_spectrum_json(square_mesh):
    spectrum = eigenvalues(SQUARE, LAPLACE, 2, 0.04, mesh=square_mesh)
    out = spectrum.to_json()
    assert set(out) == {"eigenvalues", "h", "dof"}
    assert out["dof"] == square_mesh.dof


def test_torsion_on_disk(disk_solution):
    assert disk_solution.max_value() == pytest.approx(0.25, rel=0.01)
    assert integral_functional(disk_solution, "u") == pytest.approx(math.pi / 8, rel=0.01)
    assert disk_solution.residual <= 1e-10
    # boundary values are exactly zero
    assert np.all(disk_solution.u[: disk_solution.mesh.n_boundary] == 0.0)


def test_torsion_nodal_values_match_parabola(disk_solution):
    r2 = np.sum(disk_solution.mesh.nodes**2, axis=1)
    exact = (1 - r2) / 4
    # the polygon is slightly smaller than the disk, hence the offset allowance
    assert np.abs(disk_solution.u - exact).max() < 5e-3


def test_energy_identity(disk_solution):
    energy = integral_functional(disk_solution, "ux*ux+uy*uy")
    work = integral_functional(disk_solution, "u")
    assert energy == pytest.approx(work, rel=0.015)
    # the discrete Galerkin identity holds to roundoff
    assert disk_solution.energy == pytest.approx(disk_solution.work, rel=1e-10)


def test_integral_of_one_is_area(disk_solution):
    assert integral_functional(disk_solution, "1") == pytest.approx(DISK.area, rel=1e-12)


def test_zero_source_gives_zero():
    sol = solve_source(SQUARE, LAPLACE, "0", 0.1)
    assert np.all(sol.u == 0.0)


def test_galerkin_orthogonality(square_mesh):
    coeff = CoefficientField("1+0.5*x1*x1", "0.1", "2", "x2")
    asm = assemble(square_mesh, coeff)
    F = load_vector(asm, CoefficientField.laplacian("sin(x1)").c0)
    sol = solve_source(SQUARE, coeff, "sin(x1)", 0.04, mesh=square_mesh)
    r = asm.stiffness @ sol.u[square_mesh.n_boundary:] - F
    assert np.linalg.norm(r) <= 1e-10 * np.linalg.norm(F)


def test_source_rejects_u_dependence():
    with pytest.raises(InputError):
        solve_source(SQUARE, LAPLACE, "u", 0.1)


def test_csv_export():
    sol = solve_source(SQUARE, LAPLACE, "1", 0.2)
    lines = sol.to_csv().splitlines()
    assert lines[0] == "x,y,u"
    assert len(lines) == len(sol.mesh.nodes) + 1
