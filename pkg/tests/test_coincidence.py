import numpy as np
import pytest

from mixedbvp import (
    BoundaryCondition,
    GridFunction,
    KernelElement,
    NotInImageError,
    SampledDensity,
    boundary_defect,
    image_defect,
    iso_J,
    kernel_embed,
    kernel_parameter,
    make_grid,
    project_P,
    project_Q,
    right_inverse_KP,
)

from conftest import ALL_BCS, random_smooth

BC1, BC2, BC3 = BoundaryCondition.BC1, BoundaryCondition.BC2, BoundaryCondition.BC3


def gridfn(grid, u, du):
    return GridFunction(grid, u(grid.nodes), du(grid.nodes))


class TestKernelEmbed:
    def test_bc1_affine_ray(self):
        g = make_grid(1.0, 8)
        ke = kernel_embed(KernelElement(2.0, BC1), g)
        assert np.allclose(ke.u, 2.0 + 2.0 * g.nodes, atol=0)
        assert np.all(ke.du == 2.0)

    def test_bc2_linear_ray(self):
        g = make_grid(1.0, 8)
        ke = kernel_embed(KernelElement(-1.0, BC2), g)
        assert np.allclose(ke.u, -g.nodes, atol=0)
        assert np.all(ke.du == -1.0)

    def test_bc3_constant_ray(self):
        g = make_grid(1.0, 8)
        ke = kernel_embed(KernelElement(5.0, BC3), g)
        assert np.all(ke.u == 5.0)
        assert np.all(ke.du == 0.0)

    def test_boundary_rows_vanish(self, bc):
        g = make_grid(1.7, 12)
        ke = kernel_embed(KernelElement(3.25, bc), g)
        assert boundary_defect(ke, bc) <= 1e-14

    def test_kernel_elements_are_P_fixed(self, bc):
        g = make_grid(1.0, 16)
        ke = kernel_embed(KernelElement(-0.75, bc), g)
        pke = project_P(ke, bc)
        assert np.max(np.abs(pke.u - ke.u)) <= 1e-14
        assert np.max(np.abs(pke.du - ke.du)) <= 1e-14


class TestImageDefect:
    def test_bc1_constant(self):
        g = make_grid(1.0, 10)
        w = SampledDensity(g, np.full(g.n + 1, 3.0))
        assert image_defect(w, BC1) == pytest.approx(3.0, abs=1e-14)

    def test_bc3_constant(self):
        g = make_grid(1.0, 10)
        w = SampledDensity(g, np.ones(g.n + 1))
        assert image_defect(w, BC3) == pytest.approx(0.5, abs=1e-14)

    def test_bc3_cosine_is_in_image(self):
        g = make_grid(1.0, 1000)
        w = SampledDensity(g, np.cos(2 * np.pi * g.nodes))
        assert abs(image_defect(w, BC3)) <= 1e-8


class TestProjectP:
    def test_bc1_square(self):
        g = make_grid(1.0, 50)
        u = gridfn(g, lambda t: t**2, lambda t: 2 * t)
        pu = project_P(u, BC1)
        assert np.allclose(pu.u, 1.0 + g.nodes, atol=1e-14)

    def test_bc2_sine(self):
        g = make_grid(1.0, 50)
        u = gridfn(g, np.sin, np.cos)
        pu = project_P(u, BC2)
        assert np.allclose(pu.u, g.nodes, atol=1e-14)

    def test_bc3_mean_of_identity(self):
        g = make_grid(1.0, 50)
        u = gridfn(g, lambda t: t, lambda t: np.ones_like(t))
        pu = project_P(u, BC3)
        assert np.allclose(pu.u, 0.5, atol=1e-14)

    def test_idempotent(self, bc):
        rng = np.random.default_rng(11)
        g = make_grid(1.0, 200)
        u = GridFunction(g, random_smooth(rng, g), random_smooth(rng, g))
        once = project_P(u, bc)
        twice = project_P(once, bc)
        scale = max(1.0, once.sup_norm)
        assert np.max(np.abs(twice.u - once.u)) <= 1e-12 * scale


class TestProjectQ:
    def test_bc1_fixes_constants(self):
        g = make_grid(1.0, 10)
        assert project_Q(SampledDensity(g, np.full(g.n + 1, 3.0)), BC1) == pytest.approx(3.0)

    def test_bc3_fixes_constants_any_horizon(self):
        g = make_grid(2.7, 64)
        c = -1.3
        assert project_Q(SampledDensity(g, np.full(g.n + 1, c)), BC3) == pytest.approx(c, abs=1e-13)

    def test_bc2_mean_zero_sine(self):
        g = make_grid(1.0, 100)
        w = SampledDensity(g, np.sin(2 * np.pi * g.nodes))
        assert abs(project_Q(w, BC2)) <= 1e-8

    def test_idempotent_on_constant_embedding(self, bc):
        rng = np.random.default_rng(5)
        g = make_grid(1.0, 128)
        w = SampledDensity(g, random_smooth(rng, g))
        q = project_Q(w, bc)
        again = project_Q(SampledDensity(g, np.full(g.n + 1, q)), bc)
        assert again == pytest.approx(q, abs=1e-10)

    def test_complement_lands_in_image(self, bc):
        rng = np.random.default_rng(17)
        g = make_grid(1.0, 300)
        w = random_smooth(rng, g)
        q = project_Q(SampledDensity(g, w), bc)
        defect = image_defect(SampledDensity(g, w - q), bc)
        assert abs(defect) <= 1e-8 * max(1.0, np.max(np.abs(w)))


class TestRightInverse:
    def test_zero_maps_to_zero(self, bc):
        g = make_grid(1.0, 32)
        out = right_inverse_KP(SampledDensity(g, np.zeros(g.n + 1)), bc)
        assert np.array_equal(out.u, np.zeros(g.n + 1))
        assert np.array_equal(out.du, np.zeros(g.n + 1))

    def test_bc2_sine_closed_form(self):
        g = make_grid(1.0, 1000)
        s = g.nodes
        w = SampledDensity(g, np.sin(2 * np.pi * s))
        out = right_inverse_KP(w, BC2)
        exact = -(s - np.sin(2 * np.pi * s) / (2 * np.pi)) / (2 * np.pi)
        assert np.max(np.abs(out.u - exact)) <= 1e-6

    def test_bc1_sine_closed_form(self):
        g = make_grid(1.0, 1000)
        s = g.nodes
        w = SampledDensity(g, np.sin(2 * np.pi * s))
        out = right_inverse_KP(w, BC1)
        exact = 1.0 / (2 * np.pi) + np.sin(2 * np.pi * s) / (4 * np.pi**2)
        assert np.max(np.abs(out.u - exact)) <= 1e-6
        edge = 1.0 / (2 * np.pi)
        for val in (out.du[0], out.du[-1], out.u[0], out.u[-1]):
            assert val == pytest.approx(edge, abs=1e-6)

    def test_bc3_shifted_sine_closed_form(self):
        # wc = sin(2 pi t) - 1/pi has vanishing iterated integral; the unique
        # mean-zero preimage is 1/(12 pi) - s/(2 pi) + sin(2 pi s)/(4 pi^2) + s^2/(2 pi).
        g = make_grid(1.0, 1000)
        s = g.nodes
        w = SampledDensity(g, np.sin(2 * np.pi * s) - 1.0 / np.pi)
        out = right_inverse_KP(w, BC3)
        exact = (
            1.0 / (12 * np.pi)
            - s / (2 * np.pi)
            + np.sin(2 * np.pi * s) / (4 * np.pi**2)
            + s**2 / (2 * np.pi)
        )
        assert np.max(np.abs(out.u - exact)) <= 1e-6

    def test_second_difference_reproduces_density(self, bc):
        g = make_grid(1.0, 1000)
        h = g.h
        for fn in (lambda t: np.sin(2 * np.pi * t), lambda t: np.cos(2 * np.pi * t)):
            w = fn(g.nodes)
            q = project_Q(SampledDensity(g, w), bc)
            wc = SampledDensity(g, w - q)
            out = right_inverse_KP(wc, bc)
            d2 = np.diff(out.u, 2) / h**2
            assert np.max(np.abs(-d2 - wc.w[1:-1])) <= 10.0 * h**2

    def test_boundary_defect_second_order(self, bc):
        rng = np.random.default_rng(23)
        for n in (100, 200):
            g = make_grid(1.0, n)
            w = random_smooth(rng, g)
            q = project_Q(SampledDensity(g, w), bc)
            out = right_inverse_KP(SampledDensity(g, w - q), bc)
            assert boundary_defect(out, bc) <= 50.0 * g.h**2

    def test_lands_in_ker_P(self, bc):
        rng = np.random.default_rng(29)
        g = make_grid(1.0, 400)
        w = random_smooth(rng, g)
        q = project_Q(SampledDensity(g, w), bc)
        out = right_inverse_KP(SampledDensity(g, w - q), bc)
        assert abs(kernel_parameter(out, bc)) <= 1e-10

    def test_not_in_image_raises(self):
        g = make_grid(1.0, 100)
        w = SampledDensity(g, np.ones(g.n + 1))
        with pytest.raises(NotInImageError) as err:
            right_inverse_KP(w, BC1)
        assert err.value.defect == pytest.approx(1.0, abs=1e-12)


class TestIsoJ:
    def test_zero(self, bc):
        assert iso_J(0.0, bc).a == 0.0

    def test_bc1_embedding(self):
        g = make_grid(1.0, 4)
        ke = kernel_embed(iso_J(1.5, BC1), g)
        assert np.allclose(ke.u, 1.5 * (1.0 + g.nodes), atol=0)

    def test_bc3_constant(self):
        g = make_grid(1.0, 4)
        ke = kernel_embed(iso_J(-2.0, BC3), g)
        assert np.all(ke.u == -2.0)
