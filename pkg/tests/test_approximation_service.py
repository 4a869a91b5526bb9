import numpy as np
import pytest

from chainlab.core.errors import EmptySeedSet, InvalidParameter
from chainlab.schemas.field import ScalarField
from chainlab.schemas.potential import PotentialSpec
from chainlab.services.approximation_service import ApproximationService
from chainlab.services.gradient_service import GradientService
from tests.conftest import random_space


def spec(seeds, values, g, eps, **kwargs):
    return PotentialSpec(seeds=tuple(seeds), seed_values=tuple(values), g=ScalarField.gradient(g), eps=eps, **kwargs)


class TestChainPotential:
    def test_distance_from_seed(self, unit_path):
        potential = ApproximationService.chain_potential(unit_path, spec([0], [0.0], [1.0, 1.0, 1.0], 1.0))
        np.testing.assert_allclose(potential.values, [0.0, 1.0, 2.0])

    def test_duplicate_seed_keeps_minimum(self, unit_path):
        potential = ApproximationService.chain_potential(unit_path, spec([0, 0], [5.0, 1.0], [1.0, 1.0, 1.0], 1.0))
        assert potential.values[0] == 1.0

    def test_seed_can_be_undercut(self, unit_path):
        potential = ApproximationService.chain_potential(
            unit_path, spec([0, 2], [0.0, 10.0], [1.0, 1.0, 1.0], 1.0)
        )
        assert potential.values[2] == 2.0

    def test_unreachable_points(self, unit_path):
        g = [1.0, 1.0, 1.0]
        potential = ApproximationService.chain_potential(unit_path, spec([0], [0.0], g, 0.5))
        assert potential.values.tolist() == [0.0, np.inf, np.inf]
        capped = ApproximationService.chain_potential(unit_path, spec([0], [0.0], g, 0.5, cap=3.0))
        assert capped.values.tolist() == [0.0, 3.0, 3.0]

    def test_smaller_scale_never_lowers_potential(self, rng):
        space = random_space(rng, 10)
        g = rng.uniform(0.1, 2.0, 10)
        potentials = [
            ApproximationService.chain_potential(space, spec([0, 3], [0.0, 0.5], g, eps)).values
            for eps in (0.8, 0.5, 0.3, 0.2)
        ]
        for coarse, fine in zip(potentials, potentials[1:]):
            assert np.all(fine >= coarse - 1e-12)

    def test_empty_seed_set(self, unit_path):
        with pytest.raises(EmptySeedSet):
            ApproximationService.chain_potential(unit_path, spec([], [], [1.0, 1.0, 1.0], 1.0))

    def test_non_finite_seed_value(self, unit_path):
        with pytest.raises(InvalidParameter):
            ApproximationService.chain_potential(unit_path, spec([0], [np.inf], [1.0, 1.0, 1.0], 1.0))

    def test_gradient_size(self, unit_path):
        with pytest.raises(InvalidParameter):
            ApproximationService.chain_potential(unit_path, spec([0], [0.0], [1.0, 1.0], 1.0))

    @pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("seed", [5, 6, 7])
    def test_gradient_contract(self, lam, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(10, 31))
        space = random_space(rng, n, zero_mass=True)
        seeds = rng.choice(n, size=3, replace=False).tolist()
        potential_spec = spec(seeds, rng.normal(size=3).tolist(), rng.random(n), 0.3, lam=lam)
        assert ApproximationService.potential_gradient_check(space, potential_spec).accepted


class TestLeibniz:
    @pytest.mark.parametrize("seed", [21, 22, 23])
    def test_product_gradient(self, seed):
        rng = np.random.default_rng(seed)
        space = random_space(rng, 15)
        u = ScalarField.function(rng.normal(size=15))
        phi = ScalarField.function(rng.normal(size=15))
        g = GradientService.slope_field(space, u, 0.35)
        product_gradient = ApproximationService.leibniz_gradient(space, u, phi, g, 0.35)
        product = ScalarField.function(u.values * phi.values)
        result = GradientService.verify_upper_gradient(space, product, product_gradient, 0.35, rel_tol=1e-9)
        assert result.accepted

    def test_infinite_function_rejected(self, unit_path):
        with pytest.raises(InvalidParameter):
            ApproximationService.leibniz_gradient(
                unit_path,
                ScalarField.function([0.0, np.inf, 1.0]),
                ScalarField.function([1.0, 1.0, 1.0]),
                ScalarField.gradient([1.0, 1.0, 1.0]),
                1.0,
            )


class TestPipeline:
    @staticmethod
    def u(x):
        return x * (1 - x)

    @staticmethod
    def g(x):
        return np.abs(1 - 2 * x)

    def test_full_seeds(self):
        report = ApproximationService.eb_pipeline([10, 20, 40], self.u, self.g)
        assert [row.n for row in report.rows] == [10, 20, 40]
        for row in report.rows:
            assert row.u_error <= 1e-12
            assert row.verified
        assert report.rows[-1].g_error < report.rows[0].g_error

    def test_boundary_seeds(self):
        report = ApproximationService.eb_pipeline([10, 40], self.u, self.g, seeds="boundary")
        assert all(row.verified for row in report.rows)
        assert report.rows[-1].u_error <= report.rows[0].u_error + 1e-12

    def test_boundary_seeds_exact_for_tent(self):
        report = ApproximationService.eb_pipeline(
            [8, 16], lambda x: np.minimum(x, 1 - x), lambda x: np.ones_like(x), seeds="boundary"
        )
        for row in report.rows:
            assert row.u_error <= 1e-12
            assert row.verified

    @pytest.mark.parametrize("kwargs", [{"sizes": []}, {"sizes": [0]}, {"sizes": [4], "eps_factor": 0.5}])
    def test_invalid_arguments(self, kwargs):
        kwargs = dict(kwargs)
        sizes = kwargs.pop("sizes")
        with pytest.raises(InvalidParameter):
            ApproximationService.eb_pipeline(sizes, self.u, self.g, **kwargs)
