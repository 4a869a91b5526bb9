import numpy as np
import pytest

from chainlab.core.errors import InvalidParameter
from chainlab.schemas.field import ScalarField
from chainlab.schemas.modulus import ChainFamily, EndpointPolicy, FunctionClass
from chainlab.services.fixture_service import FixtureService
from chainlab.services.modulus_service import ModulusService
from tests.conftest import random_space
from tests.oracles import modulus_by_enumeration_check


class TestConnectFamily:
    def test_linear_program(self, unit_path):
        report = ModulusService.chain_modulus(unit_path, ChainFamily.connect(0, 2), 1.0)
        assert report.objective == pytest.approx(1.0, rel=1e-8)
        assert not report.empty_family
        assert report.binding_chains

    def test_quadratic_program(self, unit_path):
        report = ModulusService.chain_modulus(unit_path, ChainFamily.connect(0, 2), 1.0, p=2)
        assert report.objective == pytest.approx(2 / 3, rel=1e-6)
        np.testing.assert_allclose(report.argument, [1 / 3, 2 / 3, 1 / 3], atol=1e-5)

    def test_disconnected_endpoints(self, unit_path):
        report = ModulusService.chain_modulus(unit_path, ChainFamily.connect(0, 2), 0.5)
        assert report.empty_family
        assert report.objective == 0.0

    def test_finite_at_caps_poles(self, unit_path):
        report = ModulusService.chain_modulus(
            unit_path, ChainFamily.connect(0, 2), 1.0, fclass=FunctionClass.finite_at(0, 2)
        )
        assert report.objective == pytest.approx(1.0, rel=1e-8)
        assert report.argument[0] == pytest.approx(0.0, abs=1e-9)
        assert report.argument[2] == pytest.approx(0.0, abs=1e-9)

    def test_custom_measure(self, unit_path):
        report = ModulusService.chain_modulus(
            unit_path, ChainFamily.connect(0, 2), 1.0, measure=ScalarField.density([1.0, 2.0, 1.0])
        )
        assert report.objective == pytest.approx(2.0, rel=1e-8)

    def test_lipschitz_class_costs_more(self, unit_path):
        free = ModulusService.chain_modulus(unit_path, ChainFamily.connect(0, 2), 1.0)
        tied = ModulusService.chain_modulus(
            unit_path, ChainFamily.connect(0, 2), 1.0, fclass=FunctionClass.lipschitz(0.1)
        )
        assert tied.objective >= free.objective - 1e-9

    @pytest.mark.parametrize("seed", [11, 12])
    def test_density_admissible_on_simple_chains(self, seed):
        rng = np.random.default_rng(seed)
        space = random_space(rng, 6)
        report = ModulusService.chain_modulus(space, ChainFamily.connect(0, 5), 0.8)
        if report.empty_family:
            pytest.skip("poles not chain-connected at this scale")
        smallest = modulus_by_enumeration_check(space.dist, 0.8, report.argument, 0.5, 0, 5)
        assert smallest >= 1.0 - 1e-6

    def test_point_outside_space(self, unit_path):
        with pytest.raises(InvalidParameter):
            ModulusService.chain_modulus(unit_path, ChainFamily.connect(0, 7), 1.0)


class TestHitAndExplicit:
    def test_hit_positive_mass(self, grid11):
        report = ModulusService.chain_modulus(grid11, ChainFamily.hit([5]), 0.1)
        assert report.objective == pytest.approx(2.0, rel=1e-7)
        assert report.certificate is None

    def test_hit_zero_mass_has_certificate(self):
        space = FixtureService.build("punctured_grid1d_11")
        verdict = ModulusService.is_weak_exceptional(space, ChainFamily.hit([5]), 0.1)
        assert verdict.exceptional
        assert verdict.modulus == pytest.approx(0.0, abs=1e-12)
        certificate = verdict.certificate
        assert certificate["kind"] == "null_set"
        assert certificate["value"] == 2 * certificate["k"]
        assert certificate["k"] * 0.1 >= 1.0 - 1e-9

    def test_positive_mass_not_exceptional(self, grid11):
        verdict = ModulusService.is_weak_exceptional(grid11, ChainFamily.hit([5]), 0.1)
        assert not verdict.exceptional
        assert verdict.certificate is None

    def test_endpoint_policy_certificate_weight(self):
        space = FixtureService.build("punctured_grid1d_11")
        family = ChainFamily.hit([5], EndpointPolicy.NOT_LAST)
        report = ModulusService.chain_modulus(space, family, 0.1, lam=1.0)
        assert report.certificate["value"] == report.certificate["k"]

    def test_explicit_chains(self, unit_path):
        report = ModulusService.chain_modulus(unit_path, ChainFamily.explicit([[0, 1], [1, 2]]), 1.0)
        assert report.objective == pytest.approx(2.0, rel=1e-8)

    def test_explicit_chain_beyond_eps(self, unit_path):
        report = ModulusService.chain_modulus(unit_path, ChainFamily.explicit([[0, 2]]), 1.0)
        assert report.empty_family


class TestCombineAndLadder:
    def test_combine_densities(self):
        combined = ModulusService.combine_densities(
            [ScalarField.density([3.0, 0.0]), ScalarField.density([4.0, 1.0])], p=2
        )
        np.testing.assert_allclose(combined.values, [5.0, 1.0])

    def test_combine_requires_input(self):
        with pytest.raises(InvalidParameter):
            ModulusService.combine_densities([])

    def test_keith_ladder_positive(self, grid11):
        rungs = ModulusService.keith_modulus_ladder(grid11, 0, 10, 2.0, 1.0, [0.2, 0.1])
        assert len(rungs) == 2
        for rung in rungs:
            assert not rung.empty_family
            assert rung.objective > 0
            assert rung.scaled == pytest.approx(rung.objective)

    def test_keith_ladder_distinct_poles(self, grid11):
        with pytest.raises(InvalidParameter):
            ModulusService.keith_modulus_ladder(grid11, 3, 3, 2.0, 1.0, [0.1])


def random_chains(rng, n_points: int, count: int, max_jump: int):
    """Chains on a line grid whose steps jump at most max_jump indices."""
    chains = []
    for _ in range(count):
        chain = [int(rng.integers(n_points))]
        for _ in range(int(rng.integers(1, 5))):
            steps = [s for s in range(-max_jump, max_jump + 1) if s and 0 <= chain[-1] + s < n_points]
            chain.append(chain[-1] + int(rng.choice(steps)))
        chains.append(chain)
    return chains


class TestFamilyProperties:
    @staticmethod
    def modulus(space, chains, eps):
        return ModulusService.chain_modulus(space, ChainFamily.explicit(chains), eps).objective

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_union_bounds(self, grid11, seed):
        rng = np.random.default_rng(seed)
        first = random_chains(rng, 11, 3, 2)
        second = random_chains(rng, 11, 3, 2)
        union = self.modulus(grid11, first + second, 0.2)
        assert union <= self.modulus(grid11, first, 0.2) + self.modulus(grid11, second, 0.2) + 1e-9
        assert self.modulus(grid11, first, 0.2) <= union + 1e-9
        assert self.modulus(grid11, second, 0.2) <= union + 1e-9

    @pytest.mark.parametrize("seed", [3, 4, 5])
    def test_smaller_scale_never_increases(self, grid11, seed):
        chains = random_chains(np.random.default_rng(seed), 11, 5, 2)
        assert self.modulus(grid11, chains, 0.1) <= self.modulus(grid11, chains, 0.2) + 1e-9
