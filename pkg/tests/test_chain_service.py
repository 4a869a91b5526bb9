import numpy as np
import pytest

from chainlab.core.errors import (
    DegenerateCurve,
    EndpointMismatch,
    InvalidParameter,
    LambdaOutOfRange,
    ZeroLengthChain,
)
from chainlab.schemas.field import ScalarField
from chainlab.services.chain_service import ChainService
from chainlab.services.space_service import SpaceService
from tests.conftest import line_grid


@pytest.fixture
def line013():
    """Points at 0, 1 and 3 on the line."""
    return SpaceService.from_coords([0.0, 1.0, 3.0], [1.0, 1.0, 1.0])


@pytest.fixture
def g246():
    return ScalarField.gradient([2.0, 4.0, 6.0])


class TestIntegral:
    @pytest.mark.parametrize("lam,expected", [(0.5, 13.0), (1.0, 10.0), (0.0, 16.0)])
    def test_lambda_integral(self, line013, g246, lam, expected):
        chain = ChainService.chain_from_points(line013, [0, 1, 2])
        assert ChainService.lambda_integral(chain, g246, lam) == expected

    def test_zero_density(self, line013):
        chain = ChainService.chain_from_points(line013, [0, 1, 2, 1])
        for lam in (0.0, 0.3, 1.0):
            assert ChainService.lambda_integral(chain, ScalarField.gradient(np.zeros(3)), lam) == 0.0

    def test_infinite_interior_value(self, line013):
        chain = ChainService.chain_from_points(line013, [0, 1, 2])
        g = ScalarField.gradient([1.0, np.inf, 1.0])
        assert ChainService.lambda_integral(chain, g, 0.3) == np.inf

    def test_infinite_value_with_zero_weight(self, line013):
        chain = ChainService.chain_from_points(line013, [0, 1])
        g = ScalarField.gradient([np.inf, 1.0])
        assert ChainService.lambda_integral(chain, g, 0.0) == 1.0

    def test_zero_length_step_contributes_nothing(self, line013, g246):
        chain = ChainService.chain_from_points(line013, [0, 0, 1])
        assert ChainService.lambda_integral(chain, g246) == 3.0

    def test_linearity(self, rng):
        space = line_grid(10)
        chain = ChainService.chain_from_points(space, [0, 1, 2, 1, 2, 3])
        g, h = rng.random(11), rng.random(11)
        combined = ChainService.chain_integral(chain, ScalarField.gradient(2 * g + 3 * h))
        separate = 2 * ChainService.chain_integral(chain, ScalarField.gradient(g)) \
            + 3 * ChainService.chain_integral(chain, ScalarField.gradient(h))
        np.testing.assert_allclose(combined, separate, rtol=1e-14)

    def test_lambda_range(self, line013, g246):
        chain = ChainService.chain_from_points(line013, [0, 1])
        with pytest.raises(LambdaOutOfRange):
            ChainService.lambda_integral(chain, g246, 1.5)

    def test_node_coefficients_match_integral(self, line013, g246):
        chain = ChainService.chain_from_points(line013, [0, 1, 2])
        a = ChainService.node_coefficients(chain, 3, 0.25)
        assert a @ g246.values == pytest.approx(ChainService.lambda_integral(chain, g246, 0.25))


class TestAlgebra:
    def test_concat_adds_integrals(self, line013, g246):
        c1 = ChainService.chain_from_points(line013, [0, 1])
        c2 = ChainService.chain_from_points(line013, [1, 2])
        joined = ChainService.concat(c1, c2)
        assert joined.points == (0, 1, 2)
        assert joined.eps == 2.0
        assert ChainService.chain_integral(joined, g246) == \
            ChainService.chain_integral(c1, g246) + ChainService.chain_integral(c2, g246)

    def test_concat_mismatch(self, line013):
        c1 = ChainService.chain_from_points(line013, [0, 1])
        with pytest.raises(EndpointMismatch):
            ChainService.concat(c1, c1)

    def test_inverse_swaps_lambda(self, line013, g246):
        chain = ChainService.chain_from_points(line013, [0, 1, 2])
        reverse = ChainService.inverse(chain)
        assert ChainService.lambda_integral(reverse, g246, 1.0) == 16.0
        assert ChainService.chain_integral(reverse, g246) == ChainService.chain_integral(chain, g246)

    def test_length(self, line013):
        assert ChainService.length(ChainService.chain_from_points(line013, [0, 1, 2, 1])) == 5.0

    def test_step_above_eps(self, line013):
        with pytest.raises(InvalidParameter):
            ChainService.chain_from_points(line013, [0, 2], eps=1.0)

    def test_single_point_rejected(self, line013):
        with pytest.raises(InvalidParameter):
            ChainService.chain_from_points(line013, [0])

    def test_document_round_trip(self, line013):
        chain = ChainService.chain_from_points(line013, [0, 1, 2], eps=2.5)
        again = ChainService.from_document(line013, ChainService.to_document(chain))
        assert again.points == chain.points
        assert again.eps == 2.5


class TestStepCurve:
    def test_equal_spacing(self):
        space = line_grid(10)
        curve = ChainService.to_step_curve(ChainService.chain_from_points(space, [0, 1, 2, 3]))
        np.testing.assert_allclose(curve.breakpoints, [0.0, 1 / 3, 2 / 3], rtol=1e-12)
        assert curve.values == (0, 1, 2)
        assert curve.terminal == 3

    def test_two_points(self, line013):
        curve = ChainService.to_step_curve(ChainService.chain_from_points(line013, [0, 1]))
        assert curve.breakpoints == (0.0,)
        assert curve.at(0.7) == 0
        assert curve.at(1.0) == 1

    def test_uneven_spacing(self):
        space = SpaceService.from_coords([0.0, 1.0, 4.0], [1.0, 1.0, 1.0])
        curve = ChainService.to_step_curve(ChainService.chain_from_points(space, [0, 1, 2]))
        assert curve.breakpoints == (0.0, 0.25)

    def test_zero_length(self, line013):
        with pytest.raises(ZeroLengthChain):
            ChainService.to_step_curve(ChainService.chain_from_points(line013, [1, 1], eps=1.0))


class TestRiemann:
    @pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
    @pytest.mark.parametrize("t", [0.0, 0.37, 1.0])
    def test_constant_is_exact(self, lam, t):
        value = ChainService.riemann_sum(lambda s: 2.5 + 0 * s, t, 7, lam, ell=3.0)
        np.testing.assert_allclose(value, 7.5, rtol=1e-12)

    def test_linear_mean_error(self):
        errors = [abs(ChainService.riemann_sum(lambda s: s, t, 1000) - 0.5) for t in np.arange(10) / 10]
        assert np.mean(errors) < 1e-3

    def test_scalar_only_callable(self):
        value = ChainService.riemann_sum(lambda s: float(s) ** 2 if s < 2 else 0.0, 0.5, 100)
        assert value == pytest.approx(1 / 3, abs=1e-3)

    @pytest.mark.parametrize("t,n", [(-0.1, 4), (1.1, 4), (0.5, 0)])
    def test_parameter_ranges(self, t, n):
        with pytest.raises(InvalidParameter):
            ChainService.riemann_sum(lambda s: s, t, n)


class TestSampling:
    def test_identity_curve(self):
        space = line_grid(4)
        sampled = ChainService.sample_chain_from_curve(space, list(range(5)), 0.0, 4)
        assert sampled.chain.points == (0, 0, 1, 2, 3, 4)
        g = ScalarField.gradient(np.ones(5))
        assert ChainService.chain_integral(sampled.chain, g) == pytest.approx(1.0)
        assert sampled.snap_error == pytest.approx(0.0, abs=1e-15)

    def test_reversed_curve(self, rng):
        space = line_grid(100)
        g = ScalarField.gradient(rng.random(101))
        forward = ChainService.sample_chain_from_curve(space, list(range(101)), 0.5, 10)
        backward = ChainService.sample_chain_from_curve(space, list(range(100, -1, -1)), 0.5, 10)
        assert backward.chain.points == tuple(reversed(forward.chain.points))
        np.testing.assert_allclose(
            ChainService.chain_integral(backward.chain, g),
            ChainService.chain_integral(forward.chain, g),
            rtol=1e-12,
        )

    def test_refinement_approaches_trapezoid(self):
        space = line_grid(1000)
        x = space.coords[:, 0]
        g = ScalarField.gradient(np.cos(x) + 1.0)
        exact = np.sin(1.0) + 1.0
        sampled = ChainService.sample_chain_from_curve(space, list(range(1001)), 0.0, 1000)
        assert ChainService.chain_integral(sampled.chain, g) == pytest.approx(exact, abs=1e-5)

    def test_degenerate_curve(self, line013):
        with pytest.raises(DegenerateCurve):
            ChainService.sample_chain_from_curve(line013, [1, 1], 0.0, 3)
