import json

import numpy as np
import pytest

from chainlab.core.errors import (
    AlphaOutOfRange,
    BadDescriptor,
    ConfigParse,
    DegenerateDistance,
    EmptyRadiusGrid,
    MissingInput,
    NegativeMass,
    NonPositiveEps,
    NonSymmetricDistance,
    TriangleViolation,
    ZeroTotalMass,
)
from chainlab.schemas.space import GridDescriptor, MassRule
from chainlab.services.space_service import SpaceService
from tests.conftest import line_grid


class TestLoadSpace:
    def test_point_json(self, tmp_path):
        path = tmp_path / "space.json"
        path.write_text(json.dumps({
            "points": [{"id": "a", "mass": 1, "coords": [0]}, {"id": "b", "mass": 2, "coords": [3]}],
            "metric": "euclidean",
        }))
        space = SpaceService.load_space(path)
        assert space.n == 2
        assert space.labels == ("a", "b")
        np.testing.assert_allclose(space.dist, [[0, 3], [3, 0]])
        np.testing.assert_allclose(space.mass, [1, 2])

    def test_matrix_csv_with_masses(self, tmp_path):
        (tmp_path / "d.csv").write_text("0,1,2\n1,0,1\n2,1,0\n")
        (tmp_path / "m.csv").write_text("mass\n1\n1\n0\n")
        space = SpaceService.load_space(tmp_path / "d.csv", tmp_path / "m.csv")
        assert space.n == 3
        assert space.mass[2] == 0.0

    def test_point_csv(self, tmp_path):
        (tmp_path / "p.csv").write_text("id,mass,x0,x1\np,1,0,0\nq,1,3,4\n")
        space = SpaceService.load_space(tmp_path / "p.csv")
        assert space.dist[0, 1] == pytest.approx(5.0)

    def test_missing_file(self, tmp_path):
        with pytest.raises(MissingInput):
            SpaceService.load_space(tmp_path / "nope.json")

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json")
        with pytest.raises(ConfigParse):
            SpaceService.load_space(path)

    def test_document_schema_mismatch(self):
        with pytest.raises(ConfigParse):
            SpaceService.load_space({"points": [], "metric": "euclidean"})

    def test_non_symmetric(self):
        with pytest.raises(NonSymmetricDistance) as info:
            SpaceService.build([[0, 1], [2, 0]], [1, 1])
        assert info.value.context["pair"] in ([0, 1], [1, 0])

    def test_triangle_violation_reports_triple(self):
        dist = [[0, 1, 5], [1, 0, 1], [5, 1, 0]]
        with pytest.raises(TriangleViolation) as info:
            SpaceService.build(dist, [1, 1, 1])
        assert sorted(info.value.context["triple"]) == [0, 1, 2]
        assert info.value.to_dict()["error"] == "triangle_violation"

    def test_negative_mass(self):
        with pytest.raises(NegativeMass):
            SpaceService.build([[0, 1], [1, 0]], [1, -1])

    def test_zero_total_mass(self):
        with pytest.raises(ZeroTotalMass):
            SpaceService.build([[0, 1], [1, 0]], [0, 0])

    def test_coincident_points(self):
        with pytest.raises(DegenerateDistance):
            SpaceService.build([[0, 0], [0, 0]], [1, 1])

    def test_zero_mass_point_allowed(self):
        space = SpaceService.build([[0, 1], [1, 0]], [1, 0])
        assert space.total_mass == 1.0

    def test_document_round_trip(self, two_sequence):
        again = SpaceService.load_space(SpaceService.to_document(two_sequence).model_dump())
        np.testing.assert_allclose(again.dist, two_sequence.dist)
        assert again.labels == two_sequence.labels


class TestGenerators:
    @pytest.mark.parametrize("rule,expected", [
        (MassRule.UNIFORM, 0.25 ** 2),
        (MassRule.UNIT, 1.0),
        (MassRule.COUNTING_NORMALIZED, 1.0 / 25),
    ])
    def test_grid_mass_rules(self, rule, expected):
        space = SpaceService.generate_space(GridDescriptor(dim=2, side=5, spacing=0.25, mass_rule=rule))
        assert space.n == 25
        np.testing.assert_allclose(space.mass, expected)
        assert space.diameter == pytest.approx(np.sqrt(2.0))

    def test_two_sequence_layout(self, two_sequence):
        assert two_sequence.n == 96
        x3, y3 = two_sequence.index_of("x3"), two_sequence.index_of("y3")
        assert two_sequence.dist[x3, y3] == pytest.approx(1.0 / 3.0)
        assert two_sequence.mass[x3] == pytest.approx(1.0 / 27.0)

    def test_punctured_grid(self):
        space = SpaceService.generate_space({
            "kind": "punctured_grid",
            "grid": {"kind": "grid", "side": 11, "spacing": 0.1},
            "punctures": [5],
        })
        assert space.mass[5] == 0.0
        assert (np.delete(space.mass, 5) > 0).all()

    @pytest.mark.parametrize("descriptor", [
        {"kind": "torus", "side": 3},
        {"kind": "grid", "side": 0, "spacing": 1.0},
        {"kind": "punctured_grid", "grid": {"kind": "grid", "side": 3, "spacing": 1.0}, "punctures": [7]},
    ])
    def test_bad_descriptor(self, descriptor):
        with pytest.raises(BadDescriptor):
            SpaceService.generate_space(descriptor)

    @pytest.mark.parametrize("alpha", [0.5, 0.8])
    def test_snowflake_is_a_metric(self, grid11, alpha):
        flake = SpaceService.snowflake(grid11, alpha)
        np.testing.assert_allclose(flake.dist, grid11.dist ** alpha)

    @pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
    def test_snowflake_alpha_range(self, grid11, alpha):
        with pytest.raises(AlphaOutOfRange):
            SpaceService.snowflake(grid11, alpha)


class TestComponents:
    def test_two_sequence_splits_into_pairs(self, two_sequence):
        partition = SpaceService.chain_components(two_sequence, 1.0 / 3.0)
        assert partition.count == 48
        assert partition.same_component(two_sequence.index_of("x7"), two_sequence.index_of("y7"))
        assert not partition.same_component(two_sequence.index_of("y7"), two_sequence.index_of("x8"))

    def test_closed_threshold(self, grid11):
        assert SpaceService.chain_components(grid11, 0.1).count == 1
        assert SpaceService.chain_components(grid11, 0.099).count == 11

    def test_eps_above_diameter(self, grid11):
        graph = SpaceService.build_epsilon_graph(grid11, 5.0)
        assert graph.edge_count == 55

    def test_refinement(self, two_sequence):
        fine = SpaceService.chain_components(two_sequence, 0.1)
        coarse = SpaceService.chain_components(two_sequence, 1.0 / 3.0)
        assert SpaceService.refines(fine, coarse)
        assert not SpaceService.refines(coarse, fine)

    @pytest.mark.parametrize("eps", [0.0, -1.0])
    def test_non_positive_eps(self, grid11, eps):
        with pytest.raises(NonPositiveEps):
            SpaceService.build_epsilon_graph(grid11, eps)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_edges_shrink_with_eps(self, seed):
        rng = np.random.default_rng(seed)
        space = SpaceService.from_coords(rng.random((12, 2)), rng.uniform(0.5, 2.0, 12))
        scales = [0.6, 0.4, 0.25, 0.1]
        edge_sets = [set(SpaceService.build_epsilon_graph(space, eps).edges()) for eps in scales]
        for larger, smaller in zip(edge_sets, edge_sets[1:]):
            assert smaller <= larger


class TestDoubling:
    def test_single_point(self):
        estimate = SpaceService.doubling_constant(SpaceService.build([[0.0]], [1.0]))
        assert estimate.constant == 1.0

    def test_uniform_grid(self, grid101):
        estimate = SpaceService.doubling_constant(grid101)
        assert 1.0 <= estimate.constant <= 5.0
        assert estimate.witness_center is not None

    def test_empty_radius_grid(self, grid11):
        with pytest.raises(EmptyRadiusGrid):
            SpaceService.doubling_constant(grid11, [])

    def test_zero_mass_balls_are_skipped(self):
        space = SpaceService.generate_space({
            "kind": "punctured_grid",
            "grid": {"kind": "grid", "side": 5, "spacing": 1.0},
            "punctures": [2],
        })
        estimate = SpaceService.doubling_constant(space, [0.5])
        assert (2, 0.5) in estimate.skipped

    def test_ball_mass(self):
        space = line_grid(4, MassRule.UNIT)
        assert SpaceService.ball_mass(space, 0, 0.5) == 2.0
        assert SpaceService.closed_ball(space, 0, 0.5).tolist() == [0, 1, 2]
