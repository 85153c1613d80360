"""
投影图与 Gauss 码测试
"""
import json
from pathlib import Path

import numpy as np
import pytest

from diagram import (
    ClosedPolygon,
    GaussCode,
    generic_diagrams,
    gauss_code,
    nonadjacent_pairs,
    project_diagram,
    random_generic_direction,
    segment_distances,
    writhe,
)
from errors import GenericityExhausted, InputError, InvalidPolygon, NonGenericDirection

FIXTURES = Path(__file__).parent / "fixtures"

UP = (0.0, 0.0, 1.0)


@pytest.fixture
def quadrilateral():
    """沿 z 轴投影恰有一个交叉点的空间四边形"""
    return ClosedPolygon([(0, 0, 0), (1, 1, 2), (1, 0, 0), (0, 1, 0)])


@pytest.fixture
def planar_hexagon():
    data = json.loads((FIXTURES / "planar_hexagon.json").read_text(encoding="utf-8"))
    return ClosedPolygon(data["vertices"])


class TestSegmentGeometry:
    """测试线段距离与边对"""

    def test_segment_distances(self):
        dist, s, t = segment_distances(
            np.array([[0.0, 0.0, 0.0]]), np.array([[2.0, 0.0, 0.0]]),
            np.array([[1.0, -1.0, 1.0]]), np.array([[1.0, 1.0, 1.0]]),
        )
        assert dist[0] == pytest.approx(1.0)
        assert s[0] == pytest.approx(0.5)
        assert t[0] == pytest.approx(0.5)

    def test_nonadjacent_pairs(self):
        i, j = nonadjacent_pairs(4)
        assert list(zip(i.tolist(), j.tolist())) == [(0, 2), (1, 3)]
        assert nonadjacent_pairs(3)[0].size == 0

    def test_hexagon_has_nine_pairs(self):
        i, _ = nonadjacent_pairs(6)
        assert i.size == 9


class TestClosedPolygon:
    """测试多边形构造"""

    def test_too_few_vertices(self):
        with pytest.raises(InvalidPolygon):
            ClosedPolygon([(0, 0, 0), (1, 0, 0)])

    def test_wrong_dimension(self):
        with pytest.raises(InvalidPolygon, match="ℝ³"):
            ClosedPolygon([(0, 0), (1, 0), (0, 1)])

    def test_zero_length_edge(self):
        with pytest.raises(InvalidPolygon, match="长度为零"):
            ClosedPolygon([(0, 0, 0), (0, 0, 0), (1, 0, 0), (0, 1, 0)])

    def test_self_intersection(self):
        """平面蝴蝶形四边形自交"""
        with pytest.raises(InvalidPolygon, match="相交"):
            ClosedPolygon([(0, 0, 0), (1, 1, 0), (1, 0, 0), (0, 1, 0)])

    def test_non_finite(self):
        with pytest.raises(InvalidPolygon):
            ClosedPolygon([(0, 0, 0), (1, 0, np.nan), (0, 1, 0)])

    def test_vertices_are_read_only(self, quadrilateral):
        with pytest.raises(ValueError):
            quadrilateral.vertices[0, 0] = 5.0


class TestProjectDiagram:
    """测试投影与交叉点"""

    def test_single_crossing(self, quadrilateral):
        diagram = project_diagram(quadrilateral, UP)
        assert diagram.crossing_count == 1

        crossing = diagram.crossings[0]
        assert crossing.over_edge == 0
        assert crossing.under_edge == 2
        assert crossing.over_param == pytest.approx(0.5)
        assert crossing.under_param == pytest.approx(0.5)
        assert crossing.sign == 1
        assert str(gauss_code(diagram)) == "O1+ U1+"

    def test_mirror_flips_sign(self, quadrilateral):
        diagram = project_diagram(quadrilateral.mirrored(), UP)
        assert str(gauss_code(diagram)) == "O1- U1-"

    def test_basis_is_right_handed(self, quadrilateral):
        diagram = project_diagram(quadrilateral, [0.3, -0.2, 1.0])
        u, v = diagram.basis
        assert np.allclose(np.cross(u, v), diagram.direction)

    def test_rolled_polygon_keeps_crossings(self, quadrilateral):
        assert project_diagram(quadrilateral.rolled(1), UP).crossing_count == 1

    def test_planar_hexagon_from_above(self, planar_hexagon):
        assert project_diagram(planar_hexagon, UP).crossing_count == 0

    def test_edge_on_direction(self, planar_hexagon):
        """沿平面内方向投影，两条边退化为点"""
        with pytest.raises(NonGenericDirection) as exc_info:
            project_diagram(planar_hexagon, (1.0, 0.0, 0.0))
        assert exc_info.value.tolerance == "vertex"

    @pytest.mark.parametrize("direction", [(0.0, 0.0, 0.0), (1.0, 0.0)])
    def test_invalid_direction(self, quadrilateral, direction):
        with pytest.raises(InputError):
            project_diagram(quadrilateral, direction)


class TestGenericDiagrams:
    """测试随机通用方向"""

    def test_deterministic(self, quadrilateral):
        a = generic_diagrams(quadrilateral, 3, seed=5)
        b = generic_diagrams(quadrilateral, 3, seed=5)
        assert len(a) == 3
        for x, y in zip(a, b):
            assert np.array_equal(x.direction, y.direction)

    def test_random_direction_is_unit(self, quadrilateral):
        direction = random_generic_direction(quadrilateral, seed=1)
        assert np.linalg.norm(direction) == pytest.approx(1.0)

    def test_planar_polygon_never_crosses(self, planar_hexagon):
        for diagram in generic_diagrams(planar_hexagon, 5, seed=0):
            assert diagram.crossing_count == 0

    def test_exhausted(self, quadrilateral):
        with pytest.raises(GenericityExhausted):
            generic_diagrams(quadrilateral, 1, seed=0, max_draws=0)


class TestGaussCode:
    """测试 Gauss 码"""

    TREFOIL = "O1+ U2+ O3+ U1+ O2+ U3+"

    def test_parse_and_str(self):
        code = GaussCode.parse(self.TREFOIL)
        assert str(code) == self.TREFOIL
        assert len(code) == 6
        assert code.crossing_ids == [1, 2, 3]

    def test_positions(self):
        over, under = GaussCode.parse(self.TREFOIL).positions()
        assert over == {1: 0, 3: 2, 2: 4}
        assert under == {2: 1, 1: 3, 3: 5}

    def test_writhe(self):
        assert writhe(GaussCode.parse(self.TREFOIL)) == 3
        assert writhe(GaussCode.parse("O1- U2+ O3+ U1- O4- U3+ O2+ U4-")) == 0

    def test_rotated(self):
        code = GaussCode.parse(self.TREFOIL)
        assert str(code.rotated(1)) == "U2+ O3+ U1+ O2+ U3+ O1+"
        assert code.rotated(6) == code

    def test_mirrored(self):
        mirrored = GaussCode.parse(self.TREFOIL).mirrored()
        assert str(mirrored) == "U1- O2- U3- O1- U2- O3-"
        assert writhe(mirrored) == -3

    def test_empty_code(self):
        code = GaussCode.parse("")
        assert len(code) == 0
        assert code.rotated(3) == code

    @pytest.mark.parametrize("text", ["X1+", "O1", "O+1", "O1+ O1+", "O1+ U1-", "O1+"])
    def test_invalid_codes(self, text):
        with pytest.raises(InputError):
            GaussCode.parse(text)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
