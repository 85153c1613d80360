"""
周期曲线与球极投影测试
"""
import numpy as np
import pytest

import config
from curves import (
    BUILTIN_CURVES,
    FourierTerm,
    PeriodicCurve,
    builtin_curve,
    chord_pencil_image,
    curve_from_dict,
    curve_points_r3,
    curve_to_dict,
    eval_curve,
    eval_derivative,
    make_inversion_point,
    mirror_curve,
    polygonalize,
    random_inversion_point,
    stereographic_project,
    stereographic_unproject,
    validate_curve,
)
from errors import InputError, InvalidCurve, InvalidPolygon, PointAtInfinity, UnknownCurve


@pytest.fixture
def trefoil():
    return builtin_curve("paper-trefoil")


@pytest.fixture
def north():
    return make_inversion_point([0.0, 0.0, 0.0, 1.0])


def _random_s3(rng, count):
    x = rng.standard_normal((count, 4))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


class TestBuiltinCurves:
    """测试内置曲线"""

    @pytest.mark.parametrize("name", sorted(BUILTIN_CURVES))
    def test_builtin_curves_are_valid(self, name):
        curve = builtin_curve(name)
        assert curve.label == name
        assert curve.dimension == (4 if curve.ambient == "S3" else 3)

    def test_unknown_curve(self):
        with pytest.raises(UnknownCurve, match="可用"):
            builtin_curve("no-such-curve")

    def test_paper_trefoil_on_s3(self, trefoil):
        """参数三叶结落在单位球面上"""
        t = np.linspace(0.0, 1.0, 257)
        norms = np.linalg.norm(eval_curve(trefoil, t), axis=-1)
        assert np.allclose(norms, 1.0, atol=1e-14)

    def test_periodicity(self, trefoil):
        t = np.linspace(0.0, 1.0, 33)
        assert np.allclose(eval_curve(trefoil, t), eval_curve(trefoil, t + 1.0), atol=1e-12)

    def test_derivative_matches_finite_difference(self):
        curve = builtin_curve("figure-eight")
        t = np.linspace(0.05, 0.95, 7)
        h = 1e-6
        numeric = (eval_curve(curve, t + h) - eval_curve(curve, t - h)) / (2 * h)
        assert np.allclose(eval_derivative(curve, t), numeric, atol=1e-5)

    def test_torus_knot_stays_on_torus(self):
        """(2,q) 环面结到中心圆的距离恒为小半径"""
        curve = builtin_curve("torus-2-5")
        p = eval_curve(curve, np.linspace(0.0, 1.0, 101))
        ring = np.hypot(p[:, 0], p[:, 1])
        assert np.allclose(np.hypot(ring - 2.0, p[:, 2]), 1.0, atol=1e-12)


class TestValidateCurve:
    """测试曲线前提检查"""

    def test_wrong_coordinate_count(self):
        with pytest.raises(InvalidCurve):
            PeriodicCurve("R3", ((FourierTerm(1, 1.0),), (FourierTerm(1, 0.0, 1.0),)))

    def test_unknown_ambient(self):
        with pytest.raises(InvalidCurve, match="环境空间"):
            PeriodicCurve("R4", ((), (), (), ()))

    def test_non_integer_frequency(self):
        with pytest.raises(InvalidCurve, match="非整数频率"):
            PeriodicCurve("R3", ((FourierTerm(1.5, 1.0),), (), ()))

    def test_vanishing_derivative(self):
        """只沿 x 轴往返的曲线在 t = 0 处速度为零"""
        curve = PeriodicCurve("R3", ((FourierTerm(1, 1.0),), (), ()), label="segment")
        with pytest.raises(InvalidCurve, match="导数"):
            validate_curve(curve)

    def test_s3_curve_off_sphere(self):
        curve = PeriodicCurve(
            "S3",
            ((FourierTerm(2, 1.0),), (FourierTerm(2, 0.0, 1.0),),
             (FourierTerm(3, 1.0),), (FourierTerm(3, 0.0, 1.0),)),
            label="too-big",
        )
        with pytest.raises(InvalidCurve, match="S³"):
            validate_curve(curve)

    def test_periodicity_tolerance(self, trefoil, monkeypatch):
        """整数频率的曲线在默认容差下通过；容差收紧到负数时周期检查生效"""
        assert validate_curve(trefoil, grid=256) is trefoil
        monkeypatch.setattr(config, "PERIODICITY_TOL", -1.0)
        with pytest.raises(InvalidCurve, match="周期"):
            validate_curve(trefoil, grid=256)

    def test_json_round_trip(self, trefoil):
        restored = curve_from_dict(curve_to_dict(trefoil))
        t = np.linspace(0.0, 1.0, 17)
        assert restored.ambient == "S3"
        assert np.allclose(eval_curve(restored, t), eval_curve(trefoil, t))


class TestStereographic:
    """测试球极投影"""

    def test_round_trip(self, north):
        rng = np.random.default_rng(0)
        x = _random_s3(rng, 50)
        x = x[np.linalg.norm(x - north.point, axis=1) > 0.1]
        y = stereographic_project(x, north)
        assert np.allclose(stereographic_unproject(y, north), x, atol=1e-10)

    def test_antipode_maps_to_origin(self, north):
        assert np.allclose(stereographic_project([0.0, 0.0, 0.0, -1.0], north), 0.0)

    def test_point_at_infinity(self, north):
        with pytest.raises(PointAtInfinity):
            stereographic_project([0.0, 0.0, 1e-5, 1.0], north)

    def test_basis_orientation(self):
        """基与 I 组成正定向标架"""
        I = make_inversion_point([0.5, 0.5, 0.5, 0.5])
        frame = np.column_stack([I.basis, I.point])
        assert np.linalg.det(frame) > 0
        assert np.allclose(I.basis.T @ I.basis, np.eye(3), atol=1e-12)

    def test_inversion_point_must_be_unit(self):
        with pytest.raises(InputError, match="S³"):
            make_inversion_point([1.0, 1.0, 0.0, 0.0])

    def test_inversion_point_too_close_to_curve(self, trefoil):
        on_curve = eval_curve(trefoil, 0.3)
        with pytest.raises(InputError, match="过近"):
            make_inversion_point(on_curve, trefoil)

    def test_random_inversion_point_is_seeded(self, trefoil):
        a = random_inversion_point(trefoil, seed=3)
        b = random_inversion_point(trefoil, seed=3)
        assert np.array_equal(a.point, b.point)
        samples = eval_curve(trefoil, np.linspace(0.0, 1.0, 2001))
        assert np.linalg.norm(samples - a.point, axis=1).min() > 0.1

    def test_inversion_point_round_trip(self, trefoil):
        I = make_inversion_point([0.0, 0.0, 0.0, 1.0], trefoil)
        samples = eval_curve(trefoil, np.linspace(0.0, 1.0, 101))
        back = stereographic_unproject(stereographic_project(samples, I), I)
        assert np.abs(back - samples).max() <= config.ROUND_TRIP_TOL

    def test_round_trip_tolerance(self, trefoil, monkeypatch):
        monkeypatch.setattr(config, "ROUND_TRIP_TOL", 0.0)
        with pytest.raises(InputError, match="往返"):
            make_inversion_point([0.0, 0.0, 0.0, 1.0], trefoil)

    def test_random_inversion_point_needs_s3(self):
        with pytest.raises(InputError):
            random_inversion_point(builtin_curve("torus-2-3"))

    def test_chord_pencil_image_is_on_every_chord_image(self, north):
        """过 p 的弦 xy，其像直线 S(x)S(y) 经过公共点"""
        rng = np.random.default_rng(11)
        for _ in range(10):
            x, y = _random_s3(rng, 2)
            p = 0.5 * (x + y)
            sx, sy = stereographic_project(np.vstack([x, y]), north)
            q = chord_pencil_image(p, north)
            direction = (sy - sx) / np.linalg.norm(sy - sx)
            off = q - sx
            distance = np.linalg.norm(off - (off @ direction) * direction)
            assert distance < 1e-8 * max(1.0, np.linalg.norm(off))


class TestPolygonalize:
    """测试多边形化"""

    def test_vertex_count(self):
        poly = polygonalize(builtin_curve("torus-2-3"), 24)
        assert len(poly) == 24

    def test_too_few_vertices(self):
        with pytest.raises(InvalidPolygon):
            polygonalize(builtin_curve("torus-2-3"), 2)

    def test_s3_curve_requires_inversion(self, trefoil):
        with pytest.raises(InputError, match="反演点"):
            polygonalize(trefoil, 12)

    def test_curve_points_r3(self, trefoil, north):
        t = np.arange(6) / 6.0
        assert curve_points_r3(trefoil, t, north).shape == (6, 3)

    def test_mirror_curve(self):
        curve = builtin_curve("torus-2-3")
        mirrored = mirror_curve(curve)
        t = np.linspace(0.0, 1.0, 9)
        assert np.allclose(eval_curve(mirrored, t), eval_curve(curve, t) * np.array([-1.0, 1.0, 1.0]))


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
