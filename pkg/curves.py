"""
周期参数曲线

曲线以每个坐标的有限 Fourier 和表示（频率 = 每周期的圈数，θ = 2πt），
可位于 ℝ³ 或 S³ ⊂ ℝ⁴。S³ 曲线经反演点 I 的球极投影进入 ℝ³。
"""
# 标准库
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

# 第三方库
import numpy as np
from scipy.linalg import null_space

# 本地模块
import config
from diagram import ClosedPolygon
from errors import (
    GenericityExhausted,
    InputError,
    InvalidCurve,
    InvalidPolygon,
    PointAtInfinity,
    UnknownCurve,
)

AMBIENT_DIMENSIONS = {"R3": 3, "S3": 4}


# ==================== 数据结构 ====================

@dataclass(frozen=True)
class FourierTerm:
    freq: int
    cos: float = 0.0
    sin: float = 0.0


@dataclass(frozen=True)
class PeriodicCurve:
    """ℤ-周期参数曲线，构造后不可变"""

    ambient: str
    coords: Tuple[Tuple[FourierTerm, ...], ...]
    label: str = ""

    def __post_init__(self):
        if self.ambient not in AMBIENT_DIMENSIONS:
            raise InvalidCurve(f"未知的环境空间: {self.ambient!r}（应为 R3 或 S3）")
        expected = AMBIENT_DIMENSIONS[self.ambient]
        if len(self.coords) != expected:
            raise InvalidCurve(
                f"{self.ambient} 曲线需要 {expected} 个坐标，收到 {len(self.coords)} 个"
            )
        for axis, terms in enumerate(self.coords):
            for term in terms:
                if int(term.freq) != term.freq:
                    raise InvalidCurve(f"第 {axis + 1} 个坐标含非整数频率 {term.freq}")

    @property
    def dimension(self) -> int:
        return AMBIENT_DIMENSIONS[self.ambient]

    @cached_property
    def _tables(self) -> List[Tuple[np.ndarray, np.ndarray, np.ndarray]]:
        return [
            (
                np.array([t.freq for t in terms], dtype=float),
                np.array([t.cos for t in terms], dtype=float),
                np.array([t.sin for t in terms], dtype=float),
            )
            for terms in self.coords
        ]


@dataclass(frozen=True, eq=False)
class InversionPoint:
    """S³ 上的反演点 I"""

    point: np.ndarray = field(repr=False)

    @cached_property
    def basis(self) -> np.ndarray:
        """I 的正交超平面的标准正交基（4×3），定向使 det[B | I] > 0"""
        basis = null_space(self.point.reshape(1, 4))
        if np.linalg.det(np.column_stack([basis, self.point])) < 0:
            basis[:, -1] = -basis[:, -1]
        return basis

    def to_list(self) -> List[float]:
        return [float(v) for v in self.point]


# ==================== 求值 ====================

def _evaluate(curve: PeriodicCurve, t: Any, derivative: bool) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    out = np.empty(t.shape + (curve.dimension,))
    for axis, (freq, a, b) in enumerate(curve._tables):
        if freq.size == 0:
            out[..., axis] = 0.0
            continue
        phase = 2.0 * np.pi * np.multiply.outer(t, freq)
        if derivative:
            values = (2.0 * np.pi * freq) * (b * np.cos(phase) - a * np.sin(phase))
        else:
            values = a * np.cos(phase) + b * np.sin(phase)
        out[..., axis] = values.sum(axis=-1)
    return out


def eval_curve(curve: PeriodicCurve, t: Any) -> np.ndarray:
    """γ(t)；t 可以是标量或数组，结果最后一维为坐标"""
    return _evaluate(curve, t, derivative=False)


def eval_derivative(curve: PeriodicCurve, t: Any) -> np.ndarray:
    """γ′(t)，逐项求导的精确值"""
    return _evaluate(curve, t, derivative=True)


def validate_curve(curve: PeriodicCurve, grid: Optional[int] = None) -> PeriodicCurve:
    """
    检查曲线前提：周期性、S³ 约束与导数处处非零

    Raises:
        InvalidCurve: 任一条件不满足
    """
    grid = config.CURVE_CHECK_GRID if grid is None else grid
    ts = np.arange(grid) / grid

    drift = np.linalg.norm(eval_curve(curve, ts + 1.0) - eval_curve(curve, ts), axis=-1).max()
    if drift > config.PERIODICITY_TOL:
        raise InvalidCurve(f"曲线 {curve.label!r} 不是 1-周期的（最大偏差 {drift:.3e}）")

    if curve.ambient == "S3":
        deviation = np.abs(np.linalg.norm(eval_curve(curve, ts), axis=-1) - 1.0).max()
        if deviation > config.S3_NORM_TOL:
            raise InvalidCurve(f"曲线 {curve.label!r} 偏离 S³（最大偏差 {deviation:.3e}）")

    speed = np.linalg.norm(eval_derivative(curve, ts), axis=-1).min()
    if not speed > 1e-12:
        raise InvalidCurve(f"曲线 {curve.label!r} 的导数在采样网格上消失")
    return curve


# ==================== 反演点与球极投影 ====================

def _curve_distance(curve: PeriodicCurve, point: np.ndarray, grid: int) -> float:
    samples = eval_curve(curve, np.arange(grid) / grid)
    return float(np.linalg.norm(samples - point, axis=-1).min())


def _round_trip_error(samples: np.ndarray, I: InversionPoint) -> float:
    back = stereographic_unproject(stereographic_project(samples, I, clearance=0.0), I)
    return float(np.abs(back - samples).max())


def make_inversion_point(
    point: Sequence[float],
    curve: Optional[PeriodicCurve] = None,
    clearance: Optional[float] = None,
) -> InversionPoint:
    """由 ℝ⁴ 单位向量构造反演点；给定曲线时检查与曲线的距离"""
    vec = np.asarray(point, dtype=float).reshape(-1)
    if vec.shape != (4,):
        raise InputError(f"反演点必须是 ℝ⁴ 向量，收到形状 {vec.shape}")
    norm = np.linalg.norm(vec)
    if abs(norm - 1.0) > 1e-9:
        raise InputError(f"反演点必须位于 S³ 上（|I| = {norm:.12f}）")
    vec = vec / norm
    if curve is not None:
        clearance = config.INVERSION_CLEARANCE if clearance is None else clearance
        distance = _curve_distance(curve, vec, config.CURVE_CHECK_GRID)
        if distance <= clearance:
            raise InputError(f"反演点距曲线过近（{distance:.3e} ≤ {clearance:.1e}）")
        if curve.ambient == "S3":
            samples = eval_curve(curve, np.arange(config.CURVE_CHECK_GRID) / config.CURVE_CHECK_GRID)
            error = _round_trip_error(samples, InversionPoint(vec))
            if error > config.ROUND_TRIP_TOL:
                raise InputError(f"球极投影往返误差 {error:.3e} 超过 {config.ROUND_TRIP_TOL:.1e}")
    return InversionPoint(vec)


def random_inversion_point(
    curve: PeriodicCurve,
    seed: int = 0,
    clearance: Optional[float] = None,
) -> InversionPoint:
    """按种子抽取一个远离曲线的反演点"""
    if curve.ambient != "S3":
        raise InputError("只有 S³ 曲线需要反演点")
    clearance = config.AUTO_INVERSION_CLEARANCE if clearance is None else clearance
    rng = np.random.default_rng(seed)
    samples = eval_curve(curve, np.arange(config.CURVE_CHECK_GRID) / config.CURVE_CHECK_GRID)

    for _ in range(config.DIRECTION_MAX_DRAWS):
        vec = rng.standard_normal(4)
        vec /= np.linalg.norm(vec)
        if np.linalg.norm(samples - vec, axis=-1).min() <= clearance:
            continue
        candidate = InversionPoint(vec)
        if _round_trip_error(samples, candidate) <= config.ROUND_TRIP_TOL:
            return candidate
    raise GenericityExhausted(
        f"连续 {config.DIRECTION_MAX_DRAWS} 次未找到距曲线 > {clearance} 的反演点"
    )


def stereographic_project(
    x: Any, I: InversionPoint, clearance: Optional[float] = None
) -> np.ndarray:
    """
    S_I: S³ \\ {I} → ℝ³，投影到 I 的正交超平面，坐标取自 I.basis

    Raises:
        PointAtInfinity: |x − I| < clearance
    """
    clearance = config.INVERSION_CLEARANCE if clearance is None else clearance
    x = np.asarray(x, dtype=float)
    gap = np.linalg.norm(x - I.point, axis=-1)
    if np.any(gap < clearance):
        raise PointAtInfinity(f"点距反演点 {float(np.min(gap)):.3e}，小于 {clearance:.1e}")
    along = x @ I.point
    y = (x - along[..., None] * I.point) / (1.0 - along)[..., None]
    return y @ I.basis


def stereographic_unproject(y: Any, I: InversionPoint) -> np.ndarray:
    """S_I 的逆映射"""
    y = np.asarray(y, dtype=float)
    s = np.sum(y * y, axis=-1)[..., None]
    lifted = y @ I.basis.T
    return (2.0 * lifted + (s - 1.0) * I.point) / (s + 1.0)


def chord_pencil_image(p: Sequence[float], I: InversionPoint) -> np.ndarray:
    """
    过 p 的所有弦在 S_I 下的像直线的公共点

    直线 I→p 与 S³ 的第二个交点 J 落在每个“过 I 与弦的圆”上，其像即为公共点。
    """
    p = np.asarray(p, dtype=float)
    d = p - I.point
    s = -2.0 * float(I.point @ d) / float(d @ d)
    return stereographic_project(I.point + s * d, I)


# ==================== 内置曲线 ====================

_AMP = 1.0 / np.sqrt(2.0)


def _torus_2q(q: int, major: float = 2.0, minor: float = 1.0) -> PeriodicCurve:
    half = minor / 2.0
    return PeriodicCurve(
        ambient="R3",
        coords=(
            (FourierTerm(2, major, 0.0), FourierTerm(q + 2, half, 0.0), FourierTerm(q - 2, half, 0.0)),
            (FourierTerm(2, 0.0, major), FourierTerm(q + 2, 0.0, half), FourierTerm(q - 2, 0.0, -half)),
            (FourierTerm(q, 0.0, minor),),
        ),
        label=f"torus-2-{q}",
    )


def _paper_trefoil() -> PeriodicCurve:
    return PeriodicCurve(
        ambient="S3",
        coords=(
            (FourierTerm(2, _AMP, 0.0),),
            (FourierTerm(2, 0.0, _AMP),),
            (FourierTerm(3, _AMP, 0.0),),
            (FourierTerm(3, 0.0, _AMP),),
        ),
        label="paper-trefoil",
    )


def _figure_eight() -> PeriodicCurve:
    # ((2 + cos 2θ) cos 3θ, (2 + cos 2θ) sin 3θ, sin 4θ) 展开为 Fourier 项
    return PeriodicCurve(
        ambient="R3",
        coords=(
            (FourierTerm(3, 2.0, 0.0), FourierTerm(5, 0.5, 0.0), FourierTerm(1, 0.5, 0.0)),
            (FourierTerm(3, 0.0, 2.0), FourierTerm(5, 0.0, 0.5), FourierTerm(1, 0.0, 0.5)),
            (FourierTerm(4, 0.0, 1.0),),
        ),
        label="figure-eight",
    )


def _round_unknot() -> PeriodicCurve:
    return PeriodicCurve(
        ambient="R3",
        coords=((FourierTerm(1, 1.0, 0.0),), (FourierTerm(1, 0.0, 1.0),), ()),
        label="round-unknot",
    )


BUILTIN_CURVES = {
    "paper-trefoil": _paper_trefoil,
    "torus-2-3": lambda: _torus_2q(3),
    "torus-2-5": lambda: _torus_2q(5),
    "torus-2-7": lambda: _torus_2q(7),
    "figure-eight": _figure_eight,
    "round-unknot": _round_unknot,
}


def builtin_curve(name: str) -> PeriodicCurve:
    """按名称取内置曲线"""
    factory = BUILTIN_CURVES.get(name)
    if factory is None:
        raise UnknownCurve(f"未知曲线 {name!r}（可用: {', '.join(BUILTIN_CURVES)}）")
    return validate_curve(factory())


def mirror_curve(curve: PeriodicCurve) -> PeriodicCurve:
    """镜像：第一个坐标取反"""
    first = tuple(FourierTerm(t.freq, -t.cos, -t.sin) for t in curve.coords[0])
    return PeriodicCurve(
        ambient=curve.ambient,
        coords=(first,) + tuple(curve.coords[1:]),
        label=f"mirror({curve.label})",
    )


# ==================== 多边形化 ====================

def polygonalize(
    curve: PeriodicCurve, n: int, I: Optional[InversionPoint] = None
) -> ClosedPolygon:
    """取顶点 γ(k/n)，S³ 曲线先经 S_I 投影"""
    if n < 3:
        raise InvalidPolygon(f"多边形至少需要 3 个顶点（n = {n}）")
    points = eval_curve(curve, np.arange(n) / n)
    if curve.ambient == "S3":
        if I is None:
            raise InputError("S³ 曲线多边形化需要反演点 I")
        points = stereographic_project(points, I)
    return ClosedPolygon(points)


def curve_points_r3(
    curve: PeriodicCurve, t: Any, I: Optional[InversionPoint] = None
) -> np.ndarray:
    """把曲线上的参数点映射到 ℝ³（S³ 曲线需要 I）"""
    points = eval_curve(curve, t)
    if curve.ambient == "S3":
        if I is None:
            raise InputError("S³ 曲线需要反演点 I")
        points = stereographic_project(points, I)
    return points


# ==================== JSON 转换 ====================

def curve_from_dict(data: Dict[str, Any]) -> PeriodicCurve:
    """由已校验的 {"ambient", "label", "coords"} 字典构造曲线"""
    coords = tuple(
        tuple(FourierTerm(int(term["freq"]), float(term.get("cos", 0.0)), float(term.get("sin", 0.0)))
              for term in axis)
        for axis in data["coords"]
    )
    curve = PeriodicCurve(ambient=data["ambient"], coords=coords, label=data.get("label", ""))
    return validate_curve(curve)


def curve_to_dict(curve: PeriodicCurve) -> Dict[str, Any]:
    return {
        "ambient": curve.ambient,
        "label": curve.label,
        "coords": [
            [{"freq": t.freq, "cos": t.cos, "sin": t.sin} for t in axis]
            for axis in curve.coords
        ],
    }
