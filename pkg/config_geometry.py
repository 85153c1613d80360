"""
构型几何

- 六元组与棱柱构型：对角线 (1,4)、(2,5)、(3,6) 共点的射影残差
- 平面构型：平面拟合与定向、单侧性、类型 1–5、七交叉点模式下的分段数据
- 七条交叉规则、情形高度构造（模板、模板内线性规划、一般线性规划）、好/坏构型判定
- 类型 3：共线点移出直线后的上下模式枚举与抬升
- ε-旋转与平面夹角
"""
# 标准库
import itertools
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

# 第三方库
import numpy as np
from scipy.optimize import linprog
from scipy.spatial.distance import pdist
from scipy.spatial.transform import Rotation

# 本地模块
import config
from curves import InversionPoint, PeriodicCurve, curve_points_r3, eval_curve
from diagram import ClosedPolygon, GaussCode, GaussSymbol
from errors import (
    DegenerateChord,
    HeightsInfeasible,
    InputError,
    MissingCrossing,
    NotCoplanar,
    UnclassifiableConfig,
    UncoveredCase,
    WindowTooLarge,
)
from invariants import KnotClass, classify_hexagon, v2

DIAGONALS = ((0, 3), (1, 4), (2, 5))


# ==================== 六元组 ====================

@dataclass(frozen=True)
class SixTuple:
    """0 ≤ t₁ < … < t₆ < 1，附带所在曲线"""

    t: Tuple[float, ...]
    curve: Optional[PeriodicCurve] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        values = tuple(float(v) for v in self.t)
        object.__setattr__(self, "t", values)
        if len(values) != 6:
            raise InputError(f"六元组需要 6 个参数，收到 {len(values)} 个")
        if not (0.0 <= values[0] and values[-1] < 1.0):
            raise InputError(f"参数必须位于 [0, 1)：{values}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise InputError(f"参数必须严格递增：{values}")

    @classmethod
    def normalized(cls, values: Sequence[float], curve: Optional[PeriodicCurve] = None) -> "SixTuple":
        """任意实数参数按模 1 约化后排序（循环重标号不改变结果）"""
        reduced = np.mod(np.asarray(values, dtype=float), 1.0)
        reduced[reduced >= 1.0] = 0.0
        return cls(tuple(np.sort(reduced).tolist()), curve)

    def as_array(self) -> np.ndarray:
        return np.array(self.t)

    def points(self) -> np.ndarray:
        if self.curve is None:
            raise InputError("六元组未关联曲线")
        return eval_curve(self.curve, self.as_array())

    def shifted(self) -> "SixTuple":
        """循环作用 (t₁,…,t₆) ↦ (t₂,…,t₆,t₁+1)，约化后与原集合相同"""
        values = self.t[1:] + (self.t[0] + 1.0,)
        return SixTuple.normalized(values, self.curve)

    @property
    def min_gap(self) -> float:
        t = self.as_array()
        return float(np.min(np.diff(np.append(t, t[0] + 1.0))))


def cyclic_alignment_error(t: Sequence[float], reference: Sequence[float]) -> float:
    """
    两个六元组在“循环重标号 + 整体平移”意义下的最大分量偏差
    """
    t = np.asarray(t, dtype=float)
    ref = np.asarray(reference, dtype=float)
    best = np.inf
    for r in range(6):
        relabeled = np.concatenate([t[r:], t[:r] + 1.0])
        diff = relabeled - ref
        shift = 0.5 * (diff.max() + diff.min())
        best = min(best, float(np.max(np.abs(diff - shift))))
    return best


# ==================== 射影棱柱残差 ====================

@dataclass
class PrismResidual:
    components: np.ndarray  # 3 个两两项 + 3 个偏离项
    norm: float
    apex: np.ndarray
    apex_at_infinity: bool


def _line_projector(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if np.linalg.norm(a - b) < 1e-12:
        raise DegenerateChord(f"弦的两个端点重合（|Δ| = {np.linalg.norm(a - b):.3e}）")
    homog = np.column_stack([np.append(a, 1.0), np.append(b, 1.0)])
    q, _ = np.linalg.qr(homog)
    return q @ q.T


def _fixed_sign(vec: np.ndarray, reference: Optional[np.ndarray] = None) -> np.ndarray:
    if reference is not None:
        return vec if vec @ reference >= 0 else -vec
    return vec if vec[int(np.argmax(np.abs(vec)))] >= 0 else -vec


def _lowest_direction(matrix: np.ndarray, reference: Optional[np.ndarray] = None) -> np.ndarray:
    _, vecs = np.linalg.eigh(matrix)
    return _fixed_sign(vecs[:, 0], reference)


def _residual_terms(
    points: np.ndarray, anchors: Optional[np.ndarray] = None
) -> Tuple[List[np.ndarray], np.ndarray]:
    """返回 (残差项, 4 个最低特征向量)；anchors 给出时各特征向量与之同向"""
    projectors = [_line_projector(points[i], points[j]) for i, j in DIAGONALS]
    eye = np.eye(points.shape[1] + 1)
    refs = [None] * 4 if anchors is None else list(anchors)
    terms: List[np.ndarray] = []
    directions: List[np.ndarray] = []
    for k, (a, b) in enumerate(((0, 1), (0, 2), (1, 2))):
        q = _lowest_direction(2 * eye - projectors[a] - projectors[b], refs[k])
        directions.append(q)
        terms.append(np.concatenate([(eye - projectors[a]) @ q, (eye - projectors[b]) @ q]))
    q_star = _lowest_direction(3 * eye - sum(projectors), refs[3])
    directions.append(q_star)
    for proj in projectors:
        terms.append((eye - proj) @ q_star)
    return terms, np.array(directions)


def residual_directions(points: np.ndarray, anchors: Optional[np.ndarray] = None) -> np.ndarray:
    """残差所用的 4 个特征向量（4 × (d+1)），可作为相邻迭代的符号锚"""
    _, directions = _residual_terms(np.asarray(points, dtype=float), anchors)
    return directions


def residual_vector(points: np.ndarray, anchors: Optional[np.ndarray] = None) -> np.ndarray:
    """
    最小二乘用的堆叠残差向量，其范数等于 prism_residual 的 norm

    特征向量的符号按 anchors 对齐；不给出时按最大分量为正取号，
    在分量接近并列处可能在相邻点之间翻转。
    """
    terms, _ = _residual_terms(np.asarray(points, dtype=float), anchors)
    return np.concatenate(terms)


def residual_of_points(points: np.ndarray, apex_tol: float = 1e-9) -> PrismResidual:
    """
    六个点的射影棱柱残差

    三条对角线在射影意义下共点（含平行情形）时残差为零。
    """
    terms, directions = _residual_terms(np.asarray(points, dtype=float))
    q_star = directions[-1]
    components = np.array([np.linalg.norm(t) for t in terms])
    at_infinity = abs(q_star[-1]) <= apex_tol
    if at_infinity:
        apex = q_star[:-1] / np.linalg.norm(q_star[:-1])
    else:
        apex = q_star[:-1] / q_star[-1]
    return PrismResidual(components, float(np.linalg.norm(components)), apex, bool(at_infinity))


def prism_residual(tuple_: SixTuple) -> PrismResidual:
    """在曲线所在空间（ℝ³ 或 ℝ⁴）中计算残差"""
    return residual_of_points(tuple_.points())


@dataclass
class PrismConfiguration:
    tuple: SixTuple
    apex: np.ndarray
    apex_at_infinity: bool
    lines: Tuple[Tuple[np.ndarray, np.ndarray], ...]
    residual: float
    class_id: int
    degenerate: bool = False
    iterations: int = 0
    history: List[float] = field(default_factory=list)  # 每个被接受步的残差范数


def shift_class_id(t: Sequence[float]) -> int:
    """
    循环作用的类编号：每次作用使均值增加 1/6，因此 frac(6·mean) 在轨道上不变
    """
    m = 6.0 * float(np.mean(t))
    return int(np.floor(6.0 * (m - np.floor(m)))) % 6


def make_prism_configuration(
    tuple_: SixTuple, degenerate: bool = False, iterations: int = 0
) -> PrismConfiguration:
    points = tuple_.points()
    res = residual_of_points(points)
    return PrismConfiguration(
        tuple=tuple_,
        apex=res.apex,
        apex_at_infinity=res.apex_at_infinity,
        lines=tuple((points[i], points[j]) for i, j in DIAGONALS),
        residual=res.norm,
        class_id=shift_class_id(tuple_.t),
        degenerate=degenerate,
        iterations=iterations,
    )


# ==================== 平面 / 球面拟合 ====================

@dataclass(frozen=True)
class Plane:
    normal: np.ndarray
    offset: float
    scale: float = 1.0

    def signed_distance(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points) @ self.normal - self.offset


def _diameter(points: np.ndarray) -> float:
    return float(pdist(points).max())


def coplanarity_residual(points: np.ndarray) -> Tuple[float, np.ndarray]:
    """(直径归一化后到最佳拟合平面的最大距离, 单位法向)"""
    points = np.asarray(points, dtype=float)
    centered = (points - points.mean(axis=0)) / _diameter(points)
    _, _, vt = np.linalg.svd(centered)
    normal = vt[-1]
    return float(np.max(np.abs(centered @ normal))), normal


def affine_plane_residual(points: np.ndarray) -> float:
    """任意维数下，直径归一化后到最佳拟合仿射 2-平面的最大距离"""
    points = np.asarray(points, dtype=float)
    centered = (points - points.mean(axis=0)) / _diameter(points)
    _, _, vt = np.linalg.svd(centered)
    remainder = centered - (centered @ vt[:2].T) @ vt[:2]
    return float(np.max(np.linalg.norm(remainder, axis=1)))


def cosphericity_residual(points: np.ndarray) -> float:
    """直径归一化后到最小二乘球面的最大径向偏差"""
    points = np.asarray(points, dtype=float)
    scale = _diameter(points)
    pts = (points - points.mean(axis=0)) / scale
    design = np.column_stack([2 * pts, np.ones(len(pts))])
    rhs = np.sum(pts * pts, axis=1)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    center = sol[:-1]
    radius = np.sqrt(max(sol[-1] + center @ center, 0.0))
    return float(np.max(np.abs(np.linalg.norm(pts - center, axis=1) - radius)))


# ==================== 平面构型 ====================

class Sidedness(str, Enum):
    ONE_SIDED = "OneSided"
    TWO_SIDED = "TwoSided"


@dataclass(frozen=True, eq=False)
class PlanarConfiguration:
    points: np.ndarray         # 6×3 原始坐标
    normal: np.ndarray         # 定向单位法向：从 +normal 看 p1,p2,p3 为顺时针
    offset: float
    center: np.ndarray
    scale: float               # 构型直径
    coords: np.ndarray         # 6×2 归一化平面坐标（直径 = 1）
    axes: np.ndarray           # 2×3 平面基 (u, v)，u × v = normal
    coplanarity: float
    labels: Optional[Tuple[Sidedness, ...]] = None

    @property
    def plane(self) -> Plane:
        return Plane(self.normal, self.offset, self.scale)

    def to_plane_coords(self, points: np.ndarray) -> np.ndarray:
        return ((np.asarray(points, dtype=float) - self.center) @ self.axes.T) / self.scale


def _cross2(a: np.ndarray, b: np.ndarray) -> float:
    return float(a[0] * b[1] - a[1] * b[0])


def make_planar_configuration(
    points: Sequence[Sequence[float]],
    labels: Optional[Sequence[Union[str, Sidedness]]] = None,
    tol: Optional[float] = None,
) -> PlanarConfiguration:
    """
    拟合平面、检查共面并定向法向

    Raises:
        NotCoplanar: 归一化残差超过 COPLANAR_TOL
    """
    tol = config.COPLANAR_TOL if tol is None else tol
    pts = np.asarray(points, dtype=float)
    if pts.shape != (6, 3):
        raise InputError(f"平面构型需要 6 个 ℝ³ 点，收到形状 {pts.shape}")
    residual, normal = coplanarity_residual(pts)
    if residual > tol:
        raise NotCoplanar(f"六点不共面（归一化残差 {residual:.3e} > {tol:.1e}）")

    center = pts.mean(axis=0)
    turn = np.cross(pts[1] - pts[0], pts[2] - pts[0])
    if np.linalg.norm(turn) <= config.COLINEAR_TOL * _diameter(pts) ** 2:
        turn = np.cross(pts[2] - pts[0], pts[4] - pts[0])
    if turn @ normal > 0:
        normal = -normal

    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(normal)))] = 1.0
    u = np.cross(axis, normal)
    u /= np.linalg.norm(u)
    v = np.cross(normal, u)
    axes = np.vstack([u, v])
    scale = _diameter(pts)

    parsed = None
    if labels is not None:
        if len(labels) != 6:
            raise InputError("单侧性标签需要 6 个")
        parsed = tuple(Sidedness(x) for x in labels)

    return PlanarConfiguration(
        points=pts,
        normal=normal,
        offset=float(normal @ center),
        center=center,
        scale=scale,
        coords=((pts - center) @ axes.T) / scale,
        axes=axes,
        coplanarity=residual,
        labels=parsed,
    )


def canonical_figure6_points(radius: float = 1.0) -> np.ndarray:
    """单位圆上 0°,120°,240°,60°,300°,180° 的对称七交叉点构型（bad_configuration_points(240) 的特例）"""
    angles = np.radians([0.0, 120.0, 240.0, 60.0, 300.0, 180.0])
    return np.column_stack([radius * np.cos(angles), radius * np.sin(angles), np.zeros(6)])


def bad_configuration_points(third: float = 240.0, spoke: float = 1.0, radius: float = 1.0) -> np.ndarray:
    """
    中心对称的坏构型族：p₁ 在 0°，p₃ 在 third 度，p₂ 在 third/2 度方向、半径 spoke·radius，
    p₄ = −p₃，p₅ = −p₂，p₆ = −p₁

    中心对称给出 ã₁ = l̃₂、ã₂ = l̃₁、ã₃ = l̃₄、ã₄ = l̃₃ 与 b̃ 全为 1/2，两条比值等式化为
    ã₂ = ã₄；p₂ 落在圆心与 p₁p₃ 中点的连线上时恰好成立。third 取 240 附近时保持七交叉点模式。
    """
    if not 180.0 < third < 360.0:
        raise InputError(f"third 必须在 (180, 360) 度内（收到 {third}）")
    if spoke <= 0:
        raise InputError("spoke 必须为正")
    half = np.radians(third / 2.0)
    p1 = np.array([radius, 0.0])
    p2 = spoke * radius * np.array([np.cos(half), np.sin(half)])
    p3 = radius * np.array([np.cos(2 * half), np.sin(2 * half)])
    flat = np.array([p1, p2, p3, -p3, -p2, -p1])
    return np.column_stack([flat, np.zeros(6)])


# ==================== 单侧性 ====================

def one_sidedness(
    curve: PeriodicCurve,
    t: float,
    plane: Plane,
    window: float,
    others: Sequence[float] = (),
    I: Optional[InversionPoint] = None,
    samples: Optional[int] = None,
) -> Sidedness:
    """
    曲线在 γ(t) 处是否穿过平面：σ_π 在去心窗口 (t−h, t+h) 内变号为 TwoSided

    Raises:
        WindowTooLarge: 其他参数落入窗口
        NotCoplanar: γ(t) 不在平面上
    """
    samples = config.ONE_SIDED_SAMPLES if samples is None else samples
    for other in others:
        gap = abs((other - t + 0.5) % 1.0 - 0.5)
        if 0.0 < gap < window:
            raise WindowTooLarge(f"参数 {other:.6f} 落入窗口 ({t - window:.6f}, {t + window:.6f})")

    def sigma(taus: np.ndarray) -> np.ndarray:
        return plane.signed_distance(curve_points_r3(curve, taus, I))

    here = float(sigma(np.array([t]))[0])
    if abs(here) > config.COPLANAR_TOL * plane.scale:
        raise NotCoplanar(f"γ({t}) 到平面的距离为 {here:.3e}")

    offsets = window * np.arange(1, samples + 1) / samples
    # 向中心加密的几何序列用于捕捉贴近 t 的变号
    refine = window * 0.5 ** np.arange(1, 41)
    offsets = np.concatenate([refine, offsets])
    values = np.concatenate([sigma(t - offsets), sigma(t + offsets)])
    zero = 1e-14 * plane.scale
    if np.all(np.abs(values) <= zero):
        warnings.warn(f"曲线在 t = {t} 附近整体落在平面内，按单侧处理", RuntimeWarning)
        return Sidedness.ONE_SIDED
    if values.max() > zero and values.min() < -zero:
        return Sidedness.TWO_SIDED
    return Sidedness.ONE_SIDED


# ==================== 构型类型 ====================

def _circumcircle(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> Tuple[np.ndarray, float]:
    d = 2.0 * _cross2(b - a, c - a)
    ba, ca = b - a, c - a
    ux = (ca[1] * (ba @ ba) - ba[1] * (ca @ ca)) / d
    uy = (ba[0] * (ca @ ca) - ca[0] * (ba @ ba)) / d
    center = a + np.array([ux, uy])
    return center, float(np.linalg.norm(a - center))


def _fit_circle(points: np.ndarray) -> Tuple[np.ndarray, float]:
    design = np.column_stack([2 * points, np.ones(len(points))])
    rhs = np.sum(points * points, axis=1)
    sol, *_ = np.linalg.lstsq(design, rhs, rcond=None)
    center = sol[:2]
    return center, float(np.sqrt(max(sol[2] + center @ center, 0.0)))


def colinear_triples(cfg: PlanarConfiguration, tol: Optional[float] = None) -> List[Tuple[int, int, int]]:
    """所有共线三点（1 起始下标）"""
    tol = config.COLINEAR_TOL if tol is None else tol
    q = cfg.coords
    return [(i + 1, j + 1, k + 1) for i, j, k in itertools.combinations(range(6), 3)
            if abs(_cross2(q[j] - q[i], q[k] - q[i])) <= tol]


def has_colinear_triple(cfg: PlanarConfiguration, tol: Optional[float] = None) -> bool:
    return bool(colinear_triples(cfg, tol))


def _angles(points: np.ndarray, center: np.ndarray) -> np.ndarray:
    d = points - center
    return np.arctan2(d[:, 1], d[:, 0])


def mirror_phase(cfg: PlanarConfiguration) -> float:
    """
    p₄p₅p₆ 相对 p₁p₂p₃ 的镜像轴相位 ψ ∈ [0, π/3)

    两个三角形各自绕外接圆心取角度 θᵢ、φᵢ，镜像轴方向为 (θᵢ + φᵢ)/2 的圆均值，
    再减去 p₁p₂p₃ 的三重对称方向。平面取镜像时 ψ ↦ π/3 − ψ。
    """
    q = cfg.coords
    first_center, _ = _circumcircle(q[0], q[1], q[2])
    second_center, _ = _circumcircle(q[3], q[4], q[5])
    theta = _angles(q[:3], first_center)
    phi = _angles(q[3:], second_center)
    axis = 0.5 * np.angle(np.sum(np.exp(1j * (theta + phi))))
    vertex = np.angle(np.sum(np.exp(3j * theta))) / 3.0
    return float((axis - vertex) % (np.pi / 3.0))


def classify_planar_config(
    cfg: PlanarConfiguration, inversion: Optional[Sequence[float]] = None
) -> int:
    """
    构型类型 1–5，按 (3) 共线三点、(2) 反演像在外接圆上、(1)/(4)/(5) 嵌套圆 的顺序判定

    嵌套圆取三角形 p₁p₂p₃ 与 p₄p₅p₆ 的外接圆（允许重合）。两三角形同向为类型 5；
    反向时按镜像相位区分：|ψ − π/6| ≤ π/12 为类型 1，其余为类型 4。

    Args:
        inversion: 反演点在构型所在 ℝ³ 中的像（可选）

    Raises:
        UnclassifiableConfig: 不属于任何类型
    """
    q = cfg.coords
    if has_colinear_triple(cfg):
        return 3

    if inversion is not None:
        image = np.asarray(inversion, dtype=float)
        if abs(cfg.plane.signed_distance(image)) <= config.COPLANAR_TOL * cfg.scale:
            center, radius = _fit_circle(q)
            local = cfg.to_plane_coords(image)
            if abs(np.linalg.norm(local - center) - radius) <= config.CIRCLE_TOL:
                return 2

    first_center, first_r = _circumcircle(q[0], q[1], q[2])
    second_center, second_r = _circumcircle(q[3], q[4], q[5])
    gap = float(np.linalg.norm(first_center - second_center))
    if gap + min(first_r, second_r) > max(first_r, second_r) + config.NESTING_TOL:
        raise UnclassifiableConfig("p1p2p3 与 p4p5p6 的外接圆不嵌套，且无共线三点或圆上反演像")

    first_turn = _cross2(q[1] - q[0], q[2] - q[0])
    second_turn = _cross2(q[4] - q[3], q[5] - q[3])
    if first_turn * second_turn > 0:
        return 5
    return 1 if abs(mirror_phase(cfg) - np.pi / 6.0) <= np.pi / 12.0 else 4


# ==================== 七交叉点模式与分段数据 ====================

# 边 ℓ_i 从 p_i 指向 p_{i+1}；沿边依次遇到的交叉边
FIGURE6_PATTERN: Dict[int, Tuple[int, ...]] = {
    1: (4, 3),
    2: (6, 5),
    3: (5, 6, 1),
    4: (1, 6),
    5: (3, 2),
    6: (2, 3, 4),
}


@dataclass
class SegmentData:
    crossings: Dict[Tuple[int, int], np.ndarray]          # (i, j), i < j -> 平面坐标交点
    params: Dict[int, List[Tuple[int, float]]]             # 边 -> [(交叉边, 位置)]
    alphas: Dict[Tuple[int, int], float]                   # α_ij：边 i 的第 j 段占比
    lengths: Dict[str, float]                              # a1..a4, b1..b4, l1..l4
    tildes: Dict[str, float]


def _crossing_pairs(q: np.ndarray) -> List[Tuple[int, float, int, float]]:
    """投影六边形的全部真交叉：(边 a, 位置 s, 边 b, 位置 t)，a < b，1 起始"""
    starts, ends = q, np.roll(q, -1, axis=0)
    pairs: List[Tuple[int, float, int, float]] = []
    for a in range(6):
        for b in range(a + 2, 6):
            if a == 0 and b == 5:
                continue
            da, db = ends[a] - starts[a], ends[b] - starts[b]
            denom = _cross2(da, db)
            if abs(denom) < 1e-15:
                continue
            off = starts[b] - starts[a]
            s = _cross2(off, db) / denom
            t = _cross2(off, da) / denom
            if 0.0 < s < 1.0 and 0.0 < t < 1.0:
                pairs.append((a + 1, float(s), b + 1, float(t)))
    return pairs


def _edge_crossings(q: np.ndarray) -> Tuple[Dict[int, List[Tuple[int, float]]], Dict[Tuple[int, int], np.ndarray]]:
    per_edge: Dict[int, List[Tuple[int, float]]] = {i: [] for i in range(1, 7)}
    points: Dict[Tuple[int, int], np.ndarray] = {}
    for a, s, b, t in _crossing_pairs(q):
        per_edge[a].append((b, s))
        per_edge[b].append((a, t))
        points[(a, b)] = q[a - 1] + s * (q[a % 6] - q[a - 1])
    for edge in per_edge.values():
        edge.sort(key=lambda item: item[1])
    return per_edge, points


def segment_data(cfg: PlanarConfiguration) -> SegmentData:
    """
    七交叉点模式下的分段数据

    Raises:
        MissingCrossing: 投影六边形不具备该交叉模式
    """
    q = cfg.coords
    per_edge, points = _edge_crossings(q)
    for edge, partners in FIGURE6_PATTERN.items():
        found = tuple(p for p, _ in per_edge[edge])
        if found != partners:
            raise MissingCrossing(f"边 ℓ{edge} 的交叉顺序为 {list(found)}，应为 {list(partners)}")

    alphas: Dict[Tuple[int, int], float] = {}
    for edge, hits in per_edge.items():
        cuts = [0.0] + [s for _, s in hits] + [1.0]
        for j in range(1, len(cuts)):
            alphas[(edge, j)] = cuts[j] - cuts[j - 1]

    def at(i: int, j: int) -> np.ndarray:
        return points[(min(i, j), max(i, j))]

    def dist(x: np.ndarray, k: int) -> float:
        return float(np.linalg.norm(x - q[k - 1]))

    x14, x25, x36 = at(1, 4), at(2, 5), at(3, 6)
    lengths = {
        "a1": dist(x14, 2), "a2": dist(x14, 1), "a3": dist(x14, 5), "a4": dist(x14, 4),
        "l1": dist(x25, 6), "l2": dist(x25, 5), "l3": dist(x25, 3), "l4": dist(x25, 2),
        "b1": dist(x36, 1), "b2": dist(x36, 6), "b3": dist(x36, 3), "b4": dist(x36, 4),
    }
    pairs = (("a1", "a2"), ("a3", "a4"), ("l1", "l2"), ("l3", "l4"), ("b1", "b2"), ("b3", "b4"))
    tildes: Dict[str, float] = {}
    for x, y in pairs:
        total = lengths[x] + lengths[y]
        tildes[x] = lengths[x] / total
        tildes[y] = lengths[y] / total
    return SegmentData(points, per_edge, alphas, lengths, tildes)


def is_bad_configuration(cfg: PlanarConfiguration, rtol: Optional[float] = None) -> bool:
    """ã₄/ã₂ = l̃₁/l̃₃ 且 ã₃/ã₁ = b̃₃/b̃₂（相对容差）时为坏构型"""
    rtol = config.BAD_RATIO_RTOL if rtol is None else rtol
    t = segment_data(cfg).tildes
    first = np.isclose(t["a4"] / t["a2"], t["l1"] / t["l3"], rtol=rtol, atol=0.0)
    second = np.isclose(t["a3"] / t["a1"], t["b3"] / t["b2"], rtol=rtol, atol=0.0)
    return bool(first and second)


# ==================== 交叉规则 ====================

# (下方边, 上方边)：两边在交叉点处的高度满足 下方 < 上方
CROSSING_RULES = ((1, 4), (3, 1), (6, 2), (5, 2), (3, 5), (6, 3), (6, 4))


def _edge_height_row(edge: int, s: float) -> np.ndarray:
    """边 ℓ_edge 在位置 s 处的高度 (1−s)f_edge + s·f_{edge+1} 的系数"""
    row = np.zeros(6)
    row[edge - 1] += 1.0 - s
    row[edge % 6] += s
    return row


def _rule_row(under: int, over: int, params: Dict[int, List[Tuple[int, float]]]) -> np.ndarray:
    s_under = dict(params[under])[over]
    s_over = dict(params[over])[under]
    return _edge_height_row(under, s_under) - _edge_height_row(over, s_over)


def rule_matrix(segment: SegmentData) -> np.ndarray:
    """7×6 矩阵 D，非镜像规则全部成立当且仅当 D·f < 0"""
    return np.array([_rule_row(under, over, segment.params) for under, over in CROSSING_RULES])


@dataclass
class HeightAssignment:
    f: np.ndarray
    epsilons: Dict[str, float] = field(default_factory=dict)
    rho: Optional[float] = None
    case: Optional[int] = None
    symmetry: str = "identity"
    strategy: str = "template"
    mirrored: bool = False


def _heights(f: Union[HeightAssignment, Sequence[float]]) -> np.ndarray:
    return np.asarray(f.f if isinstance(f, HeightAssignment) else f, dtype=float)


def check_crossing_rules(
    f: Union[HeightAssignment, Sequence[float]],
    cfg: PlanarConfiguration,
    mirrored: bool = False,
    segment: Optional[SegmentData] = None,
) -> bool:
    """七条严格不等式是否全部成立（mirrored 时全部反向）"""
    segment = segment_data(cfg) if segment is None else segment
    values = rule_matrix(segment) @ _heights(f)
    return bool(np.all(values > 0) if mirrored else np.all(values < 0))


# ==================== 对称与情形高度 ====================

SIGMA_R = (6, 5, 4, 3, 2, 1)   # (16)(25)(34)
SIGMA_F = (3, 2, 1, 6, 5, 4)   # (13)(46)
SYMMETRIES = ("identity", "r", "f", "fr")
CASE_BASES = {1: frozenset({3, 4, 6}), 2: frozenset({1, 2, 4}), 3: frozenset({2, 5})}
CASE_EPSILONS = ("epsilon", "epsilon_prime", "epsilon_double_prime")


def apply_symmetry(f: Sequence[float], op: str) -> np.ndarray:
    """f_r = f∘σ_r，f_f = −f∘σ_f，f_fr = −f∘σ_f∘σ_r"""
    f = np.asarray(f, dtype=float)
    if op == "identity":
        return f.copy()
    if op == "r":
        return np.array([f[SIGMA_R[i] - 1] for i in range(6)])
    if op == "f":
        return -np.array([f[SIGMA_F[i] - 1] for i in range(6)])
    if op == "fr":
        return -np.array([f[SIGMA_F[SIGMA_R[i] - 1] - 1] for i in range(6)])
    raise ValueError(f"未知对称操作: {op!r}")


def symmetry_image(indices: Sequence[int], op: str) -> frozenset:
    """零高度位置集合在 op 下的像"""
    if op == "identity":
        return frozenset(indices)
    if op == "r":
        return frozenset(SIGMA_R[i - 1] for i in indices)
    if op == "f":
        return frozenset(SIGMA_F[i - 1] for i in indices)
    if op == "fr":
        return frozenset(SIGMA_R[SIGMA_F[i - 1] - 1] for i in indices)
    raise ValueError(f"未知对称操作: {op!r}")


def case_basis(case: int) -> np.ndarray:
    """6×3 矩阵 M：情形高度 f = M·(ε, ε′, ε″)，各 ε ≥ 0"""
    basis = np.zeros((6, 3))
    if case == 1:
        basis[0, 1], basis[1, 0], basis[4, 2] = -1.0, 1.0, 1.0
    elif case == 2:
        basis[2, 0], basis[4, 1], basis[5, 2] = -1.0, 1.0, -1.0
    elif case == 3:
        basis[0, 1] = basis[5, 1] = -1.0
        basis[2, 0] = basis[3, 0] = -1.0
    else:
        raise ValueError(f"未知情形: {case}")
    return basis


def case_template(case: int, epsilon: float, rho: float) -> Tuple[np.ndarray, Dict[str, float]]:
    """三种情形的原始高度，“≪”用比值 ρ 实现"""
    if case == 1:
        values = (epsilon, epsilon, epsilon / rho)
    elif case == 2:
        values = (epsilon / rho, epsilon, epsilon)
    elif case == 3:
        values = (epsilon / rho, epsilon, 0.0)
    else:
        raise ValueError(f"未知情形: {case}")
    return case_basis(case) @ np.array(values), dict(zip(CASE_EPSILONS, values))


def covering_cases(one_sided: Sequence[int]) -> List[Tuple[int, str]]:
    """所有零高度集合包含 U 的 (情形, 对称操作)"""
    target = frozenset(one_sided)
    return [(case, op) for case, base in CASE_BASES.items() for op in SYMMETRIES
            if target <= symmetry_image(base, op)]


def _rule_margin(matrix: np.ndarray, f: np.ndarray, mirrored: bool) -> float:
    """七条规则中最紧的一条离边界的距离（负数表示有规则不成立）"""
    sign = -1.0 if mirrored else 1.0
    return float(-np.max(sign * matrix @ f))


def _max_margin(
    rows: np.ndarray, bounds: Sequence[Tuple[float, float]]
) -> Optional[Tuple[np.ndarray, float]]:
    """max m  s.t.  rows·x + m ≤ 0，0 ≤ m ≤ 1"""
    a_ub = np.column_stack([rows, np.ones(len(rows))])
    c = np.zeros(a_ub.shape[1])
    c[-1] = -1.0
    result = linprog(c, A_ub=a_ub, b_ub=np.zeros(len(rows)), bounds=list(bounds) + [(0.0, 1.0)], method="highs")
    if result.status != 0:
        return None
    margin = float(result.x[-1])
    if margin <= config.RULE_MARGIN_TOL:
        return None
    return result.x[:-1], margin


def _solve_heights_lp(
    matrix: np.ndarray, one_sided: frozenset, mirrored: bool
) -> Optional[Tuple[np.ndarray, float]]:
    sign = -1.0 if mirrored else 1.0
    bounds = [(0.0, 0.0) if i + 1 in one_sided else (-1.0, 1.0) for i in range(6)]
    return _max_margin(sign * matrix, bounds)


def _solve_template_lp(
    matrix: np.ndarray, basis: np.ndarray, mirrored: bool
) -> Optional[Tuple[np.ndarray, float]]:
    """在情形模板的 ε 空间内（ε ≥ 0）求最大余量"""
    sign = -1.0 if mirrored else 1.0
    return _max_margin(sign * matrix @ basis, [(0.0, 1.0)] * basis.shape[1])


def construct_case_heights(
    cfg: PlanarConfiguration,
    one_sided: Sequence[int] = (),
    mirrored: Optional[bool] = None,
    rho: Optional[float] = None,
) -> HeightAssignment:
    """
    为单侧点集合 U（1 起始下标）构造满足交叉规则的高度

    依次尝试：覆盖 U 的情形模板（ρ 从默认值倍增至 RHO_MAX）；同一模板在 ε 空间内
    的线性规划（保留模板的零点与符号，放开 ε 之间的比例）；六个高度上的一般线性规划。
    mirrored 为 None 时两种手性都尝试（先非镜像）。

    Raises:
        UncoveredCase: U 不在情形族内
        HeightsInfeasible: 三种方式均失败
    """
    rho = config.RHO_DEFAULT if rho is None else rho
    target = frozenset(int(i) for i in one_sided)
    if not target <= frozenset(range(1, 7)):
        raise InputError(f"单侧点下标必须在 1..6 内：{sorted(target)}")
    candidates = covering_cases(target)
    if not candidates:
        orbit = sorted({tuple(sorted(symmetry_image(target, op))) for op in SYMMETRIES})
        raise UncoveredCase(f"单侧点集合 {sorted(target)} 不在情形族内（轨道 {orbit}）", orbit)

    segment = segment_data(cfg)
    matrix = rule_matrix(segment)
    scale = config.HEIGHT_SCALE * cfg.scale
    chiralities = (False, True) if mirrored is None else (bool(mirrored),)

    for flip in chiralities:
        for case, op in candidates:
            r = rho
            while r <= config.RHO_MAX:
                raw, eps = case_template(case, scale, r)
                f = apply_symmetry(raw, op)
                if _rule_margin(matrix, f, flip) > config.RULE_MARGIN_TOL * scale:
                    return HeightAssignment(f, eps, r, case, op, "template", flip)
                r *= 2.0

    for flip in chiralities:
        for case, op in candidates:
            basis = np.column_stack([apply_symmetry(col, op) for col in case_basis(case).T])
            solved = _solve_template_lp(matrix, basis, flip)
            if solved is None:
                continue
            e, _ = solved
            f = basis @ e * scale
            if check_crossing_rules(f, cfg, flip, segment):
                eps = dict(zip(CASE_EPSILONS, (float(x) for x in e * scale)))
                return HeightAssignment(f, eps, None, case, op, "template-lp", flip)

    for flip in chiralities:
        solved = _solve_heights_lp(matrix, target, flip)
        if solved is not None:
            f, margin = solved
            f = f * scale
            return HeightAssignment(f, {"margin": margin * scale}, None, None, "identity", "linprog", flip)

    raise HeightsInfeasible(f"单侧点集合 {sorted(target)} 下找不到满足交叉规则的高度")


def lift_configuration(cfg: PlanarConfiguration, heights: Union[HeightAssignment, Sequence[float]]) -> ClosedPolygon:
    """沿定向法向抬升：p_i + f_i·n"""
    f = _heights(heights)
    return ClosedPolygon(cfg.points + f[:, None] * cfg.normal)


# ==================== 共线构型（类型 3）====================

class ColinearFamily(str, Enum):
    CONSECUTIVE = "consecutive"   # (a, a+1, a+2)
    ALTERNATING = "alternating"   # (a, a+2, a+4)
    SCATTERED = "scattered"


@dataclass
class ColinearConstruction:
    family: ColinearFamily
    line: Tuple[int, int, int]
    moved: int
    configuration: PlanarConfiguration   # 移动后的平面构型，无共线三点
    heights: HeightAssignment
    knot_class: KnotClass


def _cyclic(i: int) -> int:
    return (i - 1) % 6 + 1


def colinear_family(triple: Sequence[int]) -> Tuple[ColinearFamily, Tuple[int, int, int]]:
    """共线三点所属的族，并按族的约定排序（连续三点从 a 开始）"""
    points = frozenset(int(i) for i in triple)
    if len(points) != 3 or not points <= frozenset(range(1, 7)):
        raise InputError(f"共线三点下标无效：{list(triple)}")
    for a in range(1, 7):
        run = (a, _cyclic(a + 1), _cyclic(a + 2))
        if frozenset(run) == points:
            return ColinearFamily.CONSECUTIVE, run
    if points in (frozenset({1, 3, 5}), frozenset({2, 4, 6})):
        a = min(points)
        return ColinearFamily.ALTERNATING, (a, a + 2, a + 4)
    return ColinearFamily.SCATTERED, tuple(sorted(points))


def _move_order(family: ColinearFamily, line: Tuple[int, int, int]) -> Tuple[int, ...]:
    a, b, c = line
    if family is ColinearFamily.CONSECUTIVE:
        return (c, a, b)
    return (a, b, c)


def _zero_heights(family: ColinearFamily, line: Tuple[int, int, int], moved: int) -> frozenset:
    if family is ColinearFamily.CONSECUTIVE:
        return frozenset(line)
    if family is ColinearFamily.ALTERNATING:
        return frozenset(_cyclic(moved + k) for k in (2, 3, 4))
    return frozenset(line) - {moved}


def _shift_off_line(cfg: PlanarConfiguration, line: Tuple[int, int, int], moved: int, side: float) -> np.ndarray:
    """把 moved 沿平面内、垂直于所在直线的方向移动 side·COLINEAR_SHIFT·直径"""
    q = cfg.coords
    a, b = [i for i in line if i != moved]
    d = q[b - 1] - q[a - 1]
    perp = np.array([-d[1], d[0]]) / np.linalg.norm(d)
    points = cfg.points.copy()
    points[moved - 1] += side * config.COLINEAR_SHIFT * cfg.scale * (perp @ cfg.axes)
    return points


def _pattern_code(pairs: Sequence[Tuple[int, float, int, float]], q: np.ndarray, over_first: Sequence[bool]) -> GaussCode:
    """给定每个交叉点上方的边，按遍历顺序写出 Gauss 码"""
    events = []
    for k, ((a, s, b, t), first) in enumerate(zip(pairs, over_first), start=1):
        (over, p_over), (under, p_under) = ((a, s), (b, t)) if first else ((b, t), (a, s))
        d_over = q[over % 6] - q[over - 1]
        d_under = q[under % 6] - q[under - 1]
        sign = 1 if _cross2(d_over, d_under) > 0 else -1
        events.append(((over, p_over), GaussSymbol(k, True, sign)))
        events.append(((under, p_under), GaussSymbol(k, False, sign)))
    events.sort(key=lambda item: item[0])
    return GaussCode(tuple(sym for _, sym in events))


def _pattern_heights(
    cfg: PlanarConfiguration, zeros: frozenset, wanted: Sequence[KnotClass]
) -> Optional[Tuple[np.ndarray, float, KnotClass]]:
    """
    枚举投影六边形全部上下模式，保留 v2 = 1 的模式并用线性规划求高度，
    抬升后的扭结类型在 wanted 中即返回
    """
    q = cfg.coords
    pairs = _crossing_pairs(q)
    bounds = [(0.0, 0.0) if i + 1 in zeros else (-1.0, 1.0) for i in range(6)]
    found: Dict[KnotClass, Tuple[np.ndarray, float, KnotClass]] = {}
    for pattern in itertools.product((True, False), repeat=len(pairs)):
        if v2(_pattern_code(pairs, q, pattern)) != 1:
            continue
        rows = []
        for (a, s, b, t), first in zip(pairs, pattern):
            (over, p_over), (under, p_under) = ((a, s), (b, t)) if first else ((b, t), (a, s))
            rows.append(_edge_height_row(under, p_under) - _edge_height_row(over, p_over))
        solved = _max_margin(np.array(rows), bounds)
        if solved is None:
            continue
        f, margin = solved
        f = f * config.HEIGHT_SCALE * cfg.scale
        knot = classify_hexagon(lift_configuration(cfg, f))
        if knot in wanted and knot not in found:
            found[knot] = (f, margin * config.HEIGHT_SCALE * cfg.scale, knot)
        if wanted[0] in found:
            break
    for knot in wanted:
        if knot in found:
            return found[knot]
    return None


def construct_colinear_heights(
    cfg: PlanarConfiguration,
    one_sided: Sequence[int] = (),
    mirrored: Optional[bool] = None,
) -> ColinearConstruction:
    """
    类型 3 构型：把共线三点中的一点移出直线，再在剩余点上求抬升高度

    连续三点 (a, a+1, a+2) 先移动 a+2，交替三点 (a, a+2, a+4) 先移动 a，其余依次尝试。
    零高度点为：连续族取整条三点，交替族取移动点之后的 +2、+3、+4，分散族取未移动的两点；
    再并上单侧点 U。mirrored 为 None 时优先右手三叶结。

    Raises:
        InputError: 构型没有共线三点
        HeightsInfeasible: 所有移动方式下都找不到三叶结高度
    """
    triples = colinear_triples(cfg)
    if not triples:
        raise InputError("构型没有共线三点，应使用情形高度构造")
    target = frozenset(int(i) for i in one_sided)
    if not target <= frozenset(range(1, 7)):
        raise InputError(f"单侧点下标必须在 1..6 内：{sorted(target)}")
    if mirrored is None:
        wanted = (KnotClass.TREFOIL_RIGHT, KnotClass.TREFOIL_LEFT)
    else:
        wanted = (KnotClass.TREFOIL_LEFT,) if mirrored else (KnotClass.TREFOIL_RIGHT,)

    for triple in triples:
        family, line = colinear_family(triple)
        for moved in _move_order(family, line):
            zeros = _zero_heights(family, line, moved) | target
            for side in (1.0, -1.0):
                moved_cfg = make_planar_configuration(_shift_off_line(cfg, line, moved, side), cfg.labels)
                if has_colinear_triple(moved_cfg):
                    continue
                solved = _pattern_heights(moved_cfg, zeros, wanted)
                if solved is None:
                    continue
                f, margin, knot = solved
                heights = HeightAssignment(
                    f, {"margin": margin, "shift": side * config.COLINEAR_SHIFT * cfg.scale},
                    None, None, "identity", "colinear", knot is KnotClass.TREFOIL_LEFT,
                )
                return ColinearConstruction(family, line, moved, moved_cfg, heights, knot)

    raise HeightsInfeasible(f"共线构型（单侧点 {sorted(target)}）下找不到三叶结高度")


# ==================== ε-旋转与平面夹角 ====================

def epsilon_rotate(
    cfg: Union[PlanarConfiguration, np.ndarray],
    axis_point: Sequence[float],
    axis_direction: Sequence[float],
    epsilon: float,
) -> np.ndarray:
    """绕平面内直线 ℓ 刚性旋转角度 ε"""
    points = cfg.points if isinstance(cfg, PlanarConfiguration) else np.asarray(cfg, dtype=float)
    origin = np.asarray(axis_point, dtype=float)
    direction = np.asarray(axis_direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    if isinstance(cfg, PlanarConfiguration):
        if abs(direction @ cfg.normal) > 1e-9 or abs(cfg.plane.signed_distance(origin)) > config.COPLANAR_TOL * cfg.scale:
            raise InputError("旋转轴必须位于构型平面内")
    rotation = Rotation.from_rotvec(epsilon * direction)
    return rotation.apply(points - origin) + origin


def config_theta(cfg: Union[PlanarConfiguration, Plane], reference_normal: Sequence[float]) -> float:
    """构型平面与参考平面的二面角，取值 [0, π/2]"""
    normal = cfg.normal
    ref = np.asarray(reference_normal, dtype=float)
    ref = ref / np.linalg.norm(ref)
    return float(np.arctan2(np.linalg.norm(np.cross(normal, ref)), abs(normal @ ref)))


# ==================== 导出 ====================

def configuration_export(
    cfg: PlanarConfiguration,
    heights: Optional[HeightAssignment] = None,
    config_type: Optional[int] = None,
    segment: Optional[SegmentData] = None,
) -> Dict[str, Any]:
    """供渲染器使用的构型 JSON"""
    data: Dict[str, Any] = {
        "kind": "configuration",
        "points": cfg.points.tolist(),
        "plane": {"normal": cfg.normal.tolist(), "offset": cfg.offset},
        "coords": cfg.coords.tolist(),
        "labels": [x.value for x in cfg.labels] if cfg.labels else None,
        "type": config_type,
    }
    if segment is not None:
        data["lengths"] = dict(segment.lengths)
        data["fractions"] = {f"{i}{j}": v for (i, j), v in sorted(segment.alphas.items())}
        data["crossings"] = [
            {"edges": [i, j], "point": p.tolist()} for (i, j), p in sorted(segment.crossings.items())
        ]
    if heights is not None:
        data["heights"] = heights.f.tolist()
    return data
