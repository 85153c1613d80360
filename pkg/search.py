"""
内接三叶结搜索与棱柱构型求解

- 分层有序单纯形采样 + 批量交叉数预筛 + 完整分类与复核
- Levenberg–Marquardt 求解棱柱残差
- 预测–校正延拓追踪棱柱构型曲线，并扫描其中的平面构型事件
"""
# 标准库
import hashlib
import json
import pickle
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional, Sequence, Tuple

# 第三方库
import numpy as np
from scipy.linalg import null_space
from scipy.special import softmax
from scipy.stats import qmc
from tqdm import tqdm

# 本地模块
import config
from config_geometry import (
    PlanarConfiguration,
    PrismConfiguration,
    SixTuple,
    affine_plane_residual,
    classify_planar_config,
    config_theta,
    coplanarity_residual,
    cosphericity_residual,
    is_bad_configuration,
    make_planar_configuration,
    make_prism_configuration,
    residual_directions,
    residual_vector,
)
from config_loader import replay_overrides
from curves import (
    InversionPoint,
    PeriodicCurve,
    curve_points_r3,
    curve_to_dict,
    eval_curve,
    random_inversion_point,
    stereographic_project,
)
from diagram import ClosedPolygon, nonadjacent_pairs
from errors import (
    BudgetExhausted,
    DegenerateChord,
    GenericityExhausted,
    InconsistentProjections,
    InputError,
    InvalidPolygon,
    MissingCrossing,
    NoConvergence,
    NotCoplanar,
    OrderingCollapse,
    TangentDegenerate,
    UnclassifiableConfig,
)
from invariants import KnotClass, classify_hexagon


# ==================== 残差与雅可比 ====================

# 通用点处解集的维数：ℝ⁴ 中三线共点余维 5，ℝ³ 中余维 3
EXPECTED_NULL_DIMENSION = {"S3": 1, "R3": 3}

def _residual(curve: PeriodicCurve, t: np.ndarray, anchors: Optional[np.ndarray] = None) -> np.ndarray:
    return residual_vector(eval_curve(curve, t), anchors)


def _anchors(curve: PeriodicCurve, t: np.ndarray, previous: Optional[np.ndarray] = None) -> np.ndarray:
    return residual_directions(eval_curve(curve, t), previous)


def residual_jacobian(
    curve: PeriodicCurve,
    t: np.ndarray,
    h: Optional[float] = None,
    anchors: Optional[np.ndarray] = None,
) -> np.ndarray:
    """中心差分雅可比（列对应六个参数），两侧差分共用 t 处的特征向量符号"""
    h = config.FD_STEP if h is None else h
    anchors = _anchors(curve, t) if anchors is None else anchors
    cols = []
    for k in range(6):
        e = np.zeros(6)
        e[k] = h
        cols.append((_residual(curve, t + e, anchors) - _residual(curve, t - e, anchors)) / (2.0 * h))
    return np.column_stack(cols)


def _ordered(t: np.ndarray) -> bool:
    return bool(np.all(np.diff(t) > 0) and t[-1] - t[0] < 1.0)


def _min_gap(t: np.ndarray) -> float:
    return float(np.min(np.diff(np.append(t, t[0] + 1.0))))


def _null_dimension(jac: np.ndarray) -> Tuple[int, np.ndarray]:
    _, s, vt = np.linalg.svd(jac)
    dim = int(np.sum(s <= config.NULLSPACE_RTOL * s[0])) if s[0] > 0 else 6
    return dim, vt


# ==================== 棱柱求解 ====================

def _to_gap_coordinates(t: np.ndarray) -> np.ndarray:
    """(t₁, log g₁, …, log g₆)，g 为含回绕的六个间隔"""
    gaps = np.diff(np.append(t, t[0] + 1.0))
    return np.concatenate([[t[0]], np.log(gaps)])


def _from_gap_coordinates(x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    gaps = softmax(x[1:])
    return x[0] + np.concatenate([[0.0], np.cumsum(gaps[:-1])]), gaps


def _gap_chain(gaps: np.ndarray) -> np.ndarray:
    """∂t/∂x（6×7）"""
    chain = np.zeros((6, 7))
    chain[:, 0] = 1.0
    dgap = np.diag(gaps) - np.outer(gaps, gaps)
    for k in range(1, 6):
        chain[k, 1:] = dgap[:k].sum(axis=0)
    return chain


def solve_prism(
    curve: PeriodicCurve,
    seed: Sequence[float],
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
) -> PrismConfiguration:
    """
    LM 求解：(JᵀJ + λI)δ = −Jᵀr

    迭代变量为 t₁ 与六个间隔的对数（间隔经 softmax 归一），任意步都保持顺序；
    特征向量符号沿被接受的迭代逐步对齐。

    Raises:
        NoConvergence: 超过最大迭代次数或阻尼停滞
        OrderingCollapse: 被接受的步使两个参数合并
    """
    tol = config.PRISM_TOL if tol is None else tol
    max_iter = config.LM_MAX_ITER if max_iter is None else max_iter
    t = np.asarray(seed.t if isinstance(seed, SixTuple) else seed, dtype=float)
    if t.shape != (6,) or not _ordered(t):
        raise InputError(f"初值必须是严格递增且跨度 < 1 的六个参数：{t.tolist()}")

    x = _to_gap_coordinates(t)
    t, gaps = _from_gap_coordinates(x)
    anchors = _anchors(curve, t)
    r = _residual(curve, t, anchors)
    cost = float(r @ r)
    history = [float(np.sqrt(cost))]
    lam = config.LM_LAMBDA_INIT
    iterations = 0

    while np.sqrt(cost) >= tol:
        if iterations >= max_iter:
            raise NoConvergence(f"{max_iter} 次迭代后残差仍为 {np.sqrt(cost):.3e}")
        jac = residual_jacobian(curve, t, anchors=anchors) @ _gap_chain(gaps)
        grad = jac.T @ r
        normal = jac.T @ jac
        while True:
            delta = np.linalg.lstsq(normal + lam * np.eye(7), -grad, rcond=None)[0]
            candidate, candidate_gaps = _from_gap_coordinates(x + delta)
            accepted = False
            try:
                r_new = _residual(curve, candidate, anchors)
                accepted = float(r_new @ r_new) < cost
            except DegenerateChord:
                accepted = False
            if accepted:
                lam = max(lam / config.LM_LAMBDA_FACTOR, config.LM_LAMBDA_MIN)
                break
            lam *= config.LM_LAMBDA_FACTOR
            if lam > config.LM_LAMBDA_MAX:
                raise NoConvergence(f"阻尼停滞（λ > {config.LM_LAMBDA_MAX:.0e}），残差 {np.sqrt(cost):.3e}")
        x, t, gaps = x + delta, candidate, candidate_gaps
        anchors = _anchors(curve, t, anchors)
        r = _residual(curve, t, anchors)
        cost = float(r @ r)
        history.append(float(np.sqrt(cost)))
        iterations += 1
        if gaps.min() < config.ORDER_GAP_TOL:
            raise OrderingCollapse(f"参数合并（最小间隔 {gaps.min():.3e}）")

    tuple_ = SixTuple.normalized(t, curve)
    null_dim, _ = _null_dimension(residual_jacobian(curve, t))
    planar = affine_plane_residual(eval_curve(curve, t)) <= config.COPLANAR_TOL
    degenerate = planar or null_dim > EXPECTED_NULL_DIMENSION[curve.ambient]
    result = make_prism_configuration(tuple_, degenerate=bool(degenerate), iterations=iterations)
    result.history = history
    return result


# ==================== 延拓 ====================

@dataclass
class TracePoint:
    t: np.ndarray
    residual: float
    arclength: float
    hexagon: np.ndarray                    # ℝ³ 中的六边形顶点
    planarity: float
    coplanar: bool
    cospherical: bool
    knot_class: Optional[str] = None
    non_generic: bool = False
    corrector_iterations: int = 0
    step: float = 0.0


@dataclass
class TraceResult:
    points: List[TracePoint] = field(default_factory=list)
    closed: bool = False
    boundary: Optional[str] = None         # 未闭合时的终止原因

    @property
    def arclength(self) -> float:
        return self.points[-1].arclength if self.points else 0.0

    @property
    def steps(self) -> List[float]:
        return [p.step for p in self.points[1:]]


def make_trace_point(
    hexagon: np.ndarray,
    t: Optional[Sequence[float]] = None,
    residual: float = 0.0,
    arclength: float = 0.0,
    classify: bool = False,
    seed: int = 0,
) -> TracePoint:
    """由 ℝ³ 六边形计算共面 / 共球标记（以及可选的扭结类型）"""
    hexagon = np.asarray(hexagon, dtype=float)
    planarity, _ = coplanarity_residual(hexagon)
    coplanar = planarity <= config.COPLANAR_TOL
    cospherical = cosphericity_residual(hexagon) <= config.COSPHERICAL_TOL
    knot_class, non_generic = None, coplanar
    if classify:
        try:
            knot_class = classify_hexagon(ClosedPolygon(hexagon), seed=seed).value
        except (InvalidPolygon, GenericityExhausted, InconsistentProjections):
            non_generic = True
    return TracePoint(
        t=np.asarray(t if t is not None else np.zeros(6), dtype=float),
        residual=residual,
        arclength=arclength,
        hexagon=hexagon,
        planarity=planarity,
        coplanar=coplanar,
        cospherical=cospherical,
        knot_class=knot_class,
        non_generic=non_generic,
    )


def _cyclic_distance(t: np.ndarray, start: np.ndarray) -> float:
    """到起点任一循环重标号（含整数平移）的距离，不含起点自身"""
    best = np.inf
    for r in range(6):
        base = np.concatenate([start[r:], start[:r] + 1.0])
        m = np.round(np.mean(t - base))
        for shift in (m - 1, m, m + 1):
            if r == 0 and shift == 0:
                continue
            best = min(best, float(np.linalg.norm(t - base - shift)))
    return best


def _correct(
    curve: PeriodicCurve, predicted: np.ndarray, complement: np.ndarray
) -> Optional[Tuple[np.ndarray, float, int]]:
    t = predicted.copy()
    for iteration in range(config.CORRECTOR_MAX_ITER + 1):
        try:
            r = _residual(curve, t)
        except DegenerateChord:
            return None
        norm = float(np.linalg.norm(r))
        if norm < config.CORRECTOR_TOL:
            return t, norm, iteration
        if iteration == config.CORRECTOR_MAX_ITER:
            break
        jac = residual_jacobian(curve, t) @ complement
        y = np.linalg.lstsq(jac, -r, rcond=None)[0]
        t = t + complement @ y
        if not _ordered(t):
            return None
    if norm < config.TRACE_ACCEPT_TOL:
        return t, norm, config.CORRECTOR_MAX_ITER
    return None


def trace_prism_manifold(
    curve: PeriodicCurve,
    start: PrismConfiguration,
    step: Optional[float] = None,
    max_steps: Optional[int] = None,
    I: Optional[InversionPoint] = None,
    classify: bool = True,
    seed: int = 0,
    progress: bool = False,
) -> TraceResult:
    """
    沿棱柱构型曲线做预测–校正延拓

    切向取雅可比零空间，校正在切向正交补内进行；走过足够弧长后回到起点的某个
    循环重标号即判定闭合。

    ℝ³ 曲线上棱柱构型的解集是三维的，没有单一切向，直接拒绝。

    Raises:
        InputError: 曲线在 ℝ³ 中，或起点残差过大
        TangentDegenerate: 某点零空间维数不为 1
    """
    if curve.ambient != "S3":
        raise InputError(
            f"延拓只支持 S³ 曲线：ℝ³ 中的解集维数为 {EXPECTED_NULL_DIMENSION[curve.ambient]}，没有单一切向"
        )
    step = config.TRACE_STEP_INIT if step is None else step
    max_steps = config.TRACE_MAX_STEPS if max_steps is None else max_steps
    if start.residual >= config.TRACE_ACCEPT_TOL:
        raise InputError(f"起点残差 {start.residual:.3e} 过大")
    if curve.ambient == "S3" and I is None:
        I = random_inversion_point(curve, seed)

    def record(t: np.ndarray, residual: float, arclength: float) -> TracePoint:
        hexagon = curve_points_r3(curve, t, I)
        return make_trace_point(hexagon, t, residual, arclength, classify, seed)

    t = start.tuple.as_array()
    origin = t.copy()
    result = TraceResult()
    result.points.append(record(t, start.residual, 0.0))
    tangent_prev: Optional[np.ndarray] = None
    arclength = 0.0
    distances: List[Tuple[float, float]] = []

    bar = tqdm(total=max_steps, desc="延拓", disable=not progress, file=sys.stderr)
    try:
        for _ in range(max_steps):
            dim, vt = _null_dimension(residual_jacobian(curve, t))
            if dim != 1:
                raise TangentDegenerate(dim, f"t = {np.round(t, 6).tolist()} 处零空间维数为 {dim}")
            tangent = vt[-1]
            if tangent_prev is None:
                tangent = tangent if tangent.sum() > 0 else -tangent
            elif tangent @ tangent_prev < 0:
                tangent = -tangent
            complement = null_space(tangent.reshape(1, 6))

            while True:
                corrected = _correct(curve, t + step * tangent, complement)
                if corrected is not None and _min_gap(corrected[0]) >= config.ORDER_GAP_TOL:
                    break
                step *= 0.5
                if step < config.TRACE_STEP_MIN:
                    result.boundary = "ordering-collapse" if corrected is not None else "step-underflow"
                    return result

            t_new, norm, iterations = corrected
            used = step
            arclength += float(np.linalg.norm(t_new - t))
            t, tangent_prev = t_new, tangent
            point = record(t, norm, arclength)
            point.corrector_iterations = iterations
            point.step = used
            result.points.append(point)
            bar.update(1)

            if iterations <= 2:
                step = min(2.0 * step, config.TRACE_STEP_MAX)
            elif iterations > 5:
                step = max(0.5 * step, config.TRACE_STEP_MIN)

            if arclength > config.CLOSURE_MIN_ARCLENGTH:
                d = _cyclic_distance(t, origin)
                distances.append((d, used))
                if d < 0.5 * used:
                    result.closed = True
                    return result
                if len(distances) >= 3:
                    (d0, _), (d1, h1), (d2, _) = distances[-3:]
                    if d1 < d0 and d1 < d2 and d1 < h1:
                        result.closed = True
                        return result
        result.boundary = "max-steps"
        return result
    finally:
        bar.close()


# ==================== 平面事件扫描 ====================

@dataclass
class PlanarEvent:
    index: int
    configuration: PlanarConfiguration
    config_type: Optional[int]
    is_bad: Optional[bool]
    theta: float


@dataclass
class PlanarScan:
    events: List[PlanarEvent] = field(default_factory=list)
    two_plane_condition: bool = False

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def __getitem__(self, k: int) -> PlanarEvent:
        return self.events[k]


def scan_planar_events(trace: TraceResult, inversion: Optional[Sequence[float]] = None) -> PlanarScan:
    """
    每段连续共面的轨迹点取残差最小者作为一个事件，分类并计算相对首个事件平面的夹角
    """
    runs: List[List[int]] = []
    for k, point in enumerate(trace.points):
        if not point.coplanar:
            continue
        if runs and runs[-1][-1] == k - 1:
            runs[-1].append(k)
        else:
            runs.append([k])

    scan = PlanarScan()
    reference: Optional[np.ndarray] = None
    for run in runs:
        index = min(run, key=lambda k: trace.points[k].planarity)
        try:
            cfg = make_planar_configuration(trace.points[index].hexagon)
        except NotCoplanar:
            continue
        try:
            config_type = classify_planar_config(cfg, inversion)
        except UnclassifiableConfig:
            config_type = None
        try:
            bad = is_bad_configuration(cfg)
        except MissingCrossing:
            bad = None
        if reference is None:
            reference = cfg.normal
        scan.events.append(PlanarEvent(index, cfg, config_type, bad, config_theta(cfg, reference)))

    thetas = [e.theta for e in scan.events]
    scan.two_plane_condition = any(
        abs(a - b) > config.ANGLE_TOL for i, a in enumerate(thetas) for b in thetas[i + 1:]
    )
    return scan


# ==================== 检查点管理 ====================

class CheckpointManager:
    """管理搜索进度的检查点（已完成的任务块）"""

    def __init__(self, checkpoint_dir: Optional[Path] = None, save_interval: int = 8):
        """
        Args:
            checkpoint_dir: 检查点保存目录
            save_interval: 每完成多少个任务块保存一次检查点
        """
        self.checkpoint_dir = Path(checkpoint_dir or config.CHECKPOINT_DIR)
        self.checkpoint_dir.mkdir(parents=True, exist_ok=True)
        self.save_interval = save_interval

    def get_checkpoint_path(self, run_key: str) -> Path:
        """获取指定搜索任务的检查点文件路径"""
        return self.checkpoint_dir / f"{run_key}_checkpoint.pkl"

    def save_checkpoint(self, run_key: str, outcomes: Dict[int, Any], elapsed: float) -> None:
        """保存检查点"""
        data = {
            "outcomes": outcomes,
            "completed": sorted(outcomes),
            "elapsed": elapsed,
            "timestamp": time.time(),
        }
        try:
            with open(self.get_checkpoint_path(run_key), "wb") as f:
                pickle.dump(data, f)
        except Exception as e:
            print(f"⚠ 保存检查点失败: {e}", file=sys.stderr)

    def load_checkpoint(self, run_key: str) -> Optional[Dict[str, Any]]:
        """加载检查点"""
        path = self.get_checkpoint_path(run_key)
        if not path.exists():
            return None
        try:
            with open(path, "rb") as f:
                return pickle.load(f)
        except Exception as e:
            print(f"⚠ 加载检查点失败: {e}", file=sys.stderr)
            return None

    def clear_checkpoint(self, run_key: str) -> None:
        """清除检查点文件"""
        path = self.get_checkpoint_path(run_key)
        if path.exists():
            try:
                path.unlink()
            except Exception as e:
                print(f"⚠ 删除检查点失败: {e}", file=sys.stderr)


# ==================== 搜索数据结构 ====================

class SearchTarget(str, Enum):
    ANY = "any"
    LEFT = "left"
    RIGHT = "right"
    BOTH = "both"

    def satisfied(self, left: int, right: int) -> bool:
        if self is SearchTarget.ANY:
            return left + right > 0
        if self is SearchTarget.LEFT:
            return left > 0
        if self is SearchTarget.RIGHT:
            return right > 0
        return left > 0 and right > 0


@dataclass
class SearchBudget:
    max_samples: int = config.DEFAULT_BUDGET
    seed: int = 0
    refinement_steps: int = config.DEFAULT_REFINEMENT_STEPS
    target: SearchTarget = SearchTarget.ANY

    def __post_init__(self):
        self.target = SearchTarget(self.target)
        if self.max_samples < 1:
            raise InputError(f"采样预算必须 ≥ 1（收到 {self.max_samples}）")
        if self.refinement_steps < 0:
            raise InputError("局部细化步数不能为负")


@dataclass
class Find:
    t: List[float]
    knot_class: str
    verification_directions: int
    prism_residual: Optional[float]
    chunk: int
    origin: str = "sample"

    def to_record(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "class": self.knot_class,
            "verification_directions": self.verification_directions,
            "residuals": {"prism": self.prism_residual},
            "chunk": self.chunk,
            "origin": self.origin,
        }


@dataclass
class SearchStats:
    samples: int = 0
    prefiltered: int = 0
    classified: int = 0
    unknots: int = 0
    left: int = 0
    right: int = 0
    other: int = 0
    failures: int = 0
    refinements: int = 0
    chunks: int = 0

    def merge(self, other: "SearchStats") -> None:
        for key, value in asdict(other).items():
            setattr(self, key, getattr(self, key) + value)


@dataclass
class SearchResult:
    finds: List[Find] = field(default_factory=list)
    stats: SearchStats = field(default_factory=SearchStats)
    target_met: bool = False
    wall_time: float = 0.0

    def counts(self) -> Dict[str, int]:
        left = sum(f.knot_class == KnotClass.TREFOIL_LEFT.value for f in self.finds)
        right = sum(f.knot_class == KnotClass.TREFOIL_RIGHT.value for f in self.finds)
        return {"left": left, "right": right}


@dataclass
class ChunkOutcome:
    index: int
    finds: List[Find]
    stats: SearchStats


# ==================== 采样与预筛 ====================

def sample_ordered_tuples(rng: np.random.Generator, count: int) -> np.ndarray:
    """拉丁超立方样本逐行排序，得到有序单纯形上的分层样本"""
    sampler = qmc.LatinHypercube(d=6, seed=rng)
    return np.sort(sampler.random(count), axis=1)


def hexagon_points(
    curve: PeriodicCurve, t: np.ndarray, I: Optional[InversionPoint]
) -> Tuple[np.ndarray, np.ndarray]:
    """(有效行掩码, ℝ³ 六边形顶点)；S³ 曲线上离 I 过近的行被剔除"""
    raw = eval_curve(curve, t)
    if curve.ambient == "R3":
        return np.ones(len(t), dtype=bool), raw
    gap = np.linalg.norm(raw - I.point, axis=-1).min(axis=1)
    mask = gap >= config.INVERSION_CLEARANCE
    points = np.zeros(raw.shape[:-1] + (3,))
    if mask.any():
        points[mask] = stereographic_project(raw[mask], I)
    return mask, points


def batch_crossing_counts(hexagons: np.ndarray, direction: np.ndarray) -> np.ndarray:
    """沿同一方向投影一批六边形，统计每个的真交叉数"""
    direction = direction / np.linalg.norm(direction)
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(direction)))] = 1.0
    u = np.cross(axis, direction)
    u /= np.linalg.norm(u)
    v = np.cross(direction, u)
    flat = np.stack([hexagons @ u, hexagons @ v], axis=-1)
    starts, ends = flat, np.roll(flat, -1, axis=1)
    dirs = ends - starts

    counts = np.zeros(len(hexagons), dtype=int)
    for a, b in zip(*nonadjacent_pairs(6)):
        da, db = dirs[:, a], dirs[:, b]
        off = starts[:, b] - starts[:, a]
        denom = da[:, 0] * db[:, 1] - da[:, 1] * db[:, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (off[:, 0] * db[:, 1] - off[:, 1] * db[:, 0]) / denom
            t = (off[:, 0] * da[:, 1] - off[:, 1] * da[:, 0]) / denom
        counts += ((s > 0) & (s < 1) & (t > 0) & (t < 1)).astype(int)
    return counts


def _classify_tuple(
    curve: PeriodicCurve,
    t: np.ndarray,
    hexagon: np.ndarray,
    rng: np.random.Generator,
    stats: SearchStats,
    chunk: int,
    origin: str,
) -> Optional[Find]:
    stats.classified += 1
    try:
        poly = ClosedPolygon(hexagon)
        knot_class = classify_hexagon(poly, seed=int(rng.integers(2**32)))
        if knot_class.is_trefoil:
            check = classify_hexagon(poly, directions=config.VERIFY_DIRECTIONS, seed=int(rng.integers(2**32)))
            if check is not knot_class:
                raise InconsistentProjections("复核结果与首次分类不一致")
    except (InvalidPolygon, GenericityExhausted, InconsistentProjections):
        stats.failures += 1
        return None

    if knot_class is KnotClass.UNKNOT:
        stats.unknots += 1
        return None
    if knot_class is KnotClass.OTHER:
        stats.other += 1
        return None
    if knot_class is KnotClass.TREFOIL_LEFT:
        stats.left += 1
    else:
        stats.right += 1

    try:
        residual = float(np.linalg.norm(_residual(curve, t)))
    except DegenerateChord:
        residual = None
    return Find([float(x) for x in t], knot_class.value, config.VERIFY_DIRECTIONS, residual, chunk, origin)


def _search_chunk(
    curve: PeriodicCurve,
    I: Optional[InversionPoint],
    index: int,
    seed_seq: np.random.SeedSequence,
    count: int,
    refinement_steps: int,
) -> ChunkOutcome:
    rng = np.random.default_rng(seed_seq)
    stats = SearchStats(samples=count, chunks=1)
    finds: List[Find] = []

    tuples = sample_ordered_tuples(rng, count)
    valid = np.min(np.diff(tuples, axis=1), axis=1) > config.ORDER_GAP_TOL
    mask, hexagons = hexagon_points(curve, tuples, I)
    valid &= mask
    direction = rng.standard_normal(3)
    crossing_counts = batch_crossing_counts(hexagons, direction)
    candidates = np.flatnonzero(valid & (crossing_counts >= 3))
    stats.prefiltered = int(np.sum(valid & (crossing_counts < 3)))
    stats.failures += int(np.sum(~valid))

    for k in candidates:
        found = _classify_tuple(curve, tuples[k], hexagons[k], rng, stats, index, "sample")
        if found is None:
            continue
        finds.append(found)
        base = np.array(found.t)
        for _ in range(refinement_steps):
            stats.refinements += 1
            moved = SixTuple.normalized(base + config.REFINE_SIGMA * rng.standard_normal(6)).as_array()
            if _min_gap(moved) <= config.ORDER_GAP_TOL:
                continue
            ok, hexagon = hexagon_points(curve, moved[None, :], I)
            if not ok[0]:
                continue
            refined = _classify_tuple(curve, moved, hexagon[0], rng, stats, index, "refine")
            if refined is not None:
                finds.append(refined)
    return ChunkOutcome(index, finds, stats)


def _worker_init(overrides: Mapping[str, float]) -> None:
    """工作进程初始化：重放容差覆盖"""
    replay_overrides(overrides)


def _run_chunk(args: Tuple) -> ChunkOutcome:
    return _search_chunk(*args)


# ==================== 搜索主流程 ====================

def search_run_key(curve: PeriodicCurve, budget: SearchBudget, I: Optional[InversionPoint]) -> str:
    payload = {
        "curve": curve_to_dict(curve),
        "budget": [budget.max_samples, budget.seed, budget.refinement_steps, budget.target.value],
        "chunk": config.SEARCH_CHUNK_SIZE,
        "I": I.to_list() if I is not None else None,
    }
    digest = hashlib.sha1(json.dumps(payload, sort_keys=True).encode("utf-8")).hexdigest()[:16]
    return f"{curve.label or 'curve'}_{digest}"


def find_inscribed_trefoils(
    curve: PeriodicCurve,
    budget: SearchBudget,
    I: Optional[InversionPoint] = None,
    workers: int = 1,
    checkpoint_manager: Optional[CheckpointManager] = None,
    resume: bool = False,
    progress: bool = True,
    on_find: Optional[Callable[[Find], None]] = None,
    overrides: Optional[Mapping[str, float]] = None,
    strict: bool = False,
) -> SearchResult:
    """
    在曲线上搜索内接三叶结

    任务块按块序合并，达到目标后在对应的发现处截断，结果与进程数无关。

    Args:
        workers: 进程数，1 为单进程模式
        checkpoint_manager: 提供时按 CHECKPOINT_SAVE_INTERVAL 保存已完成的块
        resume: 从检查点恢复已完成的块
        on_find: 每个按序确定的发现的回调（用于流式输出）
        overrides: 需要在工作进程中重放的容差覆盖
        strict: 目标未达成时抛出 BudgetExhausted（携带部分结果）

    Returns:
        SearchResult
    """
    if curve.ambient == "S3" and I is None:
        I = random_inversion_point(curve, budget.seed)

    chunk_size = config.SEARCH_CHUNK_SIZE
    n_chunks = -(-budget.max_samples // chunk_size)
    sizes = [min(chunk_size, budget.max_samples - k * chunk_size) for k in range(n_chunks)]
    seeds = np.random.SeedSequence(budget.seed).spawn(n_chunks)
    run_key = search_run_key(curve, budget, I)

    outcomes: Dict[int, ChunkOutcome] = {}
    elapsed_before = 0.0
    if checkpoint_manager is not None and resume:
        saved = checkpoint_manager.load_checkpoint(run_key)
        if saved:
            outcomes.update(saved["outcomes"])
            elapsed_before = saved.get("elapsed", 0.0)
            print(f"✓ 从检查点恢复 {len(outcomes)} 个已完成的任务块", file=sys.stderr)

    result = SearchResult()
    start_time = time.time()
    next_index = 0
    left = right = 0
    since_save = 0

    def flush() -> bool:
        """按块序合并已完成的结果；达到目标时返回 True"""
        nonlocal next_index, left, right
        while next_index in outcomes:
            outcome = outcomes[next_index]
            result.stats.merge(outcome.stats)
            for find in outcome.finds:
                result.finds.append(find)
                if on_find is not None:
                    on_find(find)
                if find.knot_class == KnotClass.TREFOIL_LEFT.value:
                    left += 1
                else:
                    right += 1
                if budget.target.satisfied(left, right):
                    result.target_met = True
                    return True
            next_index += 1
        return False

    def completed(outcome: ChunkOutcome) -> None:
        nonlocal since_save
        outcomes[outcome.index] = outcome
        since_save += 1
        if checkpoint_manager is not None and since_save >= checkpoint_manager.save_interval:
            checkpoint_manager.save_checkpoint(run_key, outcomes, elapsed_before + time.time() - start_time)
            since_save = 0

    pending = [k for k in range(n_chunks) if k not in outcomes]
    tasks = {k: (curve, I, k, seeds[k], sizes[k], budget.refinement_steps) for k in pending}
    done = flush()

    with tqdm(total=n_chunks, initial=n_chunks - len(pending), desc="搜索进度",
              disable=not progress, file=sys.stderr) as bar:
        if not done and workers <= 1:
            for k in pending:
                completed(_run_chunk(tasks[k]))
                bar.update(1)
                if flush():
                    done = True
                    break
        elif not done:
            executor = ProcessPoolExecutor(
                max_workers=workers,
                initializer=_worker_init,
                initargs=(dict(overrides or {}),),
            )
            try:
                futures = {executor.submit(_run_chunk, tasks[k]): k for k in pending}
                for future in as_completed(futures):
                    completed(future.result())
                    bar.update(1)
                    if flush():
                        done = True
                        break
            finally:
                executor.shutdown(wait=True, cancel_futures=True)

    result.wall_time = elapsed_before + time.time() - start_time
    if checkpoint_manager is not None:
        if done or next_index >= n_chunks:
            checkpoint_manager.clear_checkpoint(run_key)
        else:
            checkpoint_manager.save_checkpoint(run_key, outcomes, result.wall_time)

    if not result.target_met and strict:
        raise BudgetExhausted(
            f"预算 {budget.max_samples} 用尽，目标 {budget.target.value} 未达成", result
        )
    return result
