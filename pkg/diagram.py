"""
闭合多边形的通用平面投影与 Gauss 码

所有投影长度容差都在“投影直径 = 1”的归一化坐标下判定；
接近退化的方向直接拒绝（NonGenericDirection），由调用方重新抽取方向。
"""
# 标准库
import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

# 第三方库
import numpy as np
from scipy.spatial.distance import pdist

# 本地模块
import config
from errors import GenericityExhausted, InputError, InvalidPolygon, NonGenericDirection


# ==================== 线段几何 ====================

def segment_distances(
    p0: np.ndarray, p1: np.ndarray, q0: np.ndarray, q1: np.ndarray
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    逐行计算线段 [p0,p1] 与 [q0,q1] 的最近距离（任意维数）

    Returns:
        (距离, s, t)：最近点分别为 p0 + s(p1−p0) 与 q0 + t(q1−q0)
    """
    d1 = p1 - p0
    d2 = q1 - q0
    r = p0 - q0
    a = np.einsum("ij,ij->i", d1, d1)
    e = np.einsum("ij,ij->i", d2, d2)
    b = np.einsum("ij,ij->i", d1, d2)
    c = np.einsum("ij,ij->i", d1, r)
    f = np.einsum("ij,ij->i", d2, r)
    denom = a * e - b * b

    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(denom > 1e-300, np.clip((b * f - c * e) / denom, 0.0, 1.0), 0.0)
        t = (b * s + f) / e
        s = np.where(t < 0.0, np.clip(-c / a, 0.0, 1.0), np.where(t > 1.0, np.clip((b - c) / a, 0.0, 1.0), s))
    t = np.clip(t, 0.0, 1.0)

    gap = (p0 + d1 * s[:, None]) - (q0 + d2 * t[:, None])
    return np.linalg.norm(gap, axis=1), s, t


def nonadjacent_pairs(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """边对 (i, j)，i < j 且两边不共享顶点"""
    i, j = np.triu_indices(n, k=2)
    keep = ~((i == 0) & (j == n - 1))
    return i[keep], j[keep]


# ==================== 闭合多边形 ====================

class ClosedPolygon:
    """ℝ³ 中的闭合多边形，边 i 从顶点 i 指向顶点 i+1（循环）"""

    def __init__(self, vertices: Iterable[Sequence[float]]):
        verts = np.array(vertices, dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 3:
            raise InvalidPolygon(f"顶点必须是 ℝ³ 点列表，收到形状 {verts.shape}")
        if len(verts) < 3:
            raise InvalidPolygon(f"多边形至少需要 3 个顶点（n = {len(verts)}）")
        if not np.all(np.isfinite(verts)):
            raise InvalidPolygon("顶点坐标含非有限值")
        self.vertices = verts
        self.vertices.setflags(write=False)
        self._check_embedding()

    def __len__(self) -> int:
        return len(self.vertices)

    def __repr__(self) -> str:
        return f"ClosedPolygon(n={len(self)})"

    @property
    def edge_starts(self) -> np.ndarray:
        return self.vertices

    @property
    def edge_ends(self) -> np.ndarray:
        return np.roll(self.vertices, -1, axis=0)

    def _check_embedding(self) -> None:
        lengths = np.linalg.norm(self.edge_ends - self.edge_starts, axis=1)
        if lengths.min() <= config.MIN_EDGE_LENGTH:
            raise InvalidPolygon(f"第 {int(lengths.argmin()) + 1} 条边长度为零")

        i, j = nonadjacent_pairs(len(self))
        if i.size == 0:
            return
        starts, ends = self.edge_starts, self.edge_ends
        dist, _, _ = segment_distances(starts[i], ends[i], starts[j], ends[j])
        k = int(dist.argmin())
        if dist[k] <= config.EMBEDDING_TOL:
            raise InvalidPolygon(f"边 {i[k] + 1} 与边 {j[k] + 1} 相交（距离 {dist[k]:.3e}）")

    def mirrored(self) -> "ClosedPolygon":
        """关于 x = 0 平面的镜像"""
        return ClosedPolygon(self.vertices * np.array([-1.0, 1.0, 1.0]))

    def rolled(self, k: int) -> "ClosedPolygon":
        """循环移动起点"""
        return ClosedPolygon(np.roll(self.vertices, -k, axis=0))

    def to_list(self) -> List[List[float]]:
        return self.vertices.tolist()


# ==================== 投影图 ====================

@dataclass(frozen=True)
class Crossing:
    over_edge: int
    under_edge: int
    over_param: float
    under_param: float
    sign: int
    point: Tuple[float, float]  # 投影平面坐标（未归一化）


@dataclass(frozen=True, eq=False)
class KnotDiagram:
    source: ClosedPolygon
    direction: np.ndarray
    basis: np.ndarray                  # 2×3，行 u, v 满足 u × v = direction
    projected: np.ndarray = field(repr=False)  # n×2 顶点像
    crossings: Tuple[Crossing, ...] = ()

    @property
    def crossing_count(self) -> int:
        return len(self.crossings)


def _view_basis(direction: np.ndarray) -> np.ndarray:
    axis = np.zeros(3)
    axis[int(np.argmin(np.abs(direction)))] = 1.0
    u = np.cross(axis, direction)
    u /= np.linalg.norm(u)
    v = np.cross(direction, u)
    return np.vstack([u, v])


def _cross2(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def project_diagram(poly: ClosedPolygon, direction: Sequence[float]) -> KnotDiagram:
    """
    沿 direction 投影（direction 从图指向观察者），求出所有交叉点

    Raises:
        NonGenericDirection: 方向退化，tolerance 字段给出失败的检查项
    """
    view = np.asarray(direction, dtype=float).reshape(-1)
    if view.shape != (3,):
        raise InputError(f"投影方向必须是 ℝ³ 向量，收到形状 {view.shape}")
    norm = np.linalg.norm(view)
    if not norm > 0:
        raise InputError("投影方向不能为零向量")
    view = view / norm

    basis = _view_basis(view)
    verts = poly.vertices
    n = len(verts)
    flat = verts @ basis.T
    depth = verts @ view
    scale = float(pdist(flat).max())
    if not scale > 0:
        raise NonGenericDirection("vertex", "投影退化为一个点")

    pts = flat / scale
    starts, ends = pts, np.roll(pts, -1, axis=0)
    dirs = ends - starts
    lengths = np.linalg.norm(dirs, axis=1)
    if lengths.min() <= config.VERTEX_CLEARANCE:
        raise NonGenericDirection("vertex", "某条边投影后长度过短")

    # 相邻边投影后折返重叠
    nxt = np.roll(dirs, -1, axis=0)
    adj_sine = np.abs(_cross2(dirs, nxt)) / (lengths * np.roll(lengths, -1))
    folded = (adj_sine < config.CROSSING_SINE_TOL) & (np.einsum("ij,ij->i", dirs, nxt) < 0)
    if np.any(folded):
        raise NonGenericDirection("angle", "相邻边投影后重叠")

    crossings: List[Tuple[Tuple[float, int], Crossing]] = []
    i, j = nonadjacent_pairs(n)
    if i.size:
        dist, _, _ = segment_distances(starts[i], ends[i], starts[j], ends[j])
        near = dist <= config.VERTEX_CLEARANCE
        i, j = i[near], j[near]

    points: List[np.ndarray] = []
    for a, b in zip(i.tolist(), j.tolist()):
        denom = _cross2(dirs[a], dirs[b])
        sine = abs(denom) / (lengths[a] * lengths[b])
        if sine < config.CROSSING_SINE_TOL:
            raise NonGenericDirection("angle", f"边 {a + 1} 与边 {b + 1} 投影近乎平行")
        offset = starts[b] - starts[a]
        s = _cross2(offset, dirs[b]) / denom
        t = _cross2(offset, dirs[a]) / denom
        tol = config.VERTEX_CLEARANCE
        if min(s * lengths[a], (1 - s) * lengths[a], t * lengths[b], (1 - t) * lengths[b]) <= tol:
            raise NonGenericDirection("vertex", f"边 {a + 1} 与边 {b + 1} 的交叉点过于靠近顶点")

        za = depth[a] + s * (depth[(a + 1) % n] - depth[a])
        zb = depth[b] + t * (depth[(b + 1) % n] - depth[b])
        if abs(za - zb) / scale <= config.DEPTH_SEPARATION_TOL:
            raise NonGenericDirection("depth", f"边 {a + 1} 与边 {b + 1} 在交叉处深度相同")

        point = starts[a] + s * dirs[a]
        for other in points:
            if np.linalg.norm(point - other) <= tol:
                raise NonGenericDirection("triple", "三条边投影经过同一点")
        points.append(point)

        if za > zb:
            over, under, p_over, p_under = a, b, s, t
        else:
            over, under, p_over, p_under = b, a, t, s
        sign = 1 if _cross2(dirs[over], dirs[under]) > 0 else -1
        first_visit = min((over, p_over), (under, p_under))
        crossings.append((
            first_visit,
            Crossing(over, under, float(p_over), float(p_under), sign,
                     (float(point[0] * scale), float(point[1] * scale))),
        ))

    crossings.sort(key=lambda item: item[0])
    return KnotDiagram(
        source=poly,
        direction=view,
        basis=basis,
        projected=flat,
        crossings=tuple(c for _, c in crossings),
    )


def random_generic_direction(
    poly: ClosedPolygon, seed: int = 0, max_draws: Optional[int] = None
) -> np.ndarray:
    """按种子抽取一个通用投影方向"""
    return generic_diagrams(poly, 1, seed, max_draws)[0].direction


def generic_diagrams(
    poly: ClosedPolygon, count: int, seed: int = 0, max_draws: Optional[int] = None
) -> List[KnotDiagram]:
    """
    用同一个随机数流依次抽取 count 个通用方向的投影图

    Raises:
        GenericityExhausted: 某一个方向连续 max_draws 次失败
    """
    max_draws = config.DIRECTION_MAX_DRAWS if max_draws is None else max_draws
    rng = np.random.default_rng(seed)
    diagrams: List[KnotDiagram] = []
    while len(diagrams) < count:
        last: Optional[NonGenericDirection] = None
        for _ in range(max_draws):
            direction = rng.standard_normal(3)
            try:
                diagrams.append(project_diagram(poly, direction))
                break
            except NonGenericDirection as e:
                last = e
        else:
            raise GenericityExhausted(
                f"连续 {max_draws} 个方向均非通用（最后一次: {last}）"
            )
    return diagrams


# ==================== Gauss 码 ====================

@dataclass(frozen=True)
class GaussSymbol:
    crossing: int
    over: bool
    sign: int

    def __str__(self) -> str:
        return f"{'O' if self.over else 'U'}{self.crossing}{'+' if self.sign > 0 else '-'}"


_SYMBOL_RE = re.compile(r"^([OU])(\d+)([+-])$")


@dataclass(frozen=True)
class GaussCode:
    """单分量 Gauss 码：沿遍历顺序的 2c 个符号"""

    symbols: Tuple[GaussSymbol, ...] = ()

    def __post_init__(self):
        seen = {}
        for sym in self.symbols:
            if sym.sign not in (1, -1):
                raise InputError(f"交叉点 {sym.crossing} 的符号无效: {sym.sign}")
            seen.setdefault(sym.crossing, []).append(sym)
        for cid, visits in seen.items():
            if len(visits) != 2 or visits[0].over == visits[1].over:
                raise InputError(f"交叉点 {cid} 必须恰好出现两次（一上一下）")
            if visits[0].sign != visits[1].sign:
                raise InputError(f"交叉点 {cid} 两次出现的符号不一致")

    def __len__(self) -> int:
        return len(self.symbols)

    def __str__(self) -> str:
        return " ".join(str(s) for s in self.symbols)

    @property
    def crossing_ids(self) -> List[int]:
        return sorted({s.crossing for s in self.symbols})

    def signs(self) -> dict:
        return {s.crossing: s.sign for s in self.symbols}

    def positions(self) -> Tuple[dict, dict]:
        """每个交叉点的 (上穿位置, 下穿位置)"""
        over, under = {}, {}
        for k, s in enumerate(self.symbols):
            (over if s.over else under)[s.crossing] = k
        return over, under

    def rotated(self, k: int) -> "GaussCode":
        """基点后移 k 个符号"""
        if not self.symbols:
            return self
        k %= len(self.symbols)
        return GaussCode(self.symbols[k:] + self.symbols[:k])

    def mirrored(self) -> "GaussCode":
        """镜像：上下互换、符号取反"""
        return GaussCode(tuple(GaussSymbol(s.crossing, not s.over, -s.sign) for s in self.symbols))

    @classmethod
    def parse(cls, text: str) -> "GaussCode":
        """解析 "O1+ U2+ ..." 形式的文本"""
        symbols = []
        for token in text.split():
            match = _SYMBOL_RE.match(token)
            if match is None:
                raise InputError(f"无法解析 Gauss 符号: {token!r}")
            symbols.append(GaussSymbol(int(match.group(2)), match.group(1) == "O",
                                       1 if match.group(3) == "+" else -1))
        return cls(tuple(symbols))


def gauss_code(diagram: KnotDiagram) -> GaussCode:
    """按遍历位置（边序号、边内参数）排列的 Gauss 码，交叉点编号从 1 开始"""
    events = []
    for k, c in enumerate(diagram.crossings, start=1):
        events.append(((c.over_edge, c.over_param), GaussSymbol(k, True, c.sign)))
        events.append(((c.under_edge, c.under_param), GaussSymbol(k, False, c.sign)))
    events.sort(key=lambda item: item[0])
    return GaussCode(tuple(sym for _, sym in events))


def writhe(code: GaussCode) -> int:
    """交叉点符号之和"""
    return int(sum(s.sign for s in code.symbols if s.over))
