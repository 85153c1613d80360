"""
扭结不变量

- Kauffman 括号（状态和）与归一化 Jones 多项式（变量 A）
- Gauss 图弦模式公式 v2（= Conway 多项式 z² 系数 a₂）与手性不变量 v3
- 拆接关系递归（下降图算法）得到的 Jones 多项式与 Conway 多项式，作为独立校验
- 六边形分类与曲线 a₂
"""
# 标准库
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

# 本地模块
import config
from curves import PeriodicCurve, InversionPoint, polygonalize, random_inversion_point
from diagram import ClosedPolygon, GaussCode, GaussSymbol, KnotDiagram, gauss_code, generic_diagrams, writhe
from errors import (
    InconsistentProjections,
    InputError,
    InvalidPolygon,
    TooManyCrossings,
    UnstableInvariant,
)


# ==================== Laurent 多项式 ====================

class LaurentPoly:
    """整数系数 Laurent 多项式，不存储零系数"""

    __slots__ = ("terms", "var")

    def __init__(self, terms: Optional[Mapping[int, int]] = None, var: str = "A"):
        self.terms: Dict[int, int] = {int(e): int(c) for e, c in (terms or {}).items() if c}
        self.var = var

    @classmethod
    def monomial(cls, exponent: int, coeff: int = 1, var: str = "A") -> "LaurentPoly":
        return cls({exponent: coeff}, var)

    @classmethod
    def one(cls, var: str = "A") -> "LaurentPoly":
        return cls({0: 1}, var)

    def _coerce(self, other: Union["LaurentPoly", int]) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        if isinstance(other, int):
            return LaurentPoly({0: other}, self.var)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0) + c
        return LaurentPoly(out, self.var)

    __radd__ = __add__

    def __neg__(self):
        return LaurentPoly({e: -c for e, c in self.terms.items()}, self.var)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out: Dict[int, int] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                out[e1 + e2] = out.get(e1 + e2, 0) + c1 * c2
        return LaurentPoly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("只支持非负整数次幂")
        result = LaurentPoly.one(self.var)
        for _ in range(k):
            result = result * self
        return result

    def __eq__(self, other):
        if isinstance(other, int):
            other = LaurentPoly({0: other}, self.var)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        return f"LaurentPoly({self}, var={self.var!r})"

    def __str__(self):
        if not self.terms:
            return "0"
        parts = []
        for e in sorted(self.terms, reverse=True):
            c = self.terms[e]
            mag = abs(c)
            if e == 0:
                body = str(mag)
            else:
                power = self.var if e == 1 else f"{self.var}^{e}"
                body = power if mag == 1 else f"{mag}{power}"
            parts.append(("-" if c < 0 else "+", body))
        head_sign, head = parts[0]
        text = ("-" if head_sign == "-" else "") + head
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def is_one(self) -> bool:
        return self.terms == {0: 1}

    def mirror(self) -> "LaurentPoly":
        """变量取倒数 v ↦ v⁻¹"""
        return LaurentPoly({-e: c for e, c in self.terms.items()}, self.var)

    def rescale(self, factor: int, var: str) -> "LaurentPoly":
        """指数乘以 factor 并改名变量（如 s = A⁻² 对应 factor = −2）"""
        return LaurentPoly({e * factor: c for e, c in self.terms.items()}, var)

    def to_dict(self) -> Dict[str, int]:
        return {str(e): c for e, c in sorted(self.terms.items())}

    @classmethod
    def from_dict(cls, data: Mapping[str, int], var: str = "A") -> "LaurentPoly":
        return cls({int(e): int(c) for e, c in data.items()}, var)


# ==================== 状态和 ====================

def _code_of(item: Union[KnotDiagram, GaussCode]) -> GaussCode:
    return item if isinstance(item, GaussCode) else gauss_code(item)


def _find(parent: List[int], x: int) -> int:
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


def kauffman_bracket(diagram: Union[KnotDiagram, GaussCode]) -> LaurentPoly:
    """
    ⟨K⟩ = Σ_states A^{#A − #B} d^{loops − 1}，d = −A² − A⁻²

    弧 k 从第 k 个符号走到第 k+1 个符号；每个交叉点的两种平滑把四个弧端两两相连。
    """
    code = _code_of(diagram)
    ids = code.crossing_ids
    c = len(ids)
    if c > config.MAX_STATE_SUM_CROSSINGS:
        raise TooManyCrossings(f"交叉数 {c} 超过状态和上限 {config.MAX_STATE_SUM_CROSSINGS}")
    if c == 0:
        return LaurentPoly.one("A")

    m = 2 * c
    over, under = code.positions()
    signs = code.signs()
    smoothings = []
    for cid in ids:
        ui, uo = (under[cid] - 1) % m, under[cid]
        oi, oo = (over[cid] - 1) % m, over[cid]
        pair_a = ((oo, ui), (uo, oi))
        pair_b = ((oo, uo), (oi, ui))
        smoothings.append((pair_a, pair_b) if signs[cid] > 0 else (pair_b, pair_a))

    d = LaurentPoly({2: -1, -2: -1}, "A")
    loop_counts: Counter = Counter()
    for state in range(1 << c):
        parent = list(range(m))
        n_a = 0
        for k, (pair_a, pair_b) in enumerate(smoothings):
            if (state >> k) & 1:
                pairs = pair_b
            else:
                pairs = pair_a
                n_a += 1
            for x, y in pairs:
                rx, ry = _find(parent, x), _find(parent, y)
                if rx != ry:
                    parent[rx] = ry
        loops = len({_find(parent, x) for x in range(m)})
        loop_counts[(n_a - (c - n_a), loops)] += 1

    total = LaurentPoly({}, "A")
    for (exponent, loops), count in loop_counts.items():
        total = total + LaurentPoly.monomial(exponent, count, "A") * d ** (loops - 1)
    return total


def jones_normalized(diagram: Union[KnotDiagram, GaussCode]) -> LaurentPoly:
    """(−A)^(−3w)·⟨K⟩，合痕不变量"""
    code = _code_of(diagram)
    w = writhe(code)
    factor = LaurentPoly.monomial(-3 * w, -1 if w % 2 else 1, "A")
    return factor * kauffman_bracket(code)


RIGHT_TREFOIL_CODE = "O1+ U2+ O3+ U1+ O2+ U3+"


@lru_cache(maxsize=None)
def trefoil_reference(handedness: str = "right") -> LaurentPoly:
    """右手三叶结 = 标准 3 交叉图 writhe +3；左手取镜像"""
    right = jones_normalized(GaussCode.parse(RIGHT_TREFOIL_CODE))
    if handedness == "right":
        return right
    if handedness == "left":
        return right.mirror()
    raise ValueError(f"未知手性: {handedness!r}")


# ==================== Gauss 图公式 ====================

def _chord_v2(symbols: Sequence[GaussSymbol]) -> int:
    """只计两端都在 symbols 中的交叉点（多分量时即该分量自身的交叉）"""
    over, under, signs = {}, {}, {}
    for k, s in enumerate(symbols):
        (over if s.over else under)[s.crossing] = k
        signs[s.crossing] = s.sign
    chords = [c for c in over if c in under]
    total = 0
    for a in chords:
        for b in chords:
            if a != b and under[b] < over[a] < over[b] < under[a]:
                total += signs[a] * signs[b]
    return total


def v2(code: GaussCode) -> int:
    """
    计数满足 U(b) < O(a) < O(b) < U(a) 的交叉点对，累加 sign(a)·sign(b)
    """
    return _chord_v2(code.symbols)


# ==================== 拆接关系递归 ====================

Component = Tuple[GaussSymbol, ...]


def _first_bad_crossing(components: Sequence[Component]) -> Optional[int]:
    seen = set()
    for comp in components:
        for sym in comp:
            if sym.crossing in seen:
                continue
            seen.add(sym.crossing)
            if not sym.over:
                return sym.crossing
    return None


def _switch(components: Sequence[Component], cid: int) -> List[Component]:
    return [
        tuple(GaussSymbol(s.crossing, not s.over, -s.sign) if s.crossing == cid else s for s in comp)
        for comp in components
    ]


def _smooth(components: Sequence[Component], cid: int) -> List[Component]:
    """在交叉点 cid 处做定向平滑"""
    hits = [(ci, k) for ci, comp in enumerate(components) for k, s in enumerate(comp) if s.crossing == cid]
    (c1, p), (c2, q) = hits
    out = list(components)
    if c1 == c2:
        comp = components[c1]
        inner = comp[p + 1:q]
        outer = comp[q + 1:] + comp[:p]
        out[c1:c1 + 1] = [inner, outer]
    else:
        first, second = components[c1], components[c2]
        merged = first[p + 1:] + first[:p] + second[q + 1:] + second[:q]
        out[c1] = merged
        del out[c2]
    return out


def _skein(components: Tuple[Component, ...], kind: str, cache: dict):
    key = components
    if key in cache:
        return cache[key]

    cid = _first_bad_crossing(components)
    k = len(components)
    if cid is None:
        # 下降图：k 分量平凡链环
        if kind == "jones":
            result = LaurentPoly({1: -1, -1: -1}, "s") ** (k - 1)
        else:
            result = LaurentPoly.one("z") if k == 1 else LaurentPoly({}, "z")
        cache[key] = result
        return result

    sign = next(s.sign for comp in components for s in comp if s.crossing == cid)
    switched = _skein(tuple(_switch(components, cid)), kind, cache)
    smoothed = _skein(tuple(_smooth(components, cid)), kind, cache)

    if kind == "jones":
        if sign > 0:
            # V₊ = s⁴V₋ + (s³ − s)V₀
            result = LaurentPoly.monomial(4, 1, "s") * switched + LaurentPoly({3: 1, 1: -1}, "s") * smoothed
        else:
            # V₋ = s⁻⁴V₊ − (s⁻¹ − s⁻³)V₀
            result = LaurentPoly.monomial(-4, 1, "s") * switched - LaurentPoly({-1: 1, -3: -1}, "s") * smoothed
    else:
        z = LaurentPoly.monomial(1, 1, "z")
        result = switched + z * smoothed if sign > 0 else switched - z * smoothed
    cache[key] = result
    return result


def _components_of(code: Union[GaussCode, Sequence[GaussCode]]) -> Tuple[Component, ...]:
    if isinstance(code, GaussCode):
        return (tuple(code.symbols),)
    return tuple(tuple(c) if not isinstance(c, GaussCode) else tuple(c.symbols) for c in code)


def jones_skein(code: Union[GaussCode, Sequence[Sequence[GaussSymbol]]]) -> LaurentPoly:
    """拆接关系计算 Jones 多项式，变量 s = t^{1/2}；可传入多分量符号序列"""
    return _skein(_components_of(code), "jones", {})


def conway_polynomial(code: Union[GaussCode, Sequence[Sequence[GaussSymbol]]]) -> LaurentPoly:
    """∇₊ − ∇₋ = z∇₀，平凡扭结 1，多分量平凡链环 0"""
    return _skein(_components_of(code), "conway", {})


def _linking(first: Component, second: Component) -> int:
    """两分量间交叉点符号和的一半"""
    signs = {s.crossing: s.sign for s in first}
    shared = {s.crossing for s in second} & set(signs)
    return sum(signs[c] for c in shared) // 2


def v3(code: GaussCode) -> int:
    """
    Gauss 图弦模式计算的三阶不变量，右手三叶结为 +1，左手为 −1

    从基点出发，逐个翻转第一个先下穿的交叉点 c 直到得到下降图（v3 = 0）。
    每次翻转的跳跃
        v3(K₊) − v3(K₋) = (lk² + lk)/2 + v2(K₋) − v2(K₀′) − v2(K₀″)
    其中 K₀ = K₀′ ∪ K₀″ 为 c 处的定向平滑，lk 为两分量的环绕数，
    各项 v2 都由弦对公式给出，不经过 Jones 多项式。
    """
    symbols: Component = tuple(code.symbols)
    total = 0
    while True:
        cid = _first_bad_crossing([symbols])
        if cid is None:
            return total
        sign = next(s.sign for s in symbols if s.crossing == cid)
        switched = _switch([symbols], cid)[0]
        first, second = _smooth([symbols], cid)
        lk = _linking(first, second)
        minus = symbols if sign < 0 else switched
        jump = (lk * lk + lk) // 2 + _chord_v2(minus) - _chord_v2(first) - _chord_v2(second)
        total += sign * jump
        symbols = switched


def v3_from_jones(code: GaussCode) -> int:
    """
    v3 = −(V‴(1) + 3V″(1)) / 36，V 为变量 t 的 Jones 多项式

    与 v3 无共享代码，测试中作为对照。
    """
    poly = jones_skein(code)
    second = Fraction(0)
    third = Fraction(0)
    for e, c in poly.terms.items():
        x = Fraction(e, 2)
        second += c * x * (x - 1)
        third += c * x * (x - 1) * (x - 2)
    value = -(third + 3 * second) / 36
    if value.denominator != 1:
        raise ArithmeticError(f"v3 不是整数: {value}")
    return int(value)


# ==================== 分类 ====================

class KnotClass(str, Enum):
    UNKNOT = "Unknot"
    TREFOIL_LEFT = "TrefoilLeft"
    TREFOIL_RIGHT = "TrefoilRight"
    OTHER = "Other"

    @property
    def is_trefoil(self) -> bool:
        return self in (KnotClass.TREFOIL_LEFT, KnotClass.TREFOIL_RIGHT)


class CompatibilityClass(str, Enum):
    UNKNOT_COMPATIBLE = "Unknot-compatible"
    TREFOIL_COMPATIBLE = "Trefoil-compatible"
    OTHER = "Other"


def class_of_jones(jones: LaurentPoly) -> KnotClass:
    if jones.is_one():
        return KnotClass.UNKNOT
    if jones == trefoil_reference("right"):
        return KnotClass.TREFOIL_RIGHT
    if jones == trefoil_reference("left"):
        return KnotClass.TREFOIL_LEFT
    return KnotClass.OTHER


@dataclass
class HexagonReport:
    knot_class: KnotClass
    jones: LaurentPoly
    writhes: List[int] = field(default_factory=list)
    directions: List[List[float]] = field(default_factory=list)
    codes: List[str] = field(default_factory=list)
    v2: int = 0
    v3: int = 0


def _consensus_jones(diagrams: Sequence[KnotDiagram]) -> Tuple[LaurentPoly, List[GaussCode]]:
    codes = [gauss_code(d) for d in diagrams]
    values = [jones_normalized(c) for c in codes]
    distinct = set(values)
    if len(distinct) > 1:
        listing = "; ".join(str(v) for v in values)
        raise InconsistentProjections(f"{len(diagrams)} 个投影方向给出不同的 Jones 多项式: {listing}")
    return values[0], codes


def hexagon_report(
    poly: ClosedPolygon, directions: Optional[int] = None, seed: int = 0
) -> HexagonReport:
    """在多个通用方向上计算不变量并要求 Jones 多项式一致"""
    if len(poly) != 6:
        raise InvalidPolygon(f"六边形分类需要 6 个顶点（n = {len(poly)}）")
    directions = config.CLASSIFY_DIRECTIONS if directions is None else directions
    diagrams = generic_diagrams(poly, directions, seed)
    jones, codes = _consensus_jones(diagrams)
    return HexagonReport(
        knot_class=class_of_jones(jones),
        jones=jones,
        writhes=[writhe(c) for c in codes],
        directions=[d.direction.tolist() for d in diagrams],
        codes=[str(c) for c in codes],
        v2=v2(codes[0]),
        v3=v3(codes[0]),
    )


def classify_hexagon(
    poly: ClosedPolygon, directions: Optional[int] = None, seed: int = 0
) -> KnotClass:
    """六边形扭结类型（平凡 / 左手 / 右手三叶结）"""
    return hexagon_report(poly, directions, seed).knot_class


def classify_polygon(
    poly: ClosedPolygon, directions: Optional[int] = None, seed: int = 0
) -> CompatibilityClass:
    """任意多边形的兼容性标记（只区分平凡 / 三叶结 / 其他）"""
    directions = config.CLASSIFY_DIRECTIONS if directions is None else directions
    jones, _ = _consensus_jones(generic_diagrams(poly, directions, seed))
    cls = class_of_jones(jones)
    if cls is KnotClass.UNKNOT:
        return CompatibilityClass.UNKNOT_COMPATIBLE
    if cls.is_trefoil:
        return CompatibilityClass.TREFOIL_COMPATIBLE
    return CompatibilityClass.OTHER


def _modal_v2(poly: ClosedPolygon, directions: int, seed: int) -> int:
    votes = Counter(v2(gauss_code(d)) for d in generic_diagrams(poly, directions, seed))
    return votes.most_common(1)[0][0]


def a2_of_curve(
    curve: PeriodicCurve,
    resolution: Optional[int] = None,
    I: Optional[InversionPoint] = None,
    directions: Optional[int] = None,
    seed: int = 0,
) -> int:
    """
    曲线 Conway 多项式的 z² 系数

    在 resolution 与 2·resolution 两种分辨率下分别取 v2 众数，两者必须一致。

    Raises:
        UnstableInvariant: 两种分辨率结果不同
    """
    resolution = config.A2_RESOLUTION if resolution is None else resolution
    directions = config.A2_DIRECTIONS if directions is None else directions
    if resolution < config.MIN_A2_RESOLUTION:
        raise InputError(f"分辨率至少为 {config.MIN_A2_RESOLUTION}（收到 {resolution}）")
    if curve.ambient == "S3" and I is None:
        I = random_inversion_point(curve, seed)

    coarse = _modal_v2(polygonalize(curve, resolution, I), directions, seed)
    fine = _modal_v2(polygonalize(curve, 2 * resolution, I), directions, seed)
    if coarse != fine:
        raise UnstableInvariant(
            f"a₂ 在分辨率 {resolution} 与 {2 * resolution} 下不一致（{coarse} ≠ {fine}）"
        )
    return coarse
