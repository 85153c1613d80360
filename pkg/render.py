"""
SVG 渲染

投影图与平面构型导出为确定性的 SVG 文本：下穿股在交叉处断开，
构型图上标注顶点高度、交叉点与分段长度。相同输入得到逐字节相同的输出。
"""
# 标准库
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

# 第三方库
import numpy as np

# 本地模块
from diagram import KnotDiagram
from schemas import ConfigurationExport, DiagramExport

CANVAS = 480        # 画布边长（像素）
MARGIN = 40
GAP = 0.025         # 下穿股断口半宽（相对投影直径）


# ==================== 导出 ====================

def diagram_export(diagram: KnotDiagram, knot_class: Optional[str] = None) -> Dict[str, Any]:
    """投影图导出 JSON（供 render 子命令使用）"""
    return {
        "kind": "diagram",
        "projected": diagram.projected.tolist(),
        "crossings": [
            {
                "over_edge": c.over_edge,
                "under_edge": c.under_edge,
                "over_param": c.over_param,
                "under_param": c.under_param,
                "sign": c.sign,
            }
            for c in diagram.crossings
        ],
        "direction": diagram.direction.tolist(),
        "knot_class": knot_class,
    }


# ==================== 公共绘制 ====================

def _fmt(x: float) -> str:
    return f"{x:.3f}"


class _Canvas:
    """把平面坐标映射到画布（y 轴向上）"""

    def __init__(self, points: np.ndarray):
        lo, hi = points.min(axis=0), points.max(axis=0)
        self.span = float(max(hi - lo)) or 1.0
        self.lo = lo
        self.offset = (self.span - (hi - lo)) / 2.0

    def __call__(self, p: Sequence[float]) -> Tuple[str, str]:
        usable = CANVAS - 2 * MARGIN
        x = MARGIN + (p[0] - self.lo[0] + self.offset[0]) / self.span * usable
        y = CANVAS - MARGIN - (p[1] - self.lo[1] + self.offset[1]) / self.span * usable
        return _fmt(x), _fmt(y)


def _strand_pieces(points: np.ndarray, unders: Dict[int, List[float]]) -> List[Tuple[np.ndarray, np.ndarray]]:
    """每条边按下穿位置切开，每个下穿位置恰好产生一个断口"""
    n = len(points)
    diameter = float(np.max(np.linalg.norm(points[:, None] - points[None], axis=-1)))
    pieces = []
    for edge in range(n):
        a, b = points[edge], points[(edge + 1) % n]
        length = float(np.linalg.norm(b - a))
        cuts = sorted(unders.get(edge, []))
        bounds = [0.0] + cuts + [1.0]
        start = 0.0
        for k, s in enumerate(cuts):
            room = min(s - bounds[k], bounds[k + 2] - s)
            half = min(GAP * diameter / length, 0.45 * room)
            pieces.append((a + start * (b - a), a + (s - half) * (b - a)))
            start = s + half
        pieces.append((a + start * (b - a), b))
    return pieces


def _document(body: List[str], title: str) -> str:
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS + 60}" '
        f'viewBox="0 0 {CANVAS} {CANVAS + 60}">',
        f'  <rect width="{CANVAS}" height="{CANVAS + 60}" fill="white"/>',
        f'  <text x="{CANVAS // 2}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{title}</text>',
    ]
    lines.extend(body)
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# ==================== 投影图 ====================

def render_diagram_svg(export: DiagramExport) -> str:
    """投影图：下穿股在每个交叉点处留断口"""
    points = np.asarray(export.projected, dtype=float)
    to_svg = _Canvas(points)
    unders: Dict[int, List[float]] = {}
    for c in export.crossings:
        unders.setdefault(c.under_edge, []).append(c.under_param)

    body = []
    for p, q in _strand_pieces(points, unders):
        (x1, y1), (x2, y2) = to_svg(p), to_svg(q)
        body.append(f'  <line class="strand" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                    f'stroke="black" stroke-width="2" stroke-linecap="round"/>')
    for k, (x, y) in enumerate(to_svg(p) for p in points):
        body.append(f'  <circle class="vertex" cx="{x}" cy="{y}" r="3" fill="#444"/>')
        body.append(f'  <text x="{x}" y="{y}" dx="6" dy="-6" font-family="sans-serif" font-size="11">{k + 1}</text>')

    title = f"{len(points)} 顶点 · {len(export.crossings)} 交叉"
    if export.knot_class:
        title += f" · {export.knot_class}"
    return _document(body, title)


# ==================== 平面构型 ====================

def _edge_param(coords: np.ndarray, edge: int, other: int) -> float:
    a, b = coords[edge], coords[(edge + 1) % 6]
    c, d = coords[other], coords[(other + 1) % 6]
    da, dc = b - a, d - c
    denom = da[0] * dc[1] - da[1] * dc[0]
    off = c - a
    return float((off[0] * dc[1] - off[1] * dc[0]) / denom)


def render_configuration_svg(export: ConfigurationExport) -> str:
    """平面构型：顶点高度、交叉点（有高度时按高度断开下穿股）与分段长度"""
    coords = np.asarray(export.coords, dtype=float)
    to_svg = _Canvas(coords)
    heights = np.asarray(export.heights, dtype=float) if export.heights else None

    unders: Dict[int, List[float]] = {}
    marks = []
    for item in export.crossings or []:
        i, j = (e - 1 for e in item.edges)
        si, sj = _edge_param(coords, i, j), _edge_param(coords, j, i)
        if heights is not None:
            hi = (1 - si) * heights[i] + si * heights[(i + 1) % 6]
            hj = (1 - sj) * heights[j] + sj * heights[(j + 1) % 6]
            edge, s = (i, si) if hi < hj else (j, sj)
            unders.setdefault(edge, []).append(s)
        marks.append((item.point, f"ℓ{i + 1}×ℓ{j + 1}"))

    body = []
    for p, q in _strand_pieces(coords, unders):
        (x1, y1), (x2, y2) = to_svg(p), to_svg(q)
        body.append(f'  <line class="strand" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
                    f'stroke="#1f4e79" stroke-width="2" stroke-linecap="round"/>')
    for point, label in marks:
        x, y = to_svg(point)
        body.append(f'  <circle class="crossing" cx="{x}" cy="{y}" r="2.5" fill="#c00000"/>')
        body.append(f'  <text x="{x}" y="{y}" dx="4" dy="12" font-family="sans-serif" font-size="9" fill="#c00000">{label}</text>')
    for k, p in enumerate(coords):
        x, y = to_svg(p)
        label = f"p{k + 1}"
        if heights is not None:
            label += f" ({heights[k]:+.4f})"
        if export.labels:
            label += f" {export.labels[k]}"
        body.append(f'  <circle class="vertex" cx="{x}" cy="{y}" r="4" fill="black"/>')
        body.append(f'  <text x="{x}" y="{y}" dx="6" dy="-6" font-family="sans-serif" font-size="11">{label}</text>')

    if export.lengths:
        text = "  ".join(f"{k}={v:.4f}" for k, v in sorted(export.lengths.items()))
        body.append(f'  <text x="{MARGIN // 2}" y="{CANVAS + 20}" font-family="monospace" font-size="9">{text}</text>')
    if export.fractions:
        text = "  ".join(f"α{k}={v:.3f}" for k, v in sorted(export.fractions.items()))
        body.append(f'  <text x="{MARGIN // 2}" y="{CANVAS + 40}" font-family="monospace" font-size="9">{text}</text>')

    title = "平面构型" + (f" · 类型 {export.type}" if export.type else "")
    return _document(body, title)


def render_svg(export: Union[DiagramExport, ConfigurationExport]) -> str:
    if isinstance(export, ConfigurationExport):
        return render_configuration_svg(export)
    return render_diagram_svg(export)


def save_svg(export: Union[DiagramExport, ConfigurationExport], path: Union[str, Path]) -> Path:
    """渲染并写出 SVG 文件"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(render_svg(export))
    return path
