#!/usr/bin/env python3
"""
命令行版本 - 六边形三叶结工具

子命令：classify / search / prism / trace / a2 / render / rules
stdout 只输出 JSON / NDJSON / 报告正文，状态信息（✓ ⚠ ❌）一律写到 stderr。
"""
# 标准库
import argparse
import json
import sys
import traceback
from dataclasses import asdict
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

# 第三方库
import numpy as np
import pandas as pd

# 本地模块
sys.path.insert(0, str(Path(__file__).parent))
import config
from config_loader import apply_overrides, load_config, resolve_workers
from config_geometry import (
    PlanarConfiguration,
    Sidedness,
    check_crossing_rules,
    classify_planar_config,
    configuration_export,
    construct_case_heights,
    construct_colinear_heights,
    cyclic_alignment_error,
    is_bad_configuration,
    lift_configuration,
    make_planar_configuration,
    segment_data,
)
from curves import (
    BUILTIN_CURVES,
    InversionPoint,
    PeriodicCurve,
    builtin_curve,
    curve_from_dict,
    make_inversion_point,
    random_inversion_point,
)
from diagram import ClosedPolygon, generic_diagrams
from errors import BudgetExhausted, ConfigError, HexaError, InputError, UnclassifiableConfig, UnknownCurve
from invariants import a2_of_curve, classify_polygon, hexagon_report
from render import diagram_export, save_svg
from schemas import load_curve_file, load_export_file, load_planar_file, load_polygon_file
from search import (
    CheckpointManager,
    SearchBudget,
    SearchTarget,
    find_inscribed_trefoils,
    scan_planar_events,
    solve_prism,
    trace_prism_manifold,
)

UNIFORM_TUPLE = np.arange(6) / 6.0


# ==================== 参数解析 ====================

def split_tolerances(argv: Sequence[str]) -> Tuple[List[str], Dict[str, str]]:
    """从参数中取出 --tol.<name> VALUE / --tol.<name>=VALUE"""
    rest: List[str] = []
    overrides: Dict[str, str] = {}
    items = list(argv)
    k = 0
    while k < len(items):
        token = items[k]
        if token.startswith("--tol."):
            name = token[len("--tol."):]
            if "=" in name:
                name, value = name.split("=", 1)
            else:
                if k + 1 >= len(items):
                    raise ConfigError(f"{token} 缺少数值")
                value = items[k + 1]
                k += 1
            overrides[name] = value
        else:
            rest.append(token)
        k += 1
    return rest, overrides


def _seed_tuple(text: str) -> List[float]:
    try:
        values = [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析六元组: {text!r}") from e
    if len(values) != 6:
        raise argparse.ArgumentTypeError(f"六元组需要 6 个数，收到 {len(values)} 个")
    return values


def _vector(text: str) -> List[float]:
    try:
        return [float(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析向量: {text!r}") from e


def _indices(text: str) -> List[int]:
    try:
        return [int(x) for x in text.replace(" ", "").split(",") if x]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"无法解析下标列表: {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="随机种子（默认 0）")
    common.add_argument("--json", action="store_true", help="输出机器可读 JSON")
    common.add_argument("--out", type=Path, default=None, help="输出文件路径")
    common.add_argument("--quiet", action="store_true", help="关闭进度条")

    curve_args = argparse.ArgumentParser(add_help=False)
    curve_args.add_argument("curve", help=f"内置曲线名（{', '.join(BUILTIN_CURVES)}）或曲线 JSON 路径")
    curve_args.add_argument("--inversion", type=_vector, default=None,
                            help="S³ 曲线的反演点 I（逗号分隔的 4 个数）；缺省时按 --seed 自动选取")

    parser = argparse.ArgumentParser(
        prog="hexa",
        description="六边形三叶结：分类、搜索、棱柱构型与平面交叉规则",
        epilog="容差覆盖：--tol.<name> VALUE（例如 --tol.coplanar 1e-7）",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classify", parents=[common], help="多边形扭结分类")
    p.add_argument("polygon", type=Path, help="多边形 JSON 或 CSV")
    p.add_argument("--directions", type=int, default=None, help="投影方向数")
    p.add_argument("--export", type=Path, default=None, help="写出首个方向的投影图（供 render 使用）")

    p = sub.add_parser("search", parents=[common, curve_args], help="搜索内接三叶结")
    p.add_argument("--budget", type=int, default=config.DEFAULT_BUDGET, help="采样预算")
    p.add_argument("--target", choices=[t.value for t in SearchTarget], default="any", help="搜索目标")
    p.add_argument("--refine", type=int, default=config.DEFAULT_REFINEMENT_STEPS, help="每个发现的局部细化次数")
    p.add_argument("--resume", action="store_true", help="从检查点恢复")
    p.add_argument("--table", type=Path, default=None, help="发现列表表格（.csv / .xlsx）")

    p = sub.add_parser("prism", parents=[common, curve_args], help="LM 求解棱柱构型")
    p.add_argument("--seed-tuple", type=_seed_tuple, default=None, help="初值六元组（逗号分隔）")

    p = sub.add_parser("trace", parents=[common, curve_args], help="沿棱柱构型曲线延拓并扫描平面事件")
    p.add_argument("--seed-tuple", type=_seed_tuple, default=None, help="初值六元组（逗号分隔）")
    p.add_argument("--step", type=float, default=None, help="初始步长")
    p.add_argument("--max-steps", type=int, default=None, help="最大步数")
    p.add_argument("--table", type=Path, default=None, help="轨迹表格（.csv / .xlsx）")

    p = sub.add_parser("a2", parents=[common, curve_args], help="Conway 多项式 z² 系数")
    p.add_argument("--resolution", type=int, default=None, help="多边形化顶点数")
    p.add_argument("--directions", type=int, default=None, help="投影方向数")

    p = sub.add_parser("render", parents=[common], help="导出 JSON → SVG")
    p.add_argument("export", type=Path, help="投影图或构型导出 JSON")

    p = sub.add_parser("rules", parents=[common], help="平面构型的交叉规则与情形高度")
    p.add_argument("planar", type=Path, help="平面构型 JSON")
    p.add_argument("--one-sided", type=_indices, default=None, help="单侧点下标（覆盖文件中的设置）")
    chirality = p.add_mutually_exclusive_group()
    chirality.add_argument("--mirrored", action="store_true", help="只使用镜像规则")
    chirality.add_argument("--plain", action="store_true", help="只使用非镜像规则")
    p.add_argument("--directions", type=int, default=None, help="抬升后分类的投影方向数")
    p.add_argument("--export", type=Path, default=None, help="写出构型导出 JSON（供 render 使用）")

    return parser


# ==================== 输出辅助 ====================

def _dumps(payload: Any) -> str:
    return json.dumps(payload, ensure_ascii=False, sort_keys=True)


def _emit(args: argparse.Namespace, payload: Dict[str, Any], lines: Sequence[str]) -> None:
    """--json 时输出 JSON，否则输出报告正文；--out 时另存 JSON"""
    if args.json:
        print(_dumps(payload))
    else:
        for line in lines:
            print(line)
    if args.out is not None:
        _write_json(payload, args.out)


def _write_json(payload: Any, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(payload, f, ensure_ascii=False, indent=2, sort_keys=True)
    print(f"✓ 已写出: {path}", file=sys.stderr)


def write_table(rows: List[Dict[str, Any]], path: Path) -> None:
    """按后缀写出 .csv 或 .xlsx（openpyxl）"""
    suffix = path.suffix.lower()
    if suffix not in (".csv", ".xlsx"):
        raise InputError(f"表格只支持 .csv / .xlsx（收到 {path.name}）")
    path.parent.mkdir(parents=True, exist_ok=True)
    df = pd.DataFrame(rows)
    if suffix == ".xlsx":
        df.to_excel(path, index=False, engine="openpyxl")
    else:
        df.to_csv(path, index=False)
    print(f"✓ 表格已保存至：{path}", file=sys.stderr)


def _floats(values: Any) -> List[float]:
    return [float(x) for x in np.asarray(values, dtype=float).ravel()]


# ==================== 曲线与反演点 ====================

def load_curve(name_or_path: str) -> PeriodicCurve:
    """内置曲线名优先，其次按曲线 JSON 文件读取"""
    if name_or_path in BUILTIN_CURVES:
        return builtin_curve(name_or_path)
    path = Path(name_or_path)
    if not path.exists():
        raise UnknownCurve(f"既不是内置曲线也不是文件: {name_or_path!r}（内置: {', '.join(BUILTIN_CURVES)}）")
    return curve_from_dict(load_curve_file(path).model_dump())


def resolve_inversion(curve: PeriodicCurve, args: argparse.Namespace) -> Optional[InversionPoint]:
    if curve.ambient != "S3":
        if args.inversion is not None:
            print("⚠ ℝ³ 曲线不需要反演点，已忽略 --inversion", file=sys.stderr)
        return None
    if args.inversion is not None:
        return make_inversion_point(args.inversion, curve)
    point = random_inversion_point(curve, args.seed)
    print(f"✓ 自动选取反演点 I = {np.round(point.point, 6).tolist()}", file=sys.stderr)
    return point


def _start_tuple(args: argparse.Namespace) -> List[float]:
    if args.seed_tuple is not None:
        return args.seed_tuple
    rng = np.random.default_rng(args.seed)
    return sorted(rng.random(6).tolist())


# ==================== 子命令 ====================

def cmd_classify(args: argparse.Namespace) -> int:
    poly = ClosedPolygon(load_polygon_file(args.polygon).vertices)
    directions = args.directions or config.CLASSIFY_DIRECTIONS

    if len(poly) != 6:
        compat = classify_polygon(poly, directions, args.seed)
        payload = {"n": len(poly), "class": compat.value}
        _emit(args, payload, [f"顶点数: {len(poly)}", f"兼容类别: {compat.value}"])
        return 0

    report = hexagon_report(poly, directions, args.seed)
    payload = {
        "class": report.knot_class.value,
        "jones": report.jones.to_dict(),
        "writhes": [int(w) for w in report.writhes],
        "directions": report.directions,
        "gauss_codes": report.codes,
        "v2": int(report.v2),
        "v3": int(report.v3),
    }
    lines = [f"类别: {report.knot_class.value}", f"Jones: {report.jones}"]
    for k, (w, code) in enumerate(zip(report.writhes, report.codes), start=1):
        lines.append(f"  方向 {k}: writhe = {w:+d}  Gauss 码: {code or '(无交叉)'}")
    lines.append(f"v2 = {report.v2}  v3 = {report.v3}")
    _emit(args, payload, lines)

    if args.export is not None:
        diagram = generic_diagrams(poly, 1, args.seed)[0]
        _write_json(diagram_export(diagram, report.knot_class.value), args.export)
    return 0


def cmd_search(args: argparse.Namespace, overrides: Dict[str, float]) -> int:
    curve = load_curve(args.curve)
    inversion = resolve_inversion(curve, args)
    budget = SearchBudget(max_samples=args.budget, seed=args.seed,
                          refinement_steps=args.refine, target=args.target)
    workers = resolve_workers(config)
    manager = CheckpointManager(Path(config.CHECKPOINT_DIR), config.CHECKPOINT_SAVE_INTERVAL)

    def stream(find) -> None:
        print(_dumps(find.to_record()), flush=True)

    print(f"搜索 {curve.label}：预算 {budget.max_samples}，目标 {budget.target.value}，进程数 {workers}",
          file=sys.stderr)
    result = find_inscribed_trefoils(
        curve, budget, inversion,
        workers=workers,
        checkpoint_manager=manager,
        resume=args.resume,
        progress=not args.quiet,
        on_find=stream,
        overrides=overrides,
    )
    counts = result.counts()
    summary = {
        "summary": {
            "curve": curve.label,
            "finds": len(result.finds),
            "left": counts["left"],
            "right": counts["right"],
            "target": budget.target.value,
            "target_met": result.target_met,
            "stats": asdict(result.stats),
        }
    }
    print(_dumps(summary), flush=True)
    print(f"用时 {result.wall_time:.2f}s，左手 {counts['left']} / 右手 {counts['right']}", file=sys.stderr)

    if args.out is not None:
        _write_json({"finds": [f.to_record() for f in result.finds], **summary}, args.out)
    if args.table is not None:
        rows = []
        for find in result.finds:
            row = {f"t{k + 1}": v for k, v in enumerate(find.t)}
            row.update(cls=find.knot_class, verification_directions=find.verification_directions,
                       prism_residual=find.prism_residual, chunk=find.chunk, origin=find.origin)
            rows.append(row)
        write_table(rows, args.table)

    if not result.target_met:
        print(f"⚠ 预算 {budget.max_samples} 内未达成目标 {budget.target.value}（结论未定，不是反例）",
              file=sys.stderr)
        return BudgetExhausted.exit_code
    print("✓ 目标达成", file=sys.stderr)
    return 0


def cmd_prism(args: argparse.Namespace) -> int:
    curve = load_curve(args.curve)
    solution = solve_prism(curve, _start_tuple(args))
    t = solution.tuple.as_array()
    payload = {
        "curve": curve.label,
        "t": _floats(t),
        "apex": _floats(solution.apex),
        "apex_at_infinity": bool(solution.apex_at_infinity),
        "residual": float(solution.residual),
        "class_id": solution.class_id,
        "degenerate": solution.degenerate,
        "iterations": solution.iterations,
        "history": solution.history,
        "uniform_alignment_error": cyclic_alignment_error(t, UNIFORM_TUPLE),
    }
    lines = [
        f"t = ({', '.join(f'{x:.10f}' for x in t)})",
        f"残差 {solution.residual:.3e}，迭代 {solution.iterations} 次，类编号 {solution.class_id}",
        f"顶点 {'在无穷远（方向）' if solution.apex_at_infinity else ''}{np.round(solution.apex, 8).tolist()}",
    ]
    if solution.degenerate:
        lines.append("⚠ 退化解（共面或解集维数偏高）")
    _emit(args, payload, lines)
    return 0


def cmd_trace(args: argparse.Namespace) -> int:
    curve = load_curve(args.curve)
    if curve.ambient != "S3":
        raise InputError(f"trace 只支持 S³ 曲线，{curve.label!r} 位于 ℝ³")
    inversion = resolve_inversion(curve, args)
    start = solve_prism(curve, _start_tuple(args))
    print(f"✓ 起点残差 {start.residual:.3e}", file=sys.stderr)
    trace = trace_prism_manifold(curve, start, args.step, args.max_steps, inversion,
                                 classify=True, seed=args.seed, progress=not args.quiet)
    scan = scan_planar_events(trace)

    points = [
        {
            "t": _floats(p.t),
            "residual": float(p.residual),
            "arclength": p.arclength,
            "step": p.step,
            "planarity": float(p.planarity),
            "coplanar": bool(p.coplanar),
            "cospherical": bool(p.cospherical),
            "class": p.knot_class,
            "non_generic": bool(p.non_generic),
        }
        for p in trace.points
    ]
    events = [
        {"index": e.index, "type": e.config_type, "bad": e.is_bad, "theta": e.theta}
        for e in scan
    ]
    classes = sorted({p.knot_class for p in trace.points if p.knot_class})
    payload = {
        "curve": curve.label,
        "closed": trace.closed,
        "boundary": trace.boundary,
        "arclength": trace.arclength,
        "points": points,
        "events": events,
        "two_plane_condition": scan.two_plane_condition,
    }
    lines = [
        f"步数 {len(trace.points) - 1}，弧长 {trace.arclength:.6f}，"
        + ("闭合" if trace.closed else f"未闭合（{trace.boundary}）"),
        f"经过的扭结类型: {', '.join(classes) or '无'}",
        f"平面事件 {len(events)} 个" + ("，满足两平面条件" if scan.two_plane_condition else ""),
    ]
    for e in events:
        lines.append(f"  #{e['index']}: 类型 {e['type']}，坏构型 {e['bad']}，θ = {e['theta']:.6f}")
    _emit(args, payload, lines)

    if args.table is not None:
        rows = []
        for p in points:
            row = {f"t{k + 1}": v for k, v in enumerate(p["t"])}
            row.update({k: v for k, v in p.items() if k != "t"})
            rows.append(row)
        write_table(rows, args.table)
    return 0


def cmd_a2(args: argparse.Namespace) -> int:
    curve = load_curve(args.curve)
    inversion = resolve_inversion(curve, args)
    resolution = args.resolution or config.A2_RESOLUTION
    value = a2_of_curve(curve, resolution, inversion, args.directions, args.seed)
    payload = {"curve": curve.label, "a2": value, "resolution": resolution}
    _emit(args, payload, [str(value)])
    return 0


def cmd_render(args: argparse.Namespace) -> int:
    export = load_export_file(args.export)
    out = args.out or Path(config.OUTPUT_DIR) / f"{args.export.stem}.svg"
    path = save_svg(export, out)
    print(f"✓ SVG 已保存至：{path}", file=sys.stderr)
    if args.json:
        print(_dumps({"svg": str(path)}))
    return 0


def _rules_colinear(args: argparse.Namespace, cfg: PlanarConfiguration, one_sided: Sequence[int], mirrored: Optional[bool]) -> int:
    built = construct_colinear_heights(cfg, one_sided, mirrored=mirrored)
    heights = built.heights
    lifted = lift_configuration(built.configuration, heights)
    report = hexagon_report(lifted, args.directions, args.seed)
    payload = {
        "type": 3,
        "bad": None,
        "one_sided": sorted(one_sided),
        "colinear": {
            "family": built.family.value,
            "line": list(built.line),
            "moved": built.moved,
            "points": built.configuration.points.tolist(),
        },
        "heights": {
            "f": _floats(heights.f),
            "case": None,
            "symmetry": heights.symmetry,
            "strategy": heights.strategy,
            "rho": None,
            "mirrored": heights.mirrored,
            "epsilons": heights.epsilons,
        },
        "rules_hold": None,
        "class": report.knot_class.value,
    }
    lines = [
        f"类型: 3，共线三点 {list(built.line)}（{built.family.value}）",
        f"移出直线的点: p{built.moved}，位移 {heights.epsilons['shift']:+.3e}",
        f"单侧点 U = {sorted(one_sided)}",
        f"高度 f = ({', '.join(f'{x:+.6f}' for x in heights.f)})",
        f"抬升后: {report.knot_class.value}",
    ]
    _emit(args, payload, lines)

    if args.export is not None:
        _write_json(configuration_export(built.configuration, heights, 3), args.export)
    return 0


def cmd_rules(args: argparse.Namespace) -> int:
    planar = load_planar_file(args.planar)
    cfg = make_planar_configuration(planar.points, planar.labels)
    if args.one_sided is not None:
        one_sided = args.one_sided
    elif planar.one_sided or not cfg.labels:
        one_sided = planar.one_sided
    else:
        one_sided = [k + 1 for k, s in enumerate(cfg.labels) if s is Sidedness.ONE_SIDED]

    try:
        config_type = classify_planar_config(cfg, planar.inversion)
    except UnclassifiableConfig:
        config_type = None
    mirrored = True if args.mirrored else (False if args.plain else None)
    if config_type == 3:
        return _rules_colinear(args, cfg, one_sided, mirrored)
    segment = segment_data(cfg)
    bad = is_bad_configuration(cfg)
    heights = construct_case_heights(cfg, one_sided, mirrored=mirrored)
    lifted = lift_configuration(cfg, heights)
    report = hexagon_report(lifted, args.directions, args.seed)

    payload = {
        "type": config_type,
        "bad": bool(bad),
        "one_sided": sorted(one_sided),
        "lengths": segment.lengths,
        "tildes": segment.tildes,
        "fractions": {f"{i}{j}": v for (i, j), v in sorted(segment.alphas.items())},
        "heights": {
            "f": _floats(heights.f),
            "case": heights.case,
            "symmetry": heights.symmetry,
            "strategy": heights.strategy,
            "rho": heights.rho,
            "mirrored": heights.mirrored,
            "epsilons": heights.epsilons,
        },
        "rules_hold": check_crossing_rules(heights, cfg, heights.mirrored, segment),
        "class": report.knot_class.value,
    }
    lines = [
        f"类型: {config_type if config_type is not None else '无法归类'}，{'坏' if bad else '好'}构型",
        "长度: " + "  ".join(f"{k}={v:.6f}" for k, v in sorted(segment.lengths.items())),
        f"单侧点 U = {sorted(one_sided)}",
        f"高度 f = ({', '.join(f'{x:+.6f}' for x in heights.f)})",
        f"  情形 {heights.case}，对称 {heights.symmetry}，方式 {heights.strategy}，"
        + ("镜像规则" if heights.mirrored else "非镜像规则"),
        f"抬升后: {report.knot_class.value}",
    ]
    _emit(args, payload, lines)

    if args.export is not None:
        _write_json(configuration_export(cfg, heights, config_type, segment), args.export)
    return 0


COMMANDS = {
    "classify": cmd_classify,
    "prism": cmd_prism,
    "trace": cmd_trace,
    "a2": cmd_a2,
    "render": cmd_render,
    "rules": cmd_rules,
}


def run(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    load_config()
    rest, raw_overrides = split_tolerances(argv)
    args = build_parser().parse_args(rest)
    applied = apply_overrides(config, raw_overrides)
    for key, value in applied.items():
        print(f"✓ 容差覆盖 {key} = {value:g}", file=sys.stderr)
    if args.command == "search":
        return cmd_search(args, applied)
    return COMMANDS[args.command](args)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数"""
    try:
        return run(argv)
    except HexaError as e:
        print(f"❌ {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"❌ 文件未找到: {e}", file=sys.stderr)
        return 2
    except Exception as e:
        print(f"❌ 发生错误: {e}", file=sys.stderr)
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
