#!/usr/bin/env python3
"""
验证项目设置脚本
检查依赖、配置、文件以及内置曲线是否正常
"""
import sys
from pathlib import Path

REQUIRED_FILES = [
    "main.py",
    "config.py",
    "config_loader.py",
    "errors.py",
    "curves.py",
    "diagram.py",
    "invariants.py",
    "config_geometry.py",
    "search.py",
    "schemas.py",
    "render.py",
    "requirements.txt",
    "requirements-dev.txt",
    "pyproject.toml",
    "README.md",
    "CHANGELOG.md",
]

CORE_MODULES = [
    "config",
    "config_loader",
    "errors",
    "curves",
    "diagram",
    "invariants",
    "config_geometry",
    "search",
    "schemas",
    "render",
]

TEST_FILES = [
    "tests/__init__.py",
    "tests/test_config_loader.py",
    "tests/test_curves.py",
    "tests/test_diagram.py",
    "tests/test_invariants.py",
    "tests/test_config_geometry.py",
    "tests/test_search.py",
    "tests/test_checkpoint.py",
    "tests/test_schemas_render.py",
    "tests/test_cli.py",
]


def _check_paths(title: str, paths) -> bool:
    print(title)
    missing = [p for p in paths if not Path(p).exists()]
    for p in paths:
        print(f"  ❌ 缺失: {p}" if p in missing else f"  ✓ {p}")
    if missing:
        print(f"\n❌ 缺少 {len(missing)} 个文件")
        return False
    print("\n✓ 所有文件都存在")
    return True


def check_files():
    """检查必要文件是否存在"""
    return _check_paths("检查文件...", REQUIRED_FILES)


def check_imports():
    """检查核心模块是否可以导入"""
    print("\n检查模块导入...")
    failed = []
    for module_name in CORE_MODULES:
        try:
            __import__(module_name)
            print(f"  ✓ {module_name}")
        except Exception as e:
            print(f"  ❌ {module_name}: {e}")
            failed.append(module_name)

    if failed:
        print(f"\n❌ {len(failed)} 个模块导入失败")
        return False
    print("\n✓ 所有模块导入成功")
    return True


def check_dependencies():
    """检查依赖是否安装"""
    print("\n检查依赖...")
    missing = []
    for dep in ("numpy", "scipy", "pandas", "openpyxl", "pydantic", "tqdm"):
        try:
            __import__(dep)
            print(f"  ✓ {dep}")
        except ImportError:
            print(f"  ❌ {dep} (未安装)")
            missing.append(dep)

    if missing:
        print(f"\n⚠ 缺少 {len(missing)} 个依赖")
        print("运行以下命令安装：")
        print("  pip install -r requirements.txt")
        return False
    print("\n✓ 所有核心依赖已安装")
    return True


def check_dev_dependencies():
    """检查开发依赖是否安装"""
    print("\n检查开发依赖（可选）...")
    missing = []
    for dep in ("pytest", "pytest_cov", "black", "ruff"):
        try:
            __import__(dep)
            print(f"  ✓ {dep}")
        except ImportError:
            print(f"  ⚠ {dep} (未安装)")
            missing.append(dep)

    if missing:
        print(f"\n⚠ 缺少 {len(missing)} 个开发依赖（不影响正常使用）")
        print("如需开发，运行以下命令安装：")
        print("  pip install -r requirements-dev.txt")
        return False
    print("\n✓ 所有开发依赖已安装")
    return True


def check_config():
    """检查配置是否正确"""
    print("\n检查配置...")
    try:
        from config_loader import TOLERANCE_NAMES, load_config
        config = load_config()

        required_attrs = [
            "OUTPUT_DIR",
            "CHECKPOINT_DIR",
            "INVERSION_CLEARANCE",
            "COPLANAR_TOL",
            "PRISM_TOL",
            "LM_MAX_ITER",
            "TRACE_STEP_INIT",
            "DEFAULT_BUDGET",
            "WORKERS",
            "CHECKPOINT_SAVE_INTERVAL",
        ] + sorted(set(TOLERANCE_NAMES.values()))

        missing = []
        for attr in dict.fromkeys(required_attrs):
            if not hasattr(config, attr):
                missing.append(attr)
                print(f"  ❌ 缺少配置项: {attr}")
            else:
                print(f"  ✓ {attr}")

        if missing:
            print(f"\n❌ 缺少 {len(missing)} 个配置项")
            return False
        print("\n✓ 配置完整")
        return True
    except Exception as e:
        print(f"\n❌ 配置加载失败: {e}")
        return False


def check_curves():
    """内置曲线可构造，且参数三叶结的等距六边形被识别为三叶结"""
    print("\n检查内置曲线...")
    try:
        import numpy as np

        from curves import BUILTIN_CURVES, builtin_curve, curve_points_r3, random_inversion_point
        from diagram import ClosedPolygon
        from invariants import classify_hexagon

        for name in BUILTIN_CURVES:
            builtin_curve(name)
            print(f"  ✓ {name}")

        curve = builtin_curve("paper-trefoil")
        I = random_inversion_point(curve, 0)
        hexagon = ClosedPolygon(curve_points_r3(curve, np.arange(6) / 6.0, I))
        knot_class = classify_hexagon(hexagon)
        if not knot_class.is_trefoil:
            print(f"  ❌ 等距六边形分类为 {knot_class.value}")
            return False
        print(f"  ✓ 等距六边形: {knot_class.value}")
        print("\n✓ 内置曲线正常")
        return True
    except Exception as e:
        print(f"\n❌ 内置曲线检查失败: {e}")
        return False


def check_tests():
    """检查测试文件是否存在"""
    print()
    return _check_paths("检查测试文件...", TEST_FILES)


def main():
    """主函数"""
    print("=" * 60)
    print("项目设置验证")
    print("=" * 60)
    print()

    results = [
        ("文件检查", check_files()),
        ("模块导入", check_imports()),
        ("核心依赖", check_dependencies()),
        ("开发依赖", check_dev_dependencies()),
        ("配置检查", check_config()),
        ("内置曲线", check_curves()),
        ("测试文件", check_tests()),
    ]

    print("\n" + "=" * 60)
    print("验证总结")
    print("=" * 60)

    passed = sum(1 for _, result in results if result)
    for name, result in results:
        print(f"{'✓' if result else '❌'} {name}")

    print()
    print(f"通过: {passed}/{len(results)}")

    if passed == len(results):
        print("\n🎉 所有检查通过！项目设置正确。")
        print("\n下一步:")
        print("  1. 运行测试: pytest tests/ -v")
        print("  2. 试运行: python main.py a2 torus-2-5")
        return 0
    print("\n⚠ 部分检查未通过，请根据上述提示修复。")
    return 1


if __name__ == "__main__":
    sys.exit(main())
