"""
配置加载模块
支持默认配置、外部配置覆盖以及命令行容差覆盖
"""
import importlib.util
import os
import sys
from pathlib import Path
from typing import Any, Dict, Mapping, Optional

from errors import ConfigError

# 命令行 --tol.<name> 与配置常量的对应关系
TOLERANCE_NAMES: Dict[str, str] = {
    "clearance": "INVERSION_CLEARANCE",
    "auto-clearance": "AUTO_INVERSION_CLEARANCE",
    "vertex": "VERTEX_CLEARANCE",
    "angle": "CROSSING_SINE_TOL",
    "depth": "DEPTH_SEPARATION_TOL",
    "embedding": "EMBEDDING_TOL",
    "coplanar": "COPLANAR_TOL",
    "cospherical": "COSPHERICAL_TOL",
    "colinear": "COLINEAR_TOL",
    "circle": "CIRCLE_TOL",
    "bad-ratio": "BAD_RATIO_RTOL",
    "rho": "RHO_DEFAULT",
    "prism": "PRISM_TOL",
    "order-gap": "ORDER_GAP_TOL",
    "fd-step": "FD_STEP",
    "corrector": "CORRECTOR_TOL",
    "trace-accept": "TRACE_ACCEPT_TOL",
    "nullspace": "NULLSPACE_RTOL",
    "refine-sigma": "REFINE_SIGMA",
}


def get_base_path() -> Path:
    """
    获取基础路径，兼容开发环境和打包后的环境

    Returns:
        Path: 基础路径
    """
    if getattr(sys, 'frozen', False):
        # 打包后的环境
        return Path(sys.executable).parent
    else:
        # 开发环境
        return Path(__file__).parent


def _overlay_module(target: Any, path: Path, module_name: str, label: str) -> None:
    """把 path 处模块中的公开名字覆盖到 target 上"""
    try:
        spec = importlib.util.spec_from_file_location(module_name, path)
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)

        for key in dir(module):
            if not key.startswith('_'):
                setattr(target, key, getattr(module, key))

        print(f"✓ 已加载{label}: {path}", file=sys.stderr)
    except Exception as e:
        print(f"⚠ 加载{label}失败: {e}", file=sys.stderr)


def load_config() -> Any:
    """
    加载配置，支持多层配置覆盖

    优先级（从低到高）：
    1. 默认配置文件（内置的 config.py）
    2. 私有配置文件（config_private.py）- 用户个人配置，不提交到 git
    3. 外部配置文件（可执行文件同级目录的 config.py）- 打包后的外部配置

    Returns:
        配置模块对象（就地修改，其他模块通过 import config 读取到同一对象）
    """
    import config as default_config

    base_path = get_base_path()

    private_config_path = base_path / 'config_private.py'
    if private_config_path.exists():
        _overlay_module(default_config, private_config_path, "config_private", "私有配置")

    external_config_path = base_path / 'config.py'
    if external_config_path.exists() and external_config_path != Path(default_config.__file__):
        _overlay_module(default_config, external_config_path, "external_config", "外部配置")

    return default_config


def resolve_workers(config: Any, environ: Optional[Mapping[str, str]] = None) -> int:
    """
    解析并行进程数：环境变量 HEXA_THREADS 优先，其次配置 WORKERS

    Args:
        config: 配置模块
        environ: 环境变量映射（测试时可注入）

    Returns:
        int: 进程数（≥ 1）
    """
    environ = os.environ if environ is None else environ
    default = max(1, int(get_config_value(config, "WORKERS", 1)))
    raw = environ.get(get_config_value(config, "THREADS_ENV", "HEXA_THREADS"))
    if raw is None or raw == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        print(f"⚠ 无法解析进程数 {raw!r}，使用默认值 {default}", file=sys.stderr)
        return default
    if value < 1:
        print(f"⚠ 进程数必须 ≥ 1（收到 {value}），使用默认值 {default}", file=sys.stderr)
        return default
    return value


def apply_overrides(config: Any, overrides: Mapping[str, str]) -> Dict[str, float]:
    """
    应用命令行容差覆盖（--tol.<name> VALUE）

    Args:
        config: 配置模块
        overrides: 名称 -> 字符串值

    Returns:
        dict: 实际写入的 {常量名: 数值}，可传给工作进程重放

    Raises:
        ConfigError: 名称未知、数值无法解析或不为正
    """
    applied: Dict[str, float] = {}
    for name, raw in overrides.items():
        key = TOLERANCE_NAMES.get(name)
        if key is None:
            known = ", ".join(sorted(TOLERANCE_NAMES))
            raise ConfigError(f"未知容差名称 --tol.{name}（可用: {known}）")
        try:
            value = float(raw)
        except (TypeError, ValueError) as e:
            raise ConfigError(f"--tol.{name} 的值无法解析为数字: {raw!r}") from e
        if not value > 0:
            raise ConfigError(f"--tol.{name} 必须为正数（收到 {value}）")
        setattr(config, key, value)
        applied[key] = value
    return applied


def replay_overrides(applied: Mapping[str, float]) -> None:
    """在工作进程中重放已解析的覆盖值"""
    import config as default_config

    for key, value in applied.items():
        setattr(default_config, key, value)


def get_config_value(config: Any, key: str, default: Any = None) -> Any:
    """
    安全地获取配置值

    Args:
        config: 配置模块
        key: 配置键名
        default: 默认值

    Returns:
        配置值或默认值
    """
    return getattr(config, key, default)
