"""
配置加载模块测试
"""
import pytest
from pathlib import Path
from types import SimpleNamespace
from unittest.mock import patch

from errors import ConfigError


class TestGetBasePath:
    """测试 get_base_path 函数"""

    def test_development_environment(self):
        """测试开发环境"""
        from config_loader import get_base_path

        base_path = get_base_path()
        assert isinstance(base_path, Path)
        assert base_path.exists()

    @patch('sys.frozen', True, create=True)
    @patch('sys.executable', '/path/to/hexa.exe')
    def test_frozen_environment(self):
        """测试打包环境"""
        from config_loader import get_base_path

        base_path = get_base_path()
        assert base_path == Path('/path/to')


class TestLoadConfig:
    """测试 load_config 函数"""

    def test_load_default_config(self):
        """测试加载默认配置"""
        from config_loader import load_config

        config = load_config()

        assert config is not None
        assert hasattr(config, 'COPLANAR_TOL')
        assert hasattr(config, 'PRISM_TOL')
        assert hasattr(config, 'DEFAULT_BUDGET')
        assert hasattr(config, 'CHECKPOINT_DIR')

    def test_config_values_types(self):
        """测试配置值的类型"""
        from config_loader import load_config

        config = load_config()

        assert isinstance(config.LM_MAX_ITER, int)
        assert isinstance(config.WORKERS, int)
        assert isinstance(config.COPLANAR_TOL, float)
        assert isinstance(config.OUTPUT_DIR, Path)

    def test_every_tolerance_name_points_to_constant(self):
        """每个命令行容差名都对应一个存在的配置常量"""
        from config_loader import TOLERANCE_NAMES, load_config

        config = load_config()
        for name, key in TOLERANCE_NAMES.items():
            assert hasattr(config, key), name
            assert getattr(config, key) > 0

    def test_private_config_overlay(self, tmp_path):
        """私有配置覆盖默认值"""
        import config_loader

        (tmp_path / 'config_private.py').write_text("DEFAULT_BUDGET = 123\n", encoding="utf-8")
        import config as default_config
        original = default_config.DEFAULT_BUDGET
        try:
            with patch.object(config_loader, 'get_base_path', return_value=tmp_path):
                loaded = config_loader.load_config()
            assert loaded.DEFAULT_BUDGET == 123
        finally:
            default_config.DEFAULT_BUDGET = original

    def test_broken_private_config_is_reported(self, tmp_path, capsys):
        """私有配置出错时打印警告并继续"""
        import config_loader

        (tmp_path / 'config_private.py').write_text("raise RuntimeError('坏配置')\n", encoding="utf-8")
        with patch.object(config_loader, 'get_base_path', return_value=tmp_path):
            loaded = config_loader.load_config()

        assert loaded is not None
        assert "⚠" in capsys.readouterr().err


class TestResolveWorkers:
    """测试 resolve_workers 函数"""

    def test_default_from_config(self):
        from config_loader import resolve_workers

        config = SimpleNamespace(WORKERS=3, THREADS_ENV="HEXA_THREADS")
        assert resolve_workers(config, environ={}) == 3

    def test_environment_wins(self):
        from config_loader import resolve_workers

        config = SimpleNamespace(WORKERS=1, THREADS_ENV="HEXA_THREADS")
        assert resolve_workers(config, environ={"HEXA_THREADS": "6"}) == 6

    @pytest.mark.parametrize("raw", ["abc", "0", "-2"])
    def test_invalid_environment_falls_back(self, raw, capsys):
        """无效的环境变量回退到默认值并给出警告"""
        from config_loader import resolve_workers

        config = SimpleNamespace(WORKERS=2, THREADS_ENV="HEXA_THREADS")
        assert resolve_workers(config, environ={"HEXA_THREADS": raw}) == 2
        assert "⚠" in capsys.readouterr().err


class TestApplyOverrides:
    """测试命令行容差覆盖"""

    def test_known_name_is_applied(self):
        from config_loader import apply_overrides

        config = SimpleNamespace(COPLANAR_TOL=1e-8)
        applied = apply_overrides(config, {"coplanar": "1e-6"})

        assert config.COPLANAR_TOL == 1e-6
        assert applied == {"COPLANAR_TOL": 1e-6}

    def test_unknown_name(self):
        from config_loader import apply_overrides

        with pytest.raises(ConfigError, match="未知容差"):
            apply_overrides(SimpleNamespace(), {"nonsense": "1"})

    @pytest.mark.parametrize("raw", ["0", "-1e-3", "abc"])
    def test_invalid_value(self, raw):
        from config_loader import apply_overrides

        with pytest.raises(ConfigError):
            apply_overrides(SimpleNamespace(PRISM_TOL=1e-10), {"prism": raw})

    def test_config_error_is_input_error(self):
        """覆盖错误的退出码为 2"""
        assert ConfigError.exit_code == 2

    def test_replay_overrides(self, monkeypatch):
        """工作进程重放覆盖值到 config 模块"""
        import config
        from config_loader import replay_overrides

        monkeypatch.setattr(config, "PRISM_TOL", config.PRISM_TOL)
        replay_overrides({"PRISM_TOL": 1e-7})
        assert config.PRISM_TOL == 1e-7


class TestGetConfigValue:
    """测试 get_config_value 函数"""

    def test_get_existing_value(self):
        """测试获取存在的配置值"""
        from config_loader import get_config_value, load_config

        config = load_config()
        value = get_config_value(config, 'LM_MAX_ITER')

        assert value is not None
        assert isinstance(value, int)

    def test_get_nonexistent_value_with_default(self):
        """测试获取不存在的配置值（使用默认值）"""
        from config_loader import get_config_value, load_config

        config = load_config()
        assert get_config_value(config, 'NONEXISTENT_KEY', 9999) == 9999

    def test_get_nonexistent_value_without_default(self):
        """测试获取不存在的配置值（无默认值）"""
        from config_loader import get_config_value, load_config

        config = load_config()
        assert get_config_value(config, 'NONEXISTENT_KEY') is None


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
