"""
检查点功能测试
"""
import numpy as np
import pytest

import config
from curves import builtin_curve
from search import (
    CheckpointManager,
    SearchBudget,
    SearchStats,
    _run_chunk,
    find_inscribed_trefoils,
    search_run_key,
)


class TestCheckpointManager:
    """测试 CheckpointManager 类"""

    @pytest.fixture
    def temp_checkpoint_dir(self, tmp_path):
        """创建临时检查点目录"""
        return tmp_path / "test_checkpoints"

    @pytest.fixture
    def manager(self, temp_checkpoint_dir):
        """创建检查点管理器实例"""
        return CheckpointManager(checkpoint_dir=temp_checkpoint_dir, save_interval=5)

    def test_init(self, manager, temp_checkpoint_dir):
        """测试初始化"""
        assert manager.checkpoint_dir == temp_checkpoint_dir
        assert manager.save_interval == 5
        assert temp_checkpoint_dir.exists()

    def test_get_checkpoint_path(self, manager):
        """测试获取检查点路径"""
        path = manager.get_checkpoint_path("run_abc")
        assert path.name == "run_abc_checkpoint.pkl"
        assert path.parent == manager.checkpoint_dir

    def test_save_and_load_checkpoint(self, manager):
        """测试保存和加载检查点"""
        outcomes = {0: "chunk-0", 2: "chunk-2"}

        manager.save_checkpoint("run_abc", outcomes, 10.5)
        checkpoint = manager.load_checkpoint("run_abc")

        assert checkpoint is not None
        assert checkpoint['outcomes'] == outcomes
        assert checkpoint['completed'] == [0, 2]
        assert checkpoint['elapsed'] == 10.5
        assert 'timestamp' in checkpoint

    def test_load_nonexistent_checkpoint(self, manager):
        """测试加载不存在的检查点"""
        assert manager.load_checkpoint("nonexistent_run") is None

    def test_load_corrupted_checkpoint(self, manager, capsys):
        """损坏的检查点返回 None 并打印警告"""
        manager.get_checkpoint_path("broken").write_bytes(b"not a pickle")

        assert manager.load_checkpoint("broken") is None
        assert "⚠" in capsys.readouterr().err

    def test_clear_checkpoint(self, manager):
        """测试清除检查点"""
        manager.save_checkpoint("run_abc", {0: 1}, 5.0)
        checkpoint_path = manager.get_checkpoint_path("run_abc")
        assert checkpoint_path.exists()

        manager.clear_checkpoint("run_abc")
        assert not checkpoint_path.exists()

    def test_clear_nonexistent_checkpoint(self, manager):
        """测试清除不存在的检查点（不应报错）"""
        manager.clear_checkpoint("nonexistent_run")

    def test_overwrite_checkpoint(self, manager):
        """测试覆盖已存在的检查点"""
        manager.save_checkpoint("run_abc", {0: 1}, 5.0)
        manager.save_checkpoint("run_abc", {0: 1, 1: 2, 2: 3}, 10.0)

        checkpoint = manager.load_checkpoint("run_abc")
        assert len(checkpoint['outcomes']) == 3
        assert checkpoint['elapsed'] == 10.0


class TestCheckpointIntegration:
    """测试搜索的断点恢复"""

    @pytest.fixture
    def manager(self, tmp_path):
        """创建检查点管理器"""
        return CheckpointManager(checkpoint_dir=tmp_path / "checkpoints", save_interval=2)

    @pytest.fixture
    def small_chunks(self, monkeypatch):
        monkeypatch.setattr(config, "SEARCH_CHUNK_SIZE", 40)

    def test_run_key_depends_on_budget(self, small_chunks):
        """预算或种子不同，检查点键不同"""
        curve = builtin_curve("round-unknot")
        a = search_run_key(curve, SearchBudget(max_samples=120, seed=0), None)
        b = search_run_key(curve, SearchBudget(max_samples=120, seed=1), None)
        assert a != b
        assert a == search_run_key(curve, SearchBudget(max_samples=120, seed=0), None)

    def test_resume_from_checkpoint(self, manager, small_chunks, capsys):
        """从部分完成的检查点恢复，结果与一次跑完相同"""
        curve = builtin_curve("round-unknot")
        budget = SearchBudget(max_samples=120, seed=7, refinement_steps=0)

        full = find_inscribed_trefoils(curve, budget, progress=False)

        # 模拟中断：只完成第 0 个任务块
        seeds = np.random.SeedSequence(budget.seed).spawn(3)
        first = _run_chunk((curve, None, 0, seeds[0], 40, 0))
        run_key = search_run_key(curve, budget, None)
        manager.save_checkpoint(run_key, {0: first}, 1.0)

        resumed = find_inscribed_trefoils(
            curve, budget, checkpoint_manager=manager, resume=True, progress=False
        )

        assert "从检查点恢复 1" in capsys.readouterr().err
        assert resumed.stats == full.stats
        assert resumed.finds == full.finds
        assert resumed.stats.chunks == 3
        # 完整跑完后检查点被清除
        assert not manager.get_checkpoint_path(run_key).exists()

    def test_stats_merge(self):
        """统计量按字段累加"""
        total = SearchStats(samples=10, unknots=3)
        total.merge(SearchStats(samples=5, unknots=1, chunks=1))
        assert total.samples == 15
        assert total.unknots == 4
        assert total.chunks == 1


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
