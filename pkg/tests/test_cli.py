"""
命令行测试
"""
import json
from pathlib import Path

import pandas as pd
import pytest

import config
import main
from errors import ConfigError, InputError, UnknownCurve

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def isolated(tmp_path, monkeypatch):
    """检查点与输出写到临时目录，进程数固定为 1"""
    monkeypatch.setattr(config, "CHECKPOINT_DIR", tmp_path / "checkpoints")
    monkeypatch.setattr(config, "OUTPUT_DIR", tmp_path / "outputs")
    monkeypatch.delenv("HEXA_THREADS", raising=False)
    return tmp_path


def _stdout_json(capsys):
    return json.loads(capsys.readouterr().out)


class TestSplitTolerances:
    """测试容差参数拆分"""

    def test_separate_value(self):
        rest, overrides = main.split_tolerances(["classify", "--tol.coplanar", "1e-7", "p.json"])
        assert rest == ["classify", "p.json"]
        assert overrides == {"coplanar": "1e-7"}

    def test_inline_value(self):
        rest, overrides = main.split_tolerances(["--tol.prism=1e-9", "prism", "torus-2-3"])
        assert rest == ["prism", "torus-2-3"]
        assert overrides == {"prism": "1e-9"}

    def test_missing_value(self):
        with pytest.raises(ConfigError):
            main.split_tolerances(["classify", "--tol.coplanar"])


class TestHelpers:
    """测试曲线读取与表格输出"""

    def test_load_builtin_curve(self):
        assert main.load_curve("torus-2-3").label == "torus-2-3"

    def test_load_curve_file(self):
        curve = main.load_curve(str(FIXTURES / "ellipse_curve.json"))
        assert curve.ambient == "R3"

    def test_unknown_curve(self):
        with pytest.raises(UnknownCurve):
            main.load_curve("no-such-curve")

    def test_write_csv(self, tmp_path):
        path = tmp_path / "rows.csv"
        main.write_table([{"t1": 0.1, "cls": "TrefoilLeft"}], path)
        df = pd.read_csv(path)
        assert list(df.columns) == ["t1", "cls"]
        assert df.loc[0, "cls"] == "TrefoilLeft"

    def test_write_xlsx(self, tmp_path):
        path = tmp_path / "rows.xlsx"
        main.write_table([{"t1": 0.1}, {"t1": 0.2}], path)
        assert len(pd.read_excel(path, engine="openpyxl")) == 2

    def test_unsupported_table_suffix(self, tmp_path):
        with pytest.raises(InputError, match="csv"):
            main.write_table([{"t1": 0.1}], tmp_path / "rows.txt")


class TestClassifyCommand:
    """测试 classify 子命令"""

    def test_planar_hexagon(self, capsys):
        code = main.main(["classify", str(FIXTURES / "planar_hexagon.json"), "--json", "--directions", "3"])
        assert code == 0
        payload = _stdout_json(capsys)
        assert payload["class"] == "Unknot"
        assert payload["writhes"] == [0, 0, 0]
        assert payload["v2"] == 0

    def test_csv_input(self, capsys):
        assert main.main(["classify", str(FIXTURES / "planar_hexagon.csv"), "--json"]) == 0
        assert _stdout_json(capsys)["class"] == "Unknot"

    def test_malformed_input(self, capsys):
        assert main.main(["classify", str(FIXTURES / "malformed.json")]) == 2
        assert "❌" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert main.main(["classify", str(tmp_path / "absent.json")]) == 2

    def test_unknown_tolerance(self, capsys):
        code = main.main(["--tol.nonsense", "1", "classify", str(FIXTURES / "planar_hexagon.json")])
        assert code == 2
        assert "nonsense" in capsys.readouterr().err

    def test_export_then_render(self, isolated, capsys):
        export = isolated / "diagram.json"
        svg = isolated / "diagram.svg"
        assert main.main(["classify", str(FIXTURES / "planar_hexagon.json"), "--export", str(export)]) == 0
        assert json.loads(export.read_text(encoding="utf-8"))["kind"] == "diagram"

        assert main.main(["render", str(export), "--out", str(svg), "--json"]) == 0
        assert svg.read_text(encoding="utf-8").count('class="strand"') == 6

    def test_render_default_output_dir(self, isolated):
        assert main.main(["render", str(FIXTURES / "diagram_three_crossings.json")]) == 0
        assert (isolated / "outputs" / "diagram_three_crossings.svg").exists()


class TestCurveCommands:
    """测试 a2 / prism / search 子命令"""

    def test_a2_round_unknot(self, capsys):
        assert main.main(["a2", "round-unknot", "--resolution", "24"]) == 0
        assert capsys.readouterr().out.strip() == "0"

    def test_r3_curve_ignores_inversion(self, capsys):
        assert main.main(["a2", "round-unknot", "--resolution", "24", "--inversion", "0,0,0,1"]) == 0
        assert "⚠" in capsys.readouterr().err

    def test_prism_json(self, capsys):
        code = main.main(["prism", "paper-trefoil", "--seed-tuple", "0.01,0.18,0.33,0.52,0.66,0.84", "--json"])
        assert code == 0
        payload = _stdout_json(capsys)
        assert payload["curve"] == "paper-trefoil"
        assert payload["uniform_alignment_error"] < 1e-6
        assert payload["apex_at_infinity"] is True
        assert payload["iterations"] == len(payload["history"]) - 1

    def test_trace_rejects_r3_curve(self, capsys):
        assert main.main(["trace", "torus-2-3", "--quiet"]) == 2
        assert "S³" in capsys.readouterr().err

    def test_prism_bad_seed_tuple(self):
        with pytest.raises(SystemExit):
            main.main(["prism", "paper-trefoil", "--seed-tuple", "0.1,0.2"])

    def test_search_without_finds(self, isolated, capsys):
        """圆周上没有三叶结：预算用尽，退出码 4，末行为汇总"""
        code = main.main(["search", "round-unknot", "--budget", "200", "--quiet", "--seed", "3"])
        assert code == 4
        captured = capsys.readouterr()
        lines = captured.out.strip().splitlines()
        summary = json.loads(lines[-1])["summary"]
        assert summary["finds"] == 0
        assert summary["target_met"] is False
        assert summary["stats"]["samples"] == 200
        assert "不是反例" in captured.err

    def test_search_table(self, isolated):
        table = isolated / "finds.csv"
        main.main(["search", "round-unknot", "--budget", "64", "--quiet", "--table", str(table)])
        assert table.exists()


class TestRulesCommand:
    """测试 rules 子命令"""

    def test_uncovered_case(self, capsys):
        code = main.main(["rules", str(FIXTURES / "planar_canonical.json"), "--one-sided", "1,2,3"])
        assert code == 1
        assert "❌" in capsys.readouterr().err

    def test_bad_indices(self):
        with pytest.raises(SystemExit):
            main.main(["rules", str(FIXTURES / "planar_canonical.json"), "--one-sided", "a,b"])

    def test_canonical_lifts_to_trefoil(self, capsys):
        code = main.main(["rules", str(FIXTURES / "planar_canonical.json"), "--one-sided", "3,4,6", "--plain", "--json"])
        assert code == 0
        payload = _stdout_json(capsys)
        assert payload["rules_hold"] is True
        assert payload["class"] == "TrefoilRight"

    def test_colinear_configuration(self, capsys):
        """共线三点走类型 3 构造"""
        code = main.main(["rules", str(FIXTURES / "planar_colinear.json"), "--json"])
        assert code == 0
        payload = _stdout_json(capsys)
        assert payload["type"] == 3
        assert payload["heights"]["strategy"] == "colinear"
        assert payload["colinear"]["line"] == [3, 4, 5]
        assert payload["class"] in ("TrefoilRight", "TrefoilLeft")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
