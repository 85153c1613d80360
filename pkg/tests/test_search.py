"""
搜索、棱柱求解与延拓测试
"""
import numpy as np
import pytest
from scipy import stats

import config
from config_geometry import (
    SixTuple,
    canonical_figure6_points,
    cyclic_alignment_error,
    epsilon_rotate,
    make_prism_configuration,
    make_planar_configuration,
)
from curves import FourierTerm, PeriodicCurve, builtin_curve, eval_curve, make_inversion_point
from diagram import ClosedPolygon, project_diagram
from errors import (
    BudgetExhausted,
    DegenerateChord,
    InputError,
    NoConvergence,
    NonGenericDirection,
    OrderingCollapse,
)
from search import (
    Find,
    SearchBudget,
    SearchTarget,
    TraceResult,
    batch_crossing_counts,
    find_inscribed_trefoils,
    hexagon_points,
    make_trace_point,
    residual_jacobian,
    sample_ordered_tuples,
    scan_planar_events,
    solve_prism,
    trace_prism_manifold,
)

UNIFORM = tuple(k / 6.0 for k in range(6))
SEED_TUPLE = (0.01, 0.18, 0.33, 0.52, 0.66, 0.84)

_R = np.sqrt(3.0) / 2.0
TWISTED_PRISM = np.array([
    (1.0, 0.0, 1.0), (-_R, 0.5, -1.0), (-0.5, -_R, 1.0),
    (_R, 0.5, -1.0), (-0.5, _R, 1.0), (0.0, -1.0, -1.0),
])


@pytest.fixture
def paper_trefoil():
    return builtin_curve("paper-trefoil")


def _clifford_curve():
    """S³ 中 Clifford 型环面上的 (1, 3) 曲线：等距六点的对角线都过原点"""
    return PeriodicCurve(
        "S3",
        (
            (FourierTerm(1, 0.8),),
            (FourierTerm(1, 0.0, 0.8),),
            (FourierTerm(3, 0.6),),
            (FourierTerm(3, 0.0, 0.6),),
        ),
        label="clifford-1-3",
    )


@pytest.fixture
def small_chunks(monkeypatch):
    monkeypatch.setattr(config, "SEARCH_CHUNK_SIZE", 64)


class TestSearchBudget:
    """测试预算与目标"""

    def test_defaults(self):
        budget = SearchBudget()
        assert budget.max_samples == config.DEFAULT_BUDGET
        assert budget.target is SearchTarget.ANY

    def test_target_from_string(self):
        assert SearchBudget(target="both").target is SearchTarget.BOTH

    @pytest.mark.parametrize("kwargs", [{"max_samples": 0}, {"refinement_steps": -1}])
    def test_invalid(self, kwargs):
        with pytest.raises(InputError):
            SearchBudget(**kwargs)

    def test_unknown_target(self):
        with pytest.raises(ValueError):
            SearchBudget(target="many")

    @pytest.mark.parametrize("target, left, right, expected", [
        ("any", 0, 0, False),
        ("any", 0, 1, True),
        ("left", 0, 3, False),
        ("left", 1, 0, True),
        ("right", 2, 0, False),
        ("both", 1, 0, False),
        ("both", 1, 1, True),
    ])
    def test_satisfied(self, target, left, right, expected):
        assert SearchTarget(target).satisfied(left, right) is expected


class TestSampling:
    """测试采样与批量预筛"""

    @pytest.mark.slow
    def test_order_statistics_coverage(self):
        """排序后第 k 个分量服从 Beta(k, 7−k)：12 等分直方图的 χ² 检验"""
        tuples = sample_ordered_tuples(np.random.default_rng(0), 100_000)
        edges = np.linspace(0.0, 1.0, 13)
        for k in range(6):
            observed, _ = np.histogram(tuples[:, k], bins=edges)
            expected = len(tuples) * np.diff(stats.beta.cdf(edges, k + 1, 6 - k))
            assert stats.chisquare(observed, expected).pvalue > 0.01

    def test_ordered_tuples(self):
        tuples = sample_ordered_tuples(np.random.default_rng(0), 50)
        assert tuples.shape == (50, 6)
        assert np.all(np.diff(tuples, axis=1) >= 0)
        assert np.all((tuples >= 0) & (tuples < 1))

    def test_sampling_is_seeded(self):
        a = sample_ordered_tuples(np.random.default_rng(4), 20)
        b = sample_ordered_tuples(np.random.default_rng(4), 20)
        assert np.array_equal(a, b)

    def test_batch_counts_known_hexagons(self):
        planar = np.array([(np.cos(a), np.sin(a), 0.0) for a in np.linspace(0, 2 * np.pi, 7)[:-1]])
        counts = batch_crossing_counts(np.stack([TWISTED_PRISM, planar]), np.array([0.0, 0.0, 1.0]))
        assert counts.tolist() == [3, 0]

    def test_batch_counts_match_diagrams(self):
        rng = np.random.default_rng(9)
        direction = rng.standard_normal(3)
        hexagons = rng.uniform(-1.0, 1.0, size=(40, 6, 3))
        counts = batch_crossing_counts(hexagons, direction)
        for hexagon, count in zip(hexagons, counts):
            try:
                diagram = project_diagram(ClosedPolygon(hexagon), direction)
            except (NonGenericDirection, InputError):
                continue
            assert diagram.crossing_count == count

    def test_hexagon_points_r3(self):
        curve = builtin_curve("torus-2-3")
        tuples = sample_ordered_tuples(np.random.default_rng(1), 5)
        mask, points = hexagon_points(curve, tuples, None)
        assert mask.all()
        assert points.shape == (5, 6, 3)

    def test_hexagon_points_masks_inversion_point(self, paper_trefoil):
        I = make_inversion_point(eval_curve(paper_trefoil, 0.25))
        tuples = np.array([UNIFORM, (0.05, 0.25, 0.4, 0.55, 0.7, 0.9)])
        mask, points = hexagon_points(paper_trefoil, tuples, I)
        assert mask.tolist() == [True, False]
        assert np.all(np.isfinite(points[0]))


class TestSolvePrism:
    """测试 LM 棱柱求解"""

    def test_converges_to_uniform_tuple(self, paper_trefoil):
        result = solve_prism(paper_trefoil, SEED_TUPLE)
        assert result.residual < config.PRISM_TOL
        assert cyclic_alignment_error(result.tuple.t, UNIFORM) < 1e-6
        assert result.iterations == len(result.history) - 1
        assert all(b < a for a, b in zip(result.history, result.history[1:]))

    def test_fixed_point_seed(self, paper_trefoil):
        result = solve_prism(paper_trefoil, UNIFORM)
        assert result.iterations == 0
        assert len(result.history) == 1
        assert result.apex_at_infinity

    def test_accepts_six_tuple(self, paper_trefoil):
        result = solve_prism(paper_trefoil, SixTuple(UNIFORM, paper_trefoil))
        assert result.iterations == 0

    @pytest.mark.parametrize("seed", [
        (0.1, 0.3, 0.2, 0.4, 0.5, 0.6),
        (0.0, 0.2, 0.4, 0.6, 0.8, 1.0),
        (0.1, 0.2, 0.3),
    ])
    def test_invalid_seed(self, paper_trefoil, seed):
        with pytest.raises(InputError):
            solve_prism(paper_trefoil, seed)

    def test_round_unknot_never_silent(self):
        """平面圆上的解要么不收敛，要么被标记为退化"""
        curve = builtin_curve("round-unknot")
        try:
            result = solve_prism(curve, SEED_TUPLE)
        except NoConvergence:
            return
        assert result.degenerate

    def test_iteration_limit(self, paper_trefoil):
        with pytest.raises(NoConvergence):
            solve_prism(paper_trefoil, SEED_TUPLE, tol=0.0, max_iter=3)

    @pytest.mark.slow
    def test_random_seeds_align(self, paper_trefoil):
        """随机有序初值：每个收敛解都与等距六元组循环对齐"""
        tuples = sample_ordered_tuples(np.random.default_rng(2024), 200)
        converged = 0
        for seed in tuples:
            try:
                result = solve_prism(paper_trefoil, seed)
            except (NoConvergence, OrderingCollapse, DegenerateChord):
                continue
            converged += 1
            assert result.residual < config.PRISM_TOL
            assert cyclic_alignment_error(result.tuple.t, UNIFORM) < 1e-6
        assert converged >= 10

    def test_shifted_seeds_share_class(self, paper_trefoil):
        seed = np.array(SEED_TUPLE)
        a = solve_prism(paper_trefoil, seed)
        b = solve_prism(paper_trefoil, seed + 1.0 / 6.0)
        assert a.class_id == b.class_id

    def test_anchored_jacobian_is_smooth(self, paper_trefoil):
        """锚定符号后，步长减半时差分雅可比基本不变"""
        t = np.array(SEED_TUPLE)
        coarse = residual_jacobian(paper_trefoil, t, h=1e-6)
        fine = residual_jacobian(paper_trefoil, t, h=5e-7)
        assert np.allclose(coarse, fine, rtol=1e-3, atol=1e-6)

    def test_jacobian_shape(self, paper_trefoil):
        jac = residual_jacobian(paper_trefoil, np.array(SEED_TUPLE))
        assert jac.shape[1] == 6


class TestTrace:
    """测试延拓"""

    @pytest.mark.slow
    def test_paper_trefoil_trace_closes(self, paper_trefoil):
        start = solve_prism(paper_trefoil, UNIFORM)
        trace = trace_prism_manifold(paper_trefoil, start, classify=False)
        assert trace.closed
        assert trace.boundary is None
        assert trace.arclength > config.CLOSURE_MIN_ARCLENGTH
        assert all(p.residual < config.TRACE_ACCEPT_TOL for p in trace.points)

    def test_r3_curve_is_rejected(self):
        """ℝ³ 曲线的解集维数大于 1，不做延拓"""
        curve = builtin_curve("torus-2-3")
        start = make_prism_configuration(SixTuple(SEED_TUPLE, curve))
        with pytest.raises(InputError, match="S³"):
            trace_prism_manifold(curve, start, max_steps=1, classify=False)

    def test_synthetic_prism_trace_moves(self):
        curve = _clifford_curve()
        start = solve_prism(curve, UNIFORM)
        assert start.residual < 1e-12
        assert not start.apex_at_infinity

        trace = trace_prism_manifold(curve, start, max_steps=15, classify=False)
        assert len(trace.points) > 1
        assert trace.arclength > 0.0
        assert all(p.residual < config.TRACE_ACCEPT_TOL for p in trace.points)
        assert not np.allclose(trace.points[-1].t, trace.points[0].t)

    def test_bad_start(self, paper_trefoil):
        start = make_prism_configuration(SixTuple(SEED_TUPLE, paper_trefoil))
        with pytest.raises(InputError):
            trace_prism_manifold(paper_trefoil, start, classify=False)


class TestPlanarScan:
    """测试平面事件扫描"""

    def _trace(self, hexagons):
        return TraceResult(points=[make_trace_point(h) for h in hexagons])

    def test_trace_point_flags(self):
        assert not make_trace_point(TWISTED_PRISM).coplanar
        point = make_trace_point(canonical_figure6_points())
        assert point.coplanar
        assert point.cospherical
        assert point.non_generic

    def test_single_event(self):
        trace = self._trace([TWISTED_PRISM, canonical_figure6_points(), TWISTED_PRISM])
        scan = scan_planar_events(trace)
        assert len(scan) == 1
        event = scan[0]
        assert event.index == 1
        assert event.config_type == 1
        assert event.is_bad is True
        assert event.theta == pytest.approx(0.0)
        assert not scan.two_plane_condition

    def test_inversion_image_gives_type_2(self):
        trace = self._trace([canonical_figure6_points()])
        scan = scan_planar_events(trace, inversion=[0.0, 1.0, 0.0])
        assert scan[0].config_type == 2

    def test_consecutive_points_form_one_event(self):
        flat = canonical_figure6_points()
        trace = self._trace([flat, flat * 1.01, TWISTED_PRISM])
        assert len(scan_planar_events(trace)) == 1

    def test_two_plane_condition(self):
        flat = make_planar_configuration(canonical_figure6_points())
        tilted = epsilon_rotate(flat, [0.0, 0.0, 0.0], [1.0, 0.0, 0.0], 0.3)
        trace = self._trace([flat.points, TWISTED_PRISM, tilted])
        scan = scan_planar_events(trace)
        assert len(scan) == 2
        assert scan[1].theta == pytest.approx(0.3)
        assert scan.two_plane_condition


class TestFindInscribedTrefoils:
    """测试搜索主流程"""

    def test_round_unknot_finds_nothing(self, small_chunks):
        curve = builtin_curve("round-unknot")
        result = find_inscribed_trefoils(curve, SearchBudget(max_samples=200, seed=3), progress=False)
        assert result.finds == []
        assert not result.target_met
        assert result.stats.samples == 200
        assert result.stats.chunks == 4
        assert result.stats.classified == 0
        assert result.counts() == {"left": 0, "right": 0}

    def test_deterministic(self, small_chunks):
        curve = builtin_curve("round-unknot")
        budget = SearchBudget(max_samples=150, seed=11)
        a = find_inscribed_trefoils(curve, budget, progress=False)
        b = find_inscribed_trefoils(curve, budget, progress=False)
        assert a.stats == b.stats

    def test_strict_raises_budget_exhausted(self, small_chunks):
        curve = builtin_curve("round-unknot")
        with pytest.raises(BudgetExhausted) as exc_info:
            find_inscribed_trefoils(curve, SearchBudget(max_samples=64), progress=False, strict=True)
        assert exc_info.value.result.stats.samples == 64
        assert BudgetExhausted.exit_code == 4

    @pytest.mark.slow
    def test_workers_do_not_change_result(self, small_chunks):
        curve = builtin_curve("torus-2-3")
        budget = SearchBudget(max_samples=256, seed=5, refinement_steps=2, target="both")
        serial = find_inscribed_trefoils(curve, budget, progress=False)
        parallel = find_inscribed_trefoils(curve, budget, workers=2, progress=False)
        assert serial.stats == parallel.stats
        assert [f.to_record() for f in serial.finds] == [f.to_record() for f in parallel.finds]

    @pytest.mark.slow
    def test_paper_trefoil_finds_are_trefoils(self, paper_trefoil):
        seen = []
        result = find_inscribed_trefoils(
            paper_trefoil, SearchBudget(max_samples=100_000, seed=0, refinement_steps=0),
            progress=False, on_find=seen.append,
        )
        assert len(result.finds) > 0
        assert result.target_met
        assert seen == result.finds
        for find in result.finds:
            assert find.knot_class in ("TrefoilLeft", "TrefoilRight")
            assert SixTuple(find.t)


    @pytest.mark.slow
    def test_paper_trefoil_both_chiralities(self, paper_trefoil):
        result = find_inscribed_trefoils(
            paper_trefoil, SearchBudget(max_samples=100_000, seed=0, target="both"), progress=False,
        )
        assert result.target_met
        counts = result.counts()
        assert counts["left"] > 0
        assert counts["right"] > 0

    @pytest.mark.slow
    def test_figure_eight_finds_trefoil(self):
        """a₂ = −1 为奇数的曲线上能找到内接三叶结"""
        curve = builtin_curve("figure-eight")
        result = find_inscribed_trefoils(curve, SearchBudget(max_samples=1_000_000, seed=0), progress=False)
        assert result.target_met
        assert result.finds[0].knot_class in ("TrefoilLeft", "TrefoilRight")


class TestFindRecord:
    """测试发现记录"""

    def test_to_record(self):
        find = Find([0.1, 0.2, 0.3, 0.4, 0.5, 0.6], "TrefoilLeft", 10, 0.25, 2, "refine")
        record = find.to_record()
        assert record["class"] == "TrefoilLeft"
        assert record["residuals"] == {"prism": 0.25}
        assert record["chunk"] == 2
        assert record["origin"] == "refine"


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
