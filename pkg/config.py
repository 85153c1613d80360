# config.py
import sys
from pathlib import Path


def _get_base_path() -> Path:
    """获取基础路径，兼容开发和打包环境"""
    if getattr(sys, 'frozen', False):
        # 打包后的环境
        return Path(sys.executable).parent
    else:
        # 开发环境
        return Path(__file__).parent


# ===== 输入输出 =====
_ROOT = _get_base_path()
OUTPUT_DIR = _ROOT / "outputs"          # 默认输出目录（SVG、表格、轨迹 JSON）
CHECKPOINT_DIR = _ROOT / "checkpoints"  # 搜索断点目录

# ===== 曲线与球极投影 =====
INVERSION_CLEARANCE      = 1e-3    # 反演点 I 与曲线的最小距离
AUTO_INVERSION_CLEARANCE = 0.2     # 自动选取 I 时要求的距离（投影坐标不至于过大）
CURVE_CHECK_GRID         = 10_000  # 正则性 / S³ 约束检查的采样点数
S3_NORM_TOL              = 1e-12   # S³ 曲线 ||γ(t)| - 1| 上限
PERIODICITY_TOL          = 1e-12   # |γ(t) - γ(t+1)| 上限
ROUND_TRIP_TOL           = 1e-10   # 球极投影往返误差上限

# ===== 投影图通用性 =====
# 所有长度容差均在“归一化投影坐标”（投影直径 = 1）下生效
VERTEX_CLEARANCE     = 1e-9   # 交叉点与任一顶点像的最小距离
CROSSING_SINE_TOL    = 1e-6   # 交叉角正弦下限
DEPTH_SEPARATION_TOL = 1e-12  # 交叉处上下两股的深度差下限
MIN_EDGE_LENGTH      = 1e-12  # 相邻顶点最小距离
EMBEDDING_TOL        = 1e-12  # 非相邻边在 ℝ³ 中的最小距离
DIRECTION_MAX_DRAWS  = 64     # 随机投影方向最多抽取次数
MAX_STATE_SUM_CROSSINGS = 20  # Kauffman 括号状态和允许的最大交叉数

# ===== 不变量共识 =====
CLASSIFY_DIRECTIONS = 5    # 六边形分类的投影方向数（要求一致）
A2_DIRECTIONS       = 7    # a₂ 取众数的方向数
A2_RESOLUTION       = 96   # a₂ 默认多边形分辨率（另取 2 倍分辨率复核）
MIN_A2_RESOLUTION   = 24
VERIFY_DIRECTIONS   = 10   # 搜索结果复核时使用的新方向数

# ===== 平面构型 =====
COPLANAR_TOL    = 1e-8   # 共面容差（直径归一化后，绝对值）
COSPHERICAL_TOL = 1e-8   # 共球容差
COLINEAR_TOL    = 1e-8   # 三点共线容差（归一化三角形面积）
COLINEAR_SHIFT  = 1e-3   # 类型 3 构造中把一点移出直线的距离（相对直径）
CIRCLE_TOL      = 1e-6   # 反演像落在外接圆上的判定容差
NESTING_TOL     = 1e-9   # 两圆“严格嵌套”的余量
BAD_RATIO_RTOL  = 1e-9   # 坏构型比值等式的相对容差
RHO_DEFAULT     = 100.0  # “≪” 的比值 ρ
RHO_MAX         = 1e6    # ρ 倍增搜索上限
HEIGHT_SCALE    = 0.05   # 高度 f 的幅度上限（相对直径）
RULE_MARGIN_TOL = 1e-9   # 线性规划求得的最小裕量
ONE_SIDED_SAMPLES = 64   # 单侧性检测每侧采样数
ANGLE_TOL       = 1e-6   # 两个平面事件视为不同平面的二面角差

# ===== 棱柱求解（Levenberg–Marquardt）=====
PRISM_TOL        = 1e-10  # 残差范数收敛阈值
LM_LAMBDA_INIT   = 1e-3   # 初始阻尼
LM_LAMBDA_FACTOR = 10.0   # 拒绝 ×10，接受 ÷10
LM_LAMBDA_MIN    = 1e-15
LM_LAMBDA_MAX    = 1e12   # 超过即视为停滞
LM_MAX_ITER      = 200
ORDER_GAP_TOL    = 1e-6   # 两个参数合并的判定阈值
FD_STEP          = 1e-7   # 中心差分步长（雅可比）

# ===== 数值延拓 =====
TRACE_STEP_INIT       = 1e-3
TRACE_STEP_MIN        = 1e-5
TRACE_STEP_MAX        = 1e-2
TRACE_MAX_STEPS       = 2000
CORRECTOR_MAX_ITER    = 12
CORRECTOR_TOL         = 1e-10  # 校正步目标残差
TRACE_ACCEPT_TOL      = 1e-8   # 接受一步所需残差上限
NULLSPACE_RTOL        = 1e-6   # 奇异值低于 rtol·σ_max 视为零空间
CLOSURE_MIN_ARCLENGTH = 0.05   # 判定闭合前必须走过的弧长

# ===== 内接三叶结搜索 =====
DEFAULT_BUDGET           = 100_000
DEFAULT_REFINEMENT_STEPS = 32     # 每个发现点周围的局部高斯采样数
REFINE_SIGMA             = 0.01
SEARCH_CHUNK_SIZE        = 4096   # 每个任务块的样本数（块内随机数独立播种）

# ===== 并行配置 =====
# 设置为 1 使用单进程模式；环境变量 HEXA_THREADS 优先
WORKERS     = 1
THREADS_ENV = "HEXA_THREADS"

# ===== 检查点配置 =====
CHECKPOINT_SAVE_INTERVAL = 8  # 每完成多少个任务块保存一次检查点
