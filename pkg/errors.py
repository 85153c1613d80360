"""
异常定义

所有异常继承 HexaError，exit_code 即命令行退出码：
0 成功 / 1 内部错误 / 2 输入错误 / 3 投影不一致 / 4 搜索无结论 / 5 不收敛 / 6 不变量不稳定
"""
from typing import Any, Optional


class HexaError(Exception):
    """基类"""

    exit_code = 1


# ==================== 输入错误（退出码 2） ====================

class InputError(HexaError):
    exit_code = 2


class UnknownCurve(InputError):
    """内置曲线名称不存在"""


class InvalidCurve(InputError):
    """曲线违反周期性 / S³ 约束 / 导数非零等前提"""


class InvalidPolygon(InputError):
    """多边形退化：顶点过少、边长为零或自交"""


class SchemaError(InputError):
    """文件结构校验失败（消息中包含出错位置）"""


class ConfigError(InputError):
    """配置或容差覆盖无效"""


# ==================== 一致性错误（退出码 3） ====================

class InconsistentProjections(HexaError):
    """不同投影方向给出不同的不变量"""

    exit_code = 3


class GenericityExhausted(HexaError):
    """多次抽取仍找不到通用投影方向"""

    exit_code = 3


# ==================== 搜索无结论（退出码 4） ====================

class BudgetExhausted(HexaError):
    """预算用尽而目标未达成，result 携带部分结果与统计"""

    exit_code = 4

    def __init__(self, message: str, result: Optional[Any] = None):
        super().__init__(message)
        self.result = result


# ==================== 不收敛（退出码 5） ====================

class NoConvergence(HexaError):
    exit_code = 5


class OrderingCollapse(NoConvergence):
    """两个参数合并（间隔低于阈值）"""


class TangentDegenerate(NoConvergence):
    """雅可比零空间维数不为 1"""

    def __init__(self, dimension: int, message: Optional[str] = None):
        super().__init__(message or f"雅可比零空间维数为 {dimension}（应为 1）")
        self.dimension = dimension


# ==================== 不变量不稳定（退出码 6） ====================

class UnstableInvariant(HexaError):
    exit_code = 6


# ==================== 几何计算错误 ====================

class PointAtInfinity(HexaError):
    """点距离反演点过近，球极投影无定义"""


class NonGenericDirection(HexaError):
    """投影方向非通用；tolerance 为失败的容差名称"""

    def __init__(self, tolerance: str, message: Optional[str] = None):
        super().__init__(message or f"投影方向非通用（{tolerance}）")
        self.tolerance = tolerance


class TooManyCrossings(HexaError):
    pass


class DegenerateChord(HexaError):
    pass


class WindowTooLarge(HexaError):
    pass


class NotCoplanar(HexaError):
    pass


class UnclassifiableConfig(HexaError):
    pass


class MissingCrossing(HexaError):
    """平面构型不具备七交叉点模式"""


class UncoveredCase(HexaError):
    """单侧点集合不在已覆盖的情形族内"""

    def __init__(self, message: str, orbit: Optional[Any] = None):
        super().__init__(message)
        self.orbit = orbit


class HeightsInfeasible(UncoveredCase):
    """模板与线性规划都找不到满足规则的高度"""
