"""
文件格式校验（pydantic）

曲线 / 多边形 / 平面构型输入，以及供渲染器使用的投影图与构型导出。
"""
# 标准库
import json
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Type, TypeVar, Union

# 第三方库
import pandas as pd
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

# 本地模块
from errors import SchemaError

Vector3 = List[float]
Model = TypeVar("Model", bound=BaseModel)


# ==================== 输入文件 ====================

class FourierTermModel(BaseModel):
    freq: int
    cos: float = 0.0
    sin: float = 0.0


class CurveFile(BaseModel):
    ambient: Literal["R3", "S3"]
    label: str = ""
    coords: List[List[FourierTermModel]]

    @model_validator(mode="after")
    def _coords_match_ambient(self):
        expected = 3 if self.ambient == "R3" else 4
        if len(self.coords) != expected:
            raise ValueError(f"{self.ambient} 曲线需要 {expected} 个坐标列表，收到 {len(self.coords)} 个")
        return self


class PolygonFile(BaseModel):
    vertices: List[Vector3] = Field(..., min_length=3)

    @field_validator("vertices")
    @classmethod
    def _triples(cls, value):
        for k, v in enumerate(value):
            if len(v) != 3:
                raise ValueError(f"第 {k + 1} 个顶点不是三维坐标")
        return value


class PlanarInputFile(BaseModel):
    points: List[Vector3] = Field(..., min_length=6, max_length=6)
    one_sided: List[int] = Field(default_factory=list)
    labels: Optional[List[Literal["OneSided", "TwoSided"]]] = None
    inversion: Optional[Vector3] = None

    @field_validator("points")
    @classmethod
    def _triples(cls, value):
        for k, v in enumerate(value):
            if len(v) != 3:
                raise ValueError(f"第 {k + 1} 个点不是三维坐标")
        return value

    @field_validator("one_sided")
    @classmethod
    def _indices(cls, value):
        if any(i < 1 or i > 6 for i in value):
            raise ValueError("单侧点下标必须在 1..6 内")
        if len(set(value)) != len(value):
            raise ValueError("单侧点下标重复")
        return value


# ==================== 导出文件 ====================

class CrossingExport(BaseModel):
    over_edge: int
    under_edge: int
    over_param: float = Field(..., gt=0.0, lt=1.0)
    under_param: float = Field(..., gt=0.0, lt=1.0)
    sign: Literal[1, -1]


class DiagramExport(BaseModel):
    kind: Literal["diagram"] = "diagram"
    projected: List[List[float]] = Field(..., min_length=3)
    crossings: List[CrossingExport] = Field(default_factory=list)
    direction: Optional[Vector3] = None
    knot_class: Optional[str] = None

    @model_validator(mode="after")
    def _edges_in_range(self):
        n = len(self.projected)
        for c in self.crossings:
            if not (0 <= c.over_edge < n and 0 <= c.under_edge < n):
                raise ValueError(f"交叉点边序号越界（n = {n}）")
        return self


class PlaneExport(BaseModel):
    normal: Vector3
    offset: float


class SegmentCrossingExport(BaseModel):
    edges: List[int] = Field(..., min_length=2, max_length=2)
    point: List[float] = Field(..., min_length=2, max_length=2)


class ConfigurationExport(BaseModel):
    kind: Literal["configuration"] = "configuration"
    points: List[Vector3] = Field(..., min_length=6, max_length=6)
    plane: PlaneExport
    coords: List[List[float]] = Field(..., min_length=6, max_length=6)
    labels: Optional[List[str]] = None
    type: Optional[int] = None
    lengths: Optional[Dict[str, float]] = None
    fractions: Optional[Dict[str, float]] = None
    crossings: Optional[List[SegmentCrossingExport]] = None
    heights: Optional[List[float]] = None


# ==================== 读取 ====================

def _format_error(error: ValidationError, source: str) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(x) for x in item["loc"]) or "<根>"
        parts.append(f"{location}: {item['msg']}")
    return f"{source} 校验失败 - " + "; ".join(parts)


def validate(model: Type[Model], data: Any, source: str = "输入") -> Model:
    """用模型校验数据，失败时抛出 SchemaError（消息含出错位置）"""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise SchemaError(_format_error(e, source)) from e


def read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise SchemaError(f"{path} 不是合法 JSON（第 {e.lineno} 行第 {e.colno} 列）: {e.msg}") from e


def load_curve_file(path: Union[str, Path]) -> CurveFile:
    return validate(CurveFile, read_json(path), str(path))


def load_polygon_file(path: Union[str, Path]) -> PolygonFile:
    """读取多边形：.csv 为三列数值（可带表头），其余按 JSON 处理"""
    path = Path(path)
    if path.suffix.lower() == ".csv":
        try:
            df = pd.read_csv(path, header=None)
            if not all(pd.api.types.is_numeric_dtype(t) for t in df.dtypes):
                df = pd.read_csv(path)
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise SchemaError(f"{path} 无法解析为 CSV: {e}") from e
        if df.shape[1] != 3:
            raise SchemaError(f"{path} 应有 3 列坐标，实际 {df.shape[1]} 列")
        try:
            vertices = df.astype(float).values.tolist()
        except ValueError as e:
            raise SchemaError(f"{path} 含非数值坐标: {e}") from e
        return validate(PolygonFile, {"vertices": vertices}, str(path))

    data = read_json(path)
    if isinstance(data, list):
        data = {"vertices": data}
    return validate(PolygonFile, data, str(path))


def load_planar_file(path: Union[str, Path]) -> PlanarInputFile:
    return validate(PlanarInputFile, read_json(path), str(path))


def load_export_file(path: Union[str, Path]) -> Union[DiagramExport, ConfigurationExport]:
    """按 kind 字段选择导出模型"""
    data = read_json(path)
    kind = data.get("kind") if isinstance(data, dict) else None
    if kind == "configuration":
        return validate(ConfigurationExport, data, str(path))
    if kind == "diagram":
        return validate(DiagramExport, data, str(path))
    raise SchemaError(f"{path} 的 kind 字段必须是 'diagram' 或 'configuration'（收到 {kind!r}）")
