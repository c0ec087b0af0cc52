"""Validated options of one CLI run."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .errors import SpecError

OutputFormat = Literal["json", "latex", "csv"]


def _power_of_two(value: int) -> int:
    if value < 4 or value & (value - 1):
        raise ValueError(f"{value} is not a power of two ≥ 4")
    return value


class RunConfig(BaseModel):
    """Everything a subcommand needs besides the spec itself.

    屬性:
        command: 子命令名稱
        spec_path: 方程規格檔
        out_dir: 輸出根目錄
        nt / nx: 時間與空間格點數（2 的冪）
        n_terms: Volterra 級數項數
        tolerance: 斜率擬合容許誤差
        seed: 隨機噪聲種子
        noise: 噪聲來源（random、file:…、expr:…）
        character: 特徵 JSON 檔
        output_format: 報告格式
        samples: BPHZ 樣本數
        sort: 核對應的方程分量
    """

    model_config = ConfigDict(extra="forbid", frozen=True)

    command: str
    spec_path: Path
    out_dir: Path = Path("output")
    nt: int = 64  # 時間格點
    nx: int = 64  # 空間格點
    n_terms: int = Field(default=1, ge=0)  # Volterra 項數
    tolerance: float = Field(default=0.1, gt=0)  # 容許誤差
    seed: int = Field(default=0, ge=0)  # 種子
    noise: str = "random"  # 噪聲來源
    character: Path | None = None  # 特徵檔
    output_format: OutputFormat = "json"  # 報告格式
    samples: int = Field(default=1, ge=1)  # 樣本數
    sort: int = Field(default=1, ge=1)  # 分量
    horizon: float = Field(default=1.0, gt=0)  # 時間週期

    @field_validator("nt", "nx")
    @classmethod
    def _resolution(cls, value: int) -> int:
        return _power_of_two(value)

    @field_validator("spec_path", "character")
    @classmethod
    def _existing(cls, value: Path | None) -> Path | None:
        if value is not None and not Path(value).is_file():
            raise ValueError(f"file not found: {value}")
        return value

    @property
    def run_id(self) -> str:
        return f"{self.command}-{self.spec_path.stem}-{self.nt}x{self.nx}-s{self.seed}"

    @classmethod
    def build(cls, **options: Any) -> RunConfig:
        try:
            return cls.model_validate(options)
        except ValidationError as exc:
            raise SpecError(f"invalid run options: {exc}") from exc
