"""執行設定加載器：從環境變數加載重整化工具的設定。

所有配置均從 RS_ 前綴的環境變數讀取，並提供合理的預設值。
支援快取，同一進程中只讀取一次。
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path


@dataclass(frozen=True, slots=True)
class RenormSettings:
    """執行設定：不可變的配置物件。

    屬性:
        output_dir: 執行輸出的根目錄
        max_workers: Monte-Carlo 樣本的最大並發 worker 數
        grid_nt: 時間方向預設格點數
        grid_nx: 空間方向預設格點數
        fourier_modes: 四次核的 Fourier 模數
        slope_tolerance: 斜率擬合容許誤差
        samples: BPHZ 特徵的噪聲樣本數
        seed: 隨機噪聲的種子
    """

    output_dir: Path  # 輸出目錄
    max_workers: int  # 最大 worker 數
    grid_nt: int  # 時間格點
    grid_nx: int  # 空間格點
    fourier_modes: int  # Fourier 模數
    slope_tolerance: Fraction  # 斜率容許誤差
    samples: int  # 樣本數
    seed: int  # 種子


def _read_int(name: str, default: int, minimum: int = 1) -> int:
    """讀取整數環境變數：從環境變數讀取整數值並驗證。

    Args:
        name: 環境變數名稱
        default: 預設值（如果環境變數未設定）
        minimum: 最小允許值（預設 1）

    Returns:
        解析後的整數值

    Raises:
        ValueError: 如果值無法解析為整數或小於最小值
    """
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"{name} must be an integer") from exc
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}")
    return value


def _read_power_of_two(name: str, default: int) -> int:
    value = _read_int(name, default, minimum=4)
    if value & (value - 1):
        raise ValueError(f"{name} must be a power of two")
    return value


def _read_fraction(name: str, default: Fraction) -> Fraction:
    """讀取有理數環境變數，例如 "1/10" 或 "0.05"；必須為正。"""
    raw = os.environ.get(name)
    if raw is None:
        return default
    try:
        value = Fraction(raw.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"{name} must be a rational number") from exc
    if value <= 0:
        raise ValueError(f"{name} must be positive")
    return value


@lru_cache(maxsize=1)
def load_settings() -> RenormSettings:
    """加載設定：從環境變數加載所有執行設定。

    支援的環境變數：
    - RS_OUTPUT_DIR: 輸出目錄（預設 "output"）
    - RS_MAX_WORKERS: 最大 worker 數（預設 2）
    - RS_GRID_NT / RS_GRID_NX: 格點數（預設 64，須為 2 的冪）
    - RS_FOURIER_MODES: Fourier 模數（預設 64）
    - RS_SLOPE_TOLERANCE: 斜率容許誤差（預設 1/10）
    - RS_SAMPLES: BPHZ 噪聲樣本數（預設 1）
    - RS_SEED: 隨機種子（預設 0）

    Returns:
        RenormSettings 實例
    """
    output_dir = Path(os.environ.get("RS_OUTPUT_DIR", "output")).expanduser().resolve()
    output_dir.mkdir(parents=True, exist_ok=True)  # 確保目錄存在
    return RenormSettings(
        output_dir=output_dir,
        max_workers=_read_int("RS_MAX_WORKERS", default=2, minimum=1),
        grid_nt=_read_power_of_two("RS_GRID_NT", 64),
        grid_nx=_read_power_of_two("RS_GRID_NX", 64),
        fourier_modes=_read_int("RS_FOURIER_MODES", default=64, minimum=4),
        slope_tolerance=_read_fraction("RS_SLOPE_TOLERANCE", Fraction(1, 10)),
        samples=_read_int("RS_SAMPLES", default=1, minimum=1),
        seed=_read_int("RS_SEED", default=0, minimum=0),
    )


def reset_settings_cache() -> None:
    """重設設定快取：清除 load_settings 的快取（主要用於測試）。"""
    load_settings.cache_clear()
