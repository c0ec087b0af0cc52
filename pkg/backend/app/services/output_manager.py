"""輸出管理器：管理 output/{runId} 下的產出檔案目錄和元資料。

此服務負責：
1. 為每次執行建立獨立的目錄結構
2. 寫入 JSON 元資料、文字報告與 CSV 核資料
3. 以二進位格點格式讀寫 GridFunction
"""

from __future__ import annotations

import csv
import json
import shutil
import struct
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np

from ..models.errors import SpecError

HEADER_PREFIX = struct.Struct("<I")  # 4 位元組小端序的標頭長度
GRID_DTYPE = "<f8"
KERNEL_COLUMNS = ("t", "x0", "x1", "x0p", "x1p", "value")


class OutputManager:
    """輸出管理器：統一管理執行的輸出目錄結構。

    每次執行會建立以下目錄結構：
    output/
      {run_id}/
        artifacts/    # 核與模型的資料檔
        tmp/          # 暫存檔案
        metadata/     # 報告與清單

    屬性:
        _root: 輸出檔案的根目錄
    """

    def __init__(self, root_dir: Path) -> None:
        """初始化輸出管理器。

        Args:
            root_dir: 輸出檔案的根目錄路徑
        """
        self._root = Path(root_dir)
        self._root.mkdir(parents=True, exist_ok=True)  # 確保根目錄存在

    @property
    def root(self) -> Path:
        return self._root

    def run_root(self, run_id: str) -> Path:
        return self._root / run_id

    def prepare_run(self, run_id: str) -> Path:
        """為執行準備 artifacts、tmp、metadata 三個子目錄。

        Args:
            run_id: 執行 ID

        Returns:
            執行根目錄的 Path 物件
        """
        run_root = self.run_root(run_id)
        for name in ("artifacts", "tmp", "metadata"):
            (run_root / name).mkdir(parents=True, exist_ok=True)
        return run_root

    def artifact_path(self, run_id: str, filename: str) -> Path:
        return (self.run_root(run_id) / "artifacts" / filename).resolve()

    def temp_path(self, run_id: str, filename: str) -> Path:
        return (self.run_root(run_id) / "tmp" / filename).resolve()

    def metadata_path(self, run_id: str, filename: str) -> Path:
        return (self.run_root(run_id) / "metadata" / filename).resolve()

    def write_metadata(self, run_id: str, filename: str, payload: Any) -> Path:
        path = self.metadata_path(run_id, filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            json.dump(payload, handle, ensure_ascii=False, indent=2)
        return path

    def write_report(self, run_id: str, filename: str, lines: Iterable[str]) -> Path:
        path = self.metadata_path(run_id, filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8") as handle:
            handle.write("\n".join(lines))
        return path

    def write_csv(self, run_id: str, filename: str, rows: Iterable[Sequence[Any]], header: Sequence[str] = KERNEL_COLUMNS) -> Path:
        """寫入 CSV；核資料的欄位為 (t, x0, x1, x0p, x1p, value)。"""
        path = self.artifact_path(run_id, filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            writer.writerows(rows)
        return path

    def write_grid(self, run_id: str, filename: str, values: np.ndarray, header: dict[str, Any]) -> Path:
        """寫入二進位格點檔：4 位元組標頭長度、JSON 標頭、float64 小端序資料。"""
        values = np.ascontiguousarray(values, dtype=GRID_DTYPE)
        payload = dict(header)
        payload.update({"dtype": "float64", "shape": list(values.shape)})
        encoded = json.dumps(payload, ensure_ascii=False, sort_keys=True).encode("utf-8")
        path = self.artifact_path(run_id, filename)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("wb") as handle:
            handle.write(HEADER_PREFIX.pack(len(encoded)))
            handle.write(encoded)
            handle.write(values.tobytes())
        return path

    def cleanup_run(self, run_id: str) -> None:
        run_root = self.run_root(run_id)
        if run_root.exists():
            shutil.rmtree(run_root, ignore_errors=True)

    def list_runs(self) -> list[Path]:
        return sorted([child for child in self._root.iterdir() if child.is_dir()])

    def latest_run(self) -> Optional[Path]:
        runs = self.list_runs()
        return max(runs, key=lambda path: path.stat().st_mtime) if runs else None


def read_grid(path: Path | str) -> tuple[dict[str, Any], np.ndarray]:
    """讀取 write_grid 產生的檔案，回傳 (標頭, 陣列)。"""
    data = Path(path).read_bytes()
    if len(data) < HEADER_PREFIX.size:
        raise SpecError(f"{path} is too short for a grid file")
    (length,) = HEADER_PREFIX.unpack_from(data)
    start = HEADER_PREFIX.size
    try:
        header = json.loads(data[start : start + length].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SpecError(f"{path} has a malformed grid header") from exc
    shape = tuple(header.get("shape", ()))
    values = np.frombuffer(data[start + length :], dtype=GRID_DTYPE)
    if values.size != int(np.prod(shape)):
        raise SpecError(f"{path}: {values.size} values do not fill shape {shape}")
    return header, values.reshape(shape).astype(float)
