"""樣本池：限制並發數的 Monte-Carlo 樣本執行器。

每個噪聲樣本的模型評估彼此獨立，交給有上限的 worker 執行；
結果依輸入順序回傳，使平均值的累加順序固定、輸出可重現。
"""

from __future__ import annotations

import threading
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Generic, Iterable, TypeVar

S = TypeVar("S")
T = TypeVar("T")


class SamplePool(Generic[S, T]):
    """樣本池：管理樣本評估的並發執行。

    numpy 的 FFT 與矩陣乘法會釋放 GIL，執行緒即可平行化。

    屬性:
        _max_workers: 最大並發 worker 數
        _active_workers: 目前活躍的 worker 數
        _completed: 已完成的樣本數
        _lock: 保護共享狀態的鎖
    """

    def __init__(self, max_workers: int = 2) -> None:
        """初始化樣本池。

        Args:
            max_workers: 最大並發 worker 數（預設 2）

        Raises:
            ValueError: 如果 max_workers < 1
        """
        if max_workers < 1:
            raise ValueError("max_workers must be >= 1")
        self._max_workers = max_workers
        self._active_workers = 0  # 活躍 worker 數
        self._completed = 0  # 完成數
        self._lock = threading.Lock()  # 狀態鎖

    @property
    def max_workers(self) -> int:
        return self._max_workers

    @property
    def active_workers(self) -> int:
        return self._active_workers

    @property
    def completed(self) -> int:
        return self._completed

    def _run_one(self, work: Callable[[S], T], item: S) -> T:
        with self._lock:
            self._active_workers += 1
        try:
            return work(item)
        finally:
            with self._lock:
                self._active_workers -= 1
                self._completed += 1

    def map(self, work: Callable[[S], T], items: Iterable[S]) -> list[T]:
        """Apply ``work`` to every item; results keep the input order."""
        items = list(items)
        if self._max_workers == 1 or len(items) <= 1:
            return [self._run_one(work, item) for item in items]
        with ThreadPoolExecutor(max_workers=self._max_workers) as executor:
            return list(executor.map(lambda item: self._run_one(work, item), items))
