"""日誌配置：設定 root logger 的檔案與控制台輸出。"""

from __future__ import annotations

import logging
import os
from logging.handlers import RotatingFileHandler
from pathlib import Path

LOG_FILE = "renorm.log"
TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
JSON_FORMAT = '{"timestamp": "%(asctime)s", "level": "%(levelname)s", "name": "%(name)s", "message": "%(message)s"}'

_HANDLER_TAG = "_renorm_handler"


def build_formatter(log_format: str) -> logging.Formatter:
    return logging.Formatter(JSON_FORMAT if log_format == "json" else TEXT_FORMAT)


def setup_logging(level: str | None = None, log_format: str | None = None, log_dir: Path | str | None = None) -> logging.Logger:
    """設定日誌系統。

    - 文件日誌：寫入 renorm.log，支援自動輪替
    - 控制台日誌：輸出到 stderr
    - 支援 JSON 和文字格式

    支援的環境變數（參數優先）：
    - RS_LOG_DIR: 日誌目錄（預設 "logs"）
    - RS_LOG_LEVEL: 日誌級別 (DEBUG/INFO/WARNING/ERROR)
    - RS_LOG_FORMAT: 日誌格式 (text/json)
    - RS_LOG_MAX_BYTES: 單個日誌檔最大大小
    - RS_LOG_BACKUP_COUNT: 保留的日誌檔數量

    重複呼叫時會替換先前安裝的 handler，不會重複輸出。
    """
    level_name = (level or os.getenv("RS_LOG_LEVEL", "INFO")).upper()
    log_format = log_format or os.getenv("RS_LOG_FORMAT", "text")  # text 或 json
    logs_dir = Path(log_dir or os.getenv("RS_LOG_DIR", "logs"))
    max_bytes = int(os.getenv("RS_LOG_MAX_BYTES", "10485760"))  # 10MB
    backup_count = int(os.getenv("RS_LOG_BACKUP_COUNT", "5"))  # 保留 5 個舊檔
    numeric_level = getattr(logging, level_name, logging.INFO)

    logs_dir.mkdir(parents=True, exist_ok=True)
    formatter = build_formatter(log_format)

    file_handler = RotatingFileHandler(logs_dir / LOG_FILE, maxBytes=max_bytes, backupCount=backup_count)
    console_handler = logging.StreamHandler()
    root_logger = logging.getLogger()
    for handler in list(root_logger.handlers):
        if getattr(handler, _HANDLER_TAG, False):
            root_logger.removeHandler(handler)
            handler.close()
    for handler in (file_handler, console_handler):
        handler.setFormatter(formatter)
        handler.setLevel(numeric_level)
        setattr(handler, _HANDLER_TAG, True)
        root_logger.addHandler(handler)
    root_logger.setLevel(numeric_level)

    root_logger.debug("日誌配置完成: 目錄=%s, 級別=%s, 格式=%s", logs_dir, level_name, log_format)
    return root_logger
