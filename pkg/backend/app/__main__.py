"""
locality-renorm - 應用程式啟動點

此檔案是當使用 `python -m backend.app` 執行時的入口點，直接交給 click 命令群組。

支持的執行方式：
  python -m backend.app basis --spec she.json
  locality-renorm model --spec she.json --nt 64 --nx 64
"""

from .cli.main import cli

if __name__ == "__main__":
    cli()  # 執行 CLI 命令解析器
