"""報告渲染器：把檢查結果轉成終端機與文字報告的輸出。

此模組負責在終端機中呈現：
- 規格診斷
- 斜率擬合與恆等式檢查的通過／失敗
- 失敗時的補救建議
"""

from __future__ import annotations

from typing import Any, Iterable, Mapping

import click

RULE = "=" * 80


def _mark(passed: bool) -> str:
    return click.style("PASS", fg="green") if passed else click.style("FAIL", fg="red")


def diagnostic_lines(diagnostics: Iterable[Mapping[str, Any]]) -> list[str]:
    lines = []
    for item in diagnostics:
        status = "ok" if item["passed"] else item.get("severity", "error")
        lines.append(f"[{status.upper()}] {item['check']}: {item['message']}")
    return lines


def fit_lines(fits: Iterable[Mapping[str, Any]]) -> list[str]:
    return [
        f"{'PASS' if fit['passed'] else 'FAIL'}  {fit['label']}: slope {fit['slope']:.3f} "
        f"(expected {fit['expected']:.3f} ± {fit['tolerance']:.2f})"
        for fit in fits
    ]


def check_lines(checks: Iterable[Mapping[str, Any]]) -> list[str]:
    lines = []
    for check in checks:
        line = f"{'PASS' if check['passed'] else 'FAIL'}  {check['name']}: {check['maxError']:.3e}"
        if check.get("witness"):
            line += f" ({check['witness']})"
        lines.append(line)
    return lines


def report_lines(report: Mapping[str, Any]) -> list[str]:
    """Plain text form of a kernel or model report, used for the metadata file."""
    lines = [RULE]
    if "diagnostics" in report:
        lines += diagnostic_lines(report["diagnostics"])
    lines += fit_lines(report.get("fits", []))
    lines += check_lines(report.get("checks", []))
    if "passed" in report:
        lines.append(f"Overall: {'PASS' if report['passed'] else 'FAIL'}")
    lines.append(RULE)
    return lines


class ReportRenderer:
    """在控制台中顯示檢查摘要。

    屬性:
        _verbose: 是否逐項列出通過的檢查
    """

    def __init__(self, verbose: bool = False) -> None:
        self._verbose = verbose

    def render(self, report: Mapping[str, Any]) -> None:
        fits = list(report.get("fits", []))
        checks = list(report.get("checks", []))
        for fit, line in zip(fits, fit_lines(fits)):
            if self._verbose or not fit["passed"]:
                click.echo(line)
        for check, line in zip(checks, check_lines(checks)):
            if self._verbose or not check["passed"]:
                click.echo(line)
        passed = sum(1 for item in fits + checks if item["passed"])
        click.echo(f"{_mark(bool(report.get('passed', passed == len(fits) + len(checks))))} {passed}/{len(fits) + len(checks)} checks passed")

    def render_diagnostics(self, diagnostics: Iterable[Mapping[str, Any]]) -> None:
        diagnostics = list(diagnostics)
        for item, line in zip(diagnostics, diagnostic_lines(diagnostics)):
            color = None if item["passed"] else ("yellow" if item.get("severity") == "warning" else "red")
            click.echo(click.style(line, fg=color) if color else line)

    def render_failure(self, message: str, action: str) -> None:
        click.echo(click.style(f"Error: {message}", fg="red"), err=True)
        click.echo(f"  Remediation: {action}", err=True)
