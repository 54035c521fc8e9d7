# src/minctx/adapters/fs_reports.py
from __future__ import annotations

from ..core.ports import ReportWriterPort
from .fs_text import atomic_writer


class FilesystemReportWriter(ReportWriterPort):
    def write_text(self, path: str, text: str) -> None:
        with atomic_writer(path) as f:
            f.write(text)
