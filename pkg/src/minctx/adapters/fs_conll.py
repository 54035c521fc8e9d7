# src/minctx/adapters/fs_conll.py
from __future__ import annotations

import os
from typing import List

from ..core.coref import CorefDocument, parse_coref_documents
from ..core.ports import CorefSourcePort
from .fs_text import iter_lines

SUFFIXES = ("_conll", ".conll", ".gold_conll", ".auto_conll")


def list_conll_files(path: str) -> List[str]:
    """A single file, or every *conll file below a directory in sorted order."""
    if os.path.isfile(path):
        return [path]
    found = []
    for root, dirs, files in os.walk(path):
        dirs.sort()
        for name in sorted(files):
            if name.endswith(SUFFIXES):
                found.append(os.path.join(root, name))
    return found


class ConllCorefSource(CorefSourcePort):
    def documents(self, path: str, word_column: int, coref_column: int) -> List[CorefDocument]:
        docs: List[CorefDocument] = []
        for file_path in list_conll_files(path):
            lines = (line for _, line in iter_lines(file_path))
            docs.extend(parse_coref_documents(lines, word_column, coref_column, path=file_path))
        return docs
