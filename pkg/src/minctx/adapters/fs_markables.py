# src/minctx/adapters/fs_markables.py
from __future__ import annotations

from typing import List, Sequence

from ..core.coref import MarkableExample
from ..core.ports import MarkableRepoPort
from ..core.value_object import ConfigError, FormatError, AnimacyLabel
from .fs_text import atomic_writer, iter_lines


class TsvMarkableRepo(MarkableRepoPort):
    """
    One example per line, no header:
        label  left_token  right_token  encoded_mc  surface
    """

    def write(self, path: str, examples: Sequence[MarkableExample]) -> int:
        with atomic_writer(path) as f:
            for ex in examples:
                f.write("\t".join([ex.label.value, ex.left, ex.right, ex.encoded_mc, ex.surface]) + "\n")
        return len(examples)

    def read(self, path: str) -> List[MarkableExample]:
        out: List[MarkableExample] = []
        for lineno, line in iter_lines(path):
            line = line.rstrip("\n")
            if not line:
                continue
            cols = line.split("\t")
            if len(cols) != 5:
                raise FormatError(f"expected 5 tab-separated columns, got {len(cols)}", line=lineno, path=path)
            try:
                label = AnimacyLabel.from_spec(cols[0])
            except ConfigError as e:
                raise FormatError(str(e), line=lineno, path=path) from e
            ex = MarkableExample(label=label, left=cols[1], right=cols[2], surface=cols[4])
            if ex.encoded_mc != cols[3]:
                raise FormatError(
                    f"encoded MC {cols[3]!r} does not match left/right ({ex.encoded_mc!r})",
                    line=lineno, path=path,
                )
            out.append(ex)
        return out
