"""Small file helpers shared by the persistence layers."""

import os
import tempfile
from contextlib import contextmanager


class ParseError(ValueError):
    """An input file violates its documented format.

    The message always carries the offending path and line number so that
    command-line users can locate the problem directly.
    """

    def __init__(self, path, line_no, message):
        super().__init__(f"{path}:{line_no}: {message}")
        self.path = str(path)
        self.line_no = line_no


@contextmanager
def atomic_write(path):
    """Open a temp file next to ``path`` and rename it into place on success.

    A failure inside the block leaves no partial output behind, which makes
    every pipeline stage restartable.
    """
    path = os.fspath(path)
    parent = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(
        dir=parent, prefix=os.path.basename(path) + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            yield fh
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
