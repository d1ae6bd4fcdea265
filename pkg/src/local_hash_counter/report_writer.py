"""Writers for JSON-lines and plain result records."""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Any, Final, Iterable, Mapping, TextIO

from local_hash_counter.errors import ConfigurationError

_LOG = logging.getLogger(__name__)

FORMAT_JSON: Final[str] = "json"
FORMAT_PLAIN: Final[str] = "plain"


class ReportWriter:
    """Write result records one per line to a file or a text stream.

    :param fmt: ``"json"`` for JSON lines with sorted keys, ``"plain"`` for
        ``key=value`` pairs.
    :type fmt: str
    """

    FORMATS: Final[tuple[str, ...]] = (FORMAT_JSON, FORMAT_PLAIN)

    def __init__(self, fmt: str = FORMAT_JSON) -> None:
        if fmt not in self.FORMATS:
            raise ConfigurationError(
                f"Unknown output format {fmt!r}; expected one of {self.FORMATS}"
            )
        self.fmt = fmt

    def render(self, record: Mapping[str, Any]) -> str:
        """Render one record as a single line without the newline.

        :param record: JSON-compatible mapping.
        :type record: Mapping[str, Any]
        :return: Rendered line.
        :rtype: str
        """
        if self.fmt == FORMAT_JSON:
            return json.dumps(record, sort_keys=True)
        return " ".join(
            f"{key}={json.dumps(value, sort_keys=True)}" for key, value in sorted(record.items())
        )

    def write(
        self,
        records: Iterable[Mapping[str, Any]],
        output_file: Path | None = None,
        stream: TextIO | None = None,
    ) -> int:
        """Write records as they arrive.

        Records go to ``output_file`` when given, otherwise to ``stream``
        (default standard output). Each line is flushed so long sweeps stream.

        :param records: Records to write.
        :type records: Iterable[Mapping[str, Any]]
        :param output_file: Optional destination file; parent directories are
            created.
        :type output_file: Path | None
        :param stream: Fallback text stream.
        :type stream: TextIO | None
        :return: Number of records written.
        :rtype: int
        :raises ValueError: If ``output_file`` is not a usable file path.
        :raises OSError: If the file cannot be written.
        """
        if output_file is None:
            return self._write_lines(records, stream if stream is not None else sys.stdout)

        self._validate_output_path(output_file)
        self._ensure_output_directory(output_file)
        with output_file.open(mode="w", encoding="utf-8", newline="\n") as handle:
            count = self._write_lines(records, handle)
        _LOG.info("Wrote %d record(s) to %s", count, output_file)
        return count

    def write_bytes(
        self,
        content: bytes,
        output_file: Path | None = None,
        stream: TextIO | None = None,
    ) -> None:
        """Write pre-rendered content such as DIMACS text."""
        if output_file is None:
            target = stream if stream is not None else sys.stdout
            target.write(content.decode("utf-8"))
            target.flush()
            return
        self._validate_output_path(output_file)
        self._ensure_output_directory(output_file)
        output_file.write_bytes(content)
        _LOG.info("Wrote %d byte(s) to %s", len(content), output_file)

    def _write_lines(self, records: Iterable[Mapping[str, Any]], handle: TextIO) -> int:
        count = 0
        for count, record in enumerate(records, start=1):
            handle.write(self.render(record) + "\n")
            handle.flush()
        _LOG.debug("Rendered %d %s record(s)", count, self.fmt)
        return count

    @staticmethod
    def _validate_output_path(output_file: Path) -> None:
        if not str(output_file).strip() or output_file.name in {"", ".", ".."}:
            raise ValueError(f"Invalid output file path: {output_file}")
        if output_file.exists() and output_file.is_dir():
            raise IsADirectoryError(f"Output path is a directory: {output_file}")

    @staticmethod
    def _ensure_output_directory(output_file: Path) -> None:
        output_file.parent.mkdir(parents=True, exist_ok=True)
        _LOG.debug("Ensured output directory exists: %s", output_file.parent)
