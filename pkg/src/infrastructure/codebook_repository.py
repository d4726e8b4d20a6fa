"""
Line-oriented text persistence for codebooks.

    #wsc-codebook v1 m=<m> n=<N> norm=<l1|l2> nonneg=<0|1> seed=<u64|none>
    m lines of N comma-separated reals in shortest round-trip form
"""

import logging
import os
import re
from typing import Dict

import numpy as np

from src.domain.errors import CodebookFormatError, ParameterError
from src.domain.models import Codebook, NormKind

logger = logging.getLogger(__name__)

MAGIC = "#wsc-codebook"
VERSION = "v1"
HEADER_FIELDS = ("m", "n", "norm", "nonneg", "seed")
_FIELD = re.compile(r"^(\w+)=(\S+)$")


def format_header(codebook: Codebook) -> str:
    seed = "none" if codebook.seed is None else str(codebook.seed)
    return (f"{MAGIC} {VERSION} m={codebook.m} n={codebook.n} norm={codebook.norm.value} "
            f"nonneg={int(codebook.nonneg)} seed={seed}")


def parse_header(line: str) -> Dict[str, str]:
    tokens = line.split()
    if len(tokens) < 2 or tokens[0] != MAGIC:
        raise CodebookFormatError(f"missing '{MAGIC}' header")
    if tokens[1] != VERSION:
        raise CodebookFormatError(f"unsupported codebook version '{tokens[1]}'")
    fields = {}
    for token in tokens[2:]:
        match = _FIELD.match(token)
        if not match:
            raise CodebookFormatError(f"malformed header field '{token}'")
        fields[match.group(1)] = match.group(2)
    missing = [name for name in HEADER_FIELDS if name not in fields]
    if missing:
        raise CodebookFormatError(f"header is missing field(s): {', '.join(missing)}")
    return fields


class CodebookRepository:
    """Reads and writes codebook v1 files."""

    def save(self, codebook: Codebook, path: str) -> None:
        """Write atomically via a temp file and rename."""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        lines = [format_header(codebook)]
        lines += [",".join(repr(float(x)) for x in row) for row in codebook.values]
        temp_file = path + ".tmp"
        try:
            with open(temp_file, "w", encoding="utf-8") as f:
                f.write("\n".join(lines) + "\n")
            os.replace(temp_file, path)
        except OSError as e:
            logger.error(f"Error writing codebook to {path}: {e}")
            if os.path.exists(temp_file):
                os.remove(temp_file)
            raise
        logger.info(f"Saved {codebook.m}x{codebook.n} codebook to {path}")

    def load(self, path: str) -> Codebook:
        try:
            with open(path, "r", encoding="utf-8") as f:
                lines = [line.strip() for line in f if line.strip()]
        except OSError as e:
            raise CodebookFormatError(f"cannot read codebook file {path}: {e}") from e
        if not lines:
            raise CodebookFormatError(f"codebook file {path} is empty")

        fields = parse_header(lines[0])
        try:
            m, n = int(fields["m"]), int(fields["n"])
            norm = NormKind(fields["norm"])
            seed = None if fields["seed"] == "none" else int(fields["seed"])
        except ValueError as e:
            raise CodebookFormatError(f"invalid header value: {e}") from e
        if fields["nonneg"] not in ("0", "1"):
            raise CodebookFormatError(f"nonneg must be 0 or 1 (got '{fields['nonneg']}')")

        rows = lines[1:]
        if len(rows) != m:
            raise CodebookFormatError(f"header declares m={m} rows but the file has {len(rows)}")
        try:
            values = np.array([[float(x) for x in row.split(",")] for row in rows], dtype=np.float64)
        except ValueError as e:
            raise CodebookFormatError(f"non-numeric codebook entry: {e}") from e
        if values.shape != (m, n):
            raise CodebookFormatError(f"header declares {m}x{n} but rows have shape {values.shape}")

        try:
            codebook = Codebook(values, norm, fields["nonneg"] == "1", "file", seed)
        except ParameterError as e:
            raise CodebookFormatError(f"codebook file {path} is invalid: {e}") from e
        logger.info(f"Loaded {m}x{n} {norm.value} codebook from {path}")
        return codebook
