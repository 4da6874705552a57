"""Parser for grid-sampled path CSV files.

The first line is ``t,<t_1>,...,<t_p>`` giving the grid; every further line is
``path_<k>,<x_k(t_1)>,...,<x_k(t_p)>``.
"""

import csv
import io
import logging
from pathlib import Path
from typing import Iterable, List, Sequence, TextIO, Union

import numpy as np

from .errors import DataError, GridMismatchError
from .models import FunctionalDataset, Grid

logger = logging.getLogger(__name__)

GRID_LABEL = "t"
PATH_PREFIX = "path_"
FLOAT_FORMAT = ".17g"


class DatasetParser:
    """Reader and writer of the path CSV format."""

    @staticmethod
    def parse_values(fields: Sequence[str], line_no: int) -> np.ndarray:
        """Convert the numeric fields of one line.

        Raises:
            DataError: If a field is not a finite number
        """
        try:
            values = np.array([float(field) for field in fields], dtype=float)
        except ValueError as e:
            raise DataError(f"line {line_no}: {e}") from e
        if not np.all(np.isfinite(values)):
            raise DataError(f"line {line_no}: non-finite value")
        return values

    @classmethod
    def parse_header(cls, row: Sequence[str]) -> Grid:
        """Grid of the header line ``t,<t_1>,...``."""
        if not row or row[0].strip() != GRID_LABEL:
            raise DataError(f"header must start with {GRID_LABEL!r}")
        return Grid.from_points(cls.parse_values(row[1:], 1))

    @classmethod
    def parse_rows(cls, rows: Iterable[Sequence[str]]) -> FunctionalDataset:
        """Dataset from already split CSV rows, header first."""
        iterator = iter(rows)
        try:
            header = next(iterator)
        except StopIteration:
            raise DataError("empty dataset file") from None
        grid = cls.parse_header(header)

        paths: List[np.ndarray] = []
        for line_no, row in enumerate(iterator, start=2):
            if not row:
                continue
            if not row[0].startswith(PATH_PREFIX):
                logger.warning(f"Line {line_no} has unexpected label {row[0]!r}")
            values = cls.parse_values(row[1:], line_no)
            if values.size != grid.size:
                raise GridMismatchError(
                    f"line {line_no} has {values.size} values, grid has {grid.size} points"
                )
            paths.append(values)

        if not paths:
            raise DataError("dataset file has no sample paths")
        logger.debug(f"Parsed {len(paths)} paths on a {grid.size}-point grid")
        return FunctionalDataset(np.vstack(paths), grid)

    @classmethod
    def parse_stream(cls, stream: TextIO) -> FunctionalDataset:
        try:
            return cls.parse_rows(csv.reader(stream))
        except csv.Error as e:
            raise DataError(f"malformed CSV: {e}") from e

    @classmethod
    def parse_text(cls, text: str) -> FunctionalDataset:
        return cls.parse_stream(io.StringIO(text))

    @classmethod
    def read(cls, path: Union[str, Path]) -> FunctionalDataset:
        """Read a dataset file; OSError propagates to the caller."""
        with open(path, newline="", encoding="utf-8") as handle:
            try:
                return cls.parse_stream(handle)
            except UnicodeDecodeError as e:
                raise DataError(f"{path} is not valid UTF-8: {e}") from e

    @staticmethod
    def format_rows(ds: FunctionalDataset) -> List[List[str]]:
        header = [GRID_LABEL] + [format(t, FLOAT_FORMAT) for t in ds.grid.points]
        rows = [header]
        for k, path in enumerate(ds.values, start=1):
            rows.append([f"{PATH_PREFIX}{k}"] + [format(x, FLOAT_FORMAT) for x in path])
        return rows

    @classmethod
    def write(cls, ds: FunctionalDataset, path: Union[str, Path]) -> None:
        """Write UTF-8 CSV with LF line endings and full double precision."""
        with open(path, "w", newline="", encoding="utf-8") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerows(cls.format_rows(ds))
