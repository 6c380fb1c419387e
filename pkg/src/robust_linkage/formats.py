"""
Text file formats.

Every file starts with provenance lines of the form ``# key=value`` followed
by one data header line and the data rows:

- similarity / dissimilarity: ``n=<int>`` then n comma-separated rows
- labeling: ``k=<int>`` then one 1-based label per line
- merge tree: ``n=<int>`` then ``step,node_id,child;child;...,threshold``
- point set: ``size=<int>`` then one 0-based id per line
- subset family: ``n=<int>`` then ``p:<id;id;...>`` per point
- attribute table: ``rows=<int>`` then comma-separated rows
- error table: comma-separated with a header row
"""

import json
import logging
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np
from pydantic import BaseModel, Field

from .config import get_config
from .dendrogram import Dendrogram
from .errors import ErrorFactory, LinkageError
from .evaluation import ErrorTable
from .models import AttributeTable, DissimilarityMatrix, Labeling, MergeEvent, SimilarityMatrix

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]
T = TypeVar("T")

# Lines of a data file: (1-based line number, text)
Lines = List[Tuple[int, str]]


class Provenance(BaseModel):
    """Where a file came from."""

    format_version: str = Field(default_factory=lambda: get_config().format_version)
    command: str = Field(default="", description="Command line that produced the file")
    params: Dict[str, Any] = Field(default_factory=dict, description="Parameters of the producing operation")
    seed: Optional[int] = Field(default=None, description="PRNG seed, when randomness was used")
    prng: str = Field(default="PCG64", description="PRNG algorithm")
    algorithm: Optional[str] = Field(default=None, description="Algorithm that built a merge tree")
    similarity_transform: Optional[str] = Field(default=None, description="How similarities were derived from other data")

    def to_lines(self) -> List[str]:
        """Render as comment lines, omitting unset fields."""
        lines = [f"# format_version={self.format_version}", f"# command={self.command}", f"# params={json.dumps(self.params, sort_keys=True)}"]
        if self.seed is not None:
            lines.append(f"# seed={self.seed}")
        lines.append(f"# prng={self.prng}")
        if self.algorithm is not None:
            lines.append(f"# algorithm={self.algorithm}")
        if self.similarity_transform is not None:
            lines.append(f"# similarity_transform={self.similarity_transform}")
        return lines


def _number(value: float) -> str:
    return f"{float(value):.{get_config().float_digits}g}"


def _write(path: PathLike, provenance: Optional[Provenance], header: str, rows: Sequence[str]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = (provenance or Provenance()).to_lines() + [header] + list(rows)
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")
    logger.debug(f"wrote {path} ({len(rows)} rows)")


def _read(path: PathLike) -> Tuple[Dict[str, str], Lines]:
    """Split a file into provenance entries and numbered data lines."""
    path = Path(path)
    if not path.is_file():
        raise ErrorFactory.file_not_found(str(path))
    provenance: Dict[str, str] = {}
    lines: Lines = []
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            text = raw.rstrip("\n").rstrip("\r")
            if text.startswith("#"):
                key, _, value = text[1:].strip().partition("=")
                provenance[key.strip()] = value
            elif text.strip():
                lines.append((number, text))
    return provenance, lines


def read_provenance(path: PathLike) -> Provenance:
    """Read the provenance lines of any file written by this package."""
    entries, _ = _read(path)
    params = json.loads(entries["params"]) if entries.get("params") else {}
    seed = int(entries["seed"]) if entries.get("seed") else None
    fields: Dict[str, Any] = {key: entries[key] for key in ("format_version", "command", "prng", "algorithm", "similarity_transform") if key in entries}
    return Provenance(params=params, seed=seed, **fields)


def _header(path: PathLike, lines: Lines, key: str) -> int:
    if not lines:
        raise ErrorFactory.parse_error(str(path), 1, 1, f"missing '{key}=<int>' header")
    number, text = lines[0]
    name, sep, value = text.partition("=")
    if name.strip() != key or not sep:
        raise ErrorFactory.parse_error(str(path), number, 1, f"expected '{key}=<int>' header")
    try:
        count = int(value)
    except ValueError:
        raise ErrorFactory.parse_error(str(path), number, len(name) + 2, f"'{value}' is not an integer")
    if count < 0:
        raise ErrorFactory.parse_error(str(path), number, len(name) + 2, f"{key} must be nonnegative")
    return count


def _parse(path: PathLike, number: int, column: int, text: str, convert: Callable[[str], T]) -> T:
    try:
        return convert(text.strip())
    except ValueError:
        raise ErrorFactory.parse_error(str(path), number, column, f"cannot parse '{text.strip()}'")


def _fields(text: str, separator: str = ",") -> List[Tuple[int, str]]:
    """Split a line into (1-based column, field) pairs."""
    result = []
    column = 1
    for field in text.split(separator):
        result.append((column, field))
        column += len(field) + len(separator)
    return result


def _expect_rows(path: PathLike, lines: Lines, count: int) -> Lines:
    body = lines[1:]
    if len(body) != count:
        at = body[count][0] if len(body) > count else (body[-1][0] if body else lines[0][0]) + 1
        raise ErrorFactory.parse_error(str(path), at, 1, f"expected {count} data rows, found {len(body)}")
    return body


def _read_matrix(path: PathLike) -> Tuple[int, np.ndarray]:
    _, lines = _read(path)
    n = _header(path, lines, "n")
    body = _expect_rows(path, lines, n)
    values = np.zeros((n, n), dtype=np.float64)
    for row, (number, text) in enumerate(body):
        fields = _fields(text)
        if len(fields) != values.shape[1]:
            raise ErrorFactory.parse_error(str(path), number, 1, f"expected {values.shape[1]} values, found {len(fields)}")
        for col, (column, field) in enumerate(fields):
            values[row, col] = _parse(path, number, column, field, float)
    return n, values


def write_similarity(path: PathLike, sim: SimilarityMatrix, provenance: Optional[Provenance] = None) -> None:
    """Write a similarity matrix with full float precision."""
    _write(path, provenance, f"n={sim.n}", [",".join(_number(v) for v in row) for row in sim.values])


def read_similarity(path: PathLike) -> SimilarityMatrix:
    """
    Read a similarity matrix.

    Raises:
        ParseError: On malformed content, with line and column
        AsymmetryError: With the first pair (i, j), i < j, whose entries differ
    """
    _, values = _read_matrix(path)
    return SimilarityMatrix(values=values)


def write_dissimilarity(path: PathLike, d: DissimilarityMatrix, provenance: Optional[Provenance] = None) -> None:
    """Write a dissimilarity matrix with full float precision."""
    _write(path, provenance, f"n={d.n}", [",".join(_number(v) for v in row) for row in d.values])


def read_dissimilarity(path: PathLike) -> DissimilarityMatrix:
    """Read a dissimilarity matrix."""
    _, values = _read_matrix(path)
    return DissimilarityMatrix(values=values)


def write_labeling(path: PathLike, labeling: Labeling, provenance: Optional[Provenance] = None) -> None:
    _write(path, provenance, f"k={labeling.k}", [str(int(label)) for label in labeling.labels])


def read_labeling(path: PathLike) -> Labeling:
    """Read a labeling; the row count is the number of points."""
    _, lines = _read(path)
    k = _header(path, lines, "k")
    labels = [_parse(path, number, 1, text, int) for number, text in lines[1:]]
    return Labeling(labels=np.array(labels, dtype=np.int64), k=k)


def _threshold(value: Union[int, float]) -> str:
    return str(value) if isinstance(value, int) else repr(float(value))


def write_tree(path: PathLike, tree: Dendrogram, provenance: Optional[Provenance] = None) -> None:
    """Write a merge tree, one merge per row in creation order."""
    provenance = (provenance or Provenance()).model_copy(update={"algorithm": tree.algorithm or None})
    rows = [f"{e.step},{e.node_id},{';'.join(str(c) for c in e.children)},{_threshold(e.threshold)}" for e in tree.merges]
    _write(path, provenance, f"n={tree.n}", rows)


def _int_or_float(text: str) -> Union[int, float]:
    try:
        return int(text)
    except ValueError:
        return float(text)


def read_tree(path: PathLike) -> Dendrogram:
    """
    Read a merge tree and audit it.

    Raises:
        ParseError: On malformed rows
        LinkageError: If the merges do not form a valid tree
    """
    entries, lines = _read(path)
    n = _header(path, lines, "n")
    merges: List[MergeEvent] = []
    for number, text in lines[1:]:
        fields = _fields(text)
        if len(fields) != 4:
            raise ErrorFactory.parse_error(str(path), number, 1, f"expected 4 fields, found {len(fields)}")
        (c1, step), (c2, node), (c3, children), (c4, threshold) = fields
        kids = [_parse(path, number, c3, child, int) for child in children.split(";")]
        try:
            event = MergeEvent(
                step=_parse(path, number, c1, step, int),
                node_id=_parse(path, number, c2, node, int),
                children=kids,
                threshold=_parse(path, number, c4, threshold, _int_or_float),
            )
        except ValueError as e:
            raise ErrorFactory.parse_error(str(path), number, c3, str(e).splitlines()[-1].strip())
        merges.append(event)
    if n < 1:
        raise ErrorFactory.parse_error(str(path), lines[0][0], 1, "a tree needs at least one leaf")
    try:
        return Dendrogram(n=n, merges=merges, algorithm=entries.get("algorithm", ""))
    except LinkageError as e:
        raise ErrorFactory.parse_error(str(path), lines[0][0], 1, e.message)


def write_point_set(path: PathLike, points: Sequence[int], provenance: Optional[Provenance] = None) -> None:
    ids = sorted(int(p) for p in points)
    _write(path, provenance, f"size={len(ids)}", [str(p) for p in ids])


def read_point_set(path: PathLike) -> List[int]:
    """Read a point set such as a bad set."""
    _, lines = _read(path)
    size = _header(path, lines, "size")
    body = _expect_rows(path, lines, size)
    return sorted(_parse(path, number, 1, text, int) for number, text in body)


def write_subsets(path: PathLike, n: int, subsets: Dict[int, Sequence[int]], provenance: Optional[Provenance] = None) -> None:
    """Write a subset family A_p, one line per point p."""
    rows = [f"{p}:{';'.join(str(int(q)) for q in subsets[p])}" for p in sorted(subsets)]
    _write(path, provenance, f"n={n}", rows)


def read_subsets(path: PathLike) -> Dict[int, List[int]]:
    """Read a subset family."""
    _, lines = _read(path)
    _header(path, lines, "n")
    result: Dict[int, List[int]] = {}
    for number, text in lines[1:]:
        point, sep, members = text.partition(":")
        if not sep:
            raise ErrorFactory.parse_error(str(path), number, 1, "expected 'p:<ids>'")
        column = len(point) + 2
        result[_parse(path, number, 1, point, int)] = [_parse(path, number, column + offset - 1, q, int) for offset, q in _fields(members, ";") if q.strip()]
    return result


def write_table(path: PathLike, table: AttributeTable, provenance: Optional[Provenance] = None) -> None:
    """Write an attribute table."""
    _write(path, provenance, f"rows={table.n}", [",".join(_number(v) for v in row) for row in table.values])


def read_table(path: PathLike) -> AttributeTable:
    """Read an attribute table."""
    _, lines = _read(path)
    rows = _header(path, lines, "rows")
    body = _expect_rows(path, lines, rows)
    values = []
    for number, text in body:
        values.append([_parse(path, number, column, field, float) for column, field in _fields(text)])
    if len({len(row) for row in values}) > 1:
        raise ErrorFactory.parse_error(str(path), body[0][0], 1, "rows have different lengths")
    return AttributeTable(values=np.array(values, dtype=np.float64))


def write_error_table(path: PathLike, table: ErrorTable, provenance: Optional[Provenance] = None) -> None:
    """Write an error table; the data header is the column row."""
    _write(path, provenance, ",".join(table.columns), [",".join(_number(v) for v in row) for row in table.rows])


def read_error_table(path: PathLike) -> ErrorTable:
    _, lines = _read(path)
    if not lines:
        raise ErrorFactory.parse_error(str(path), 1, 1, "missing column header")
    columns = [field.strip() for _, field in _fields(lines[0][1])]
    rows = []
    for number, text in lines[1:]:
        fields = _fields(text)
        if len(fields) != len(columns):
            raise ErrorFactory.parse_error(str(path), number, 1, f"expected {len(columns)} values, found {len(fields)}")
        rows.append([_parse(path, number, column, field, float) for column, field in fields])
    return ErrorTable(columns=columns, rows=rows)
