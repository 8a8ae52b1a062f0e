"""Reading and writing subjective-test data, plus the bundled reference tables.

Two delimited text layouts are understood (see ``docs/formats.md``):

* votes files with columns ``file_id, subject_id, vote``
* MOS files with columns ``file_id, mos, n_votes`` and optionally one of
  ``vote_var`` or ``vote_std``

Headers are required and matched case-insensitively; ``#`` lines are comments.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import (
    DuplicateVoteError,
    EmptyFileError,
    OffScaleVoteError,
    OutOfRangeError,
    ParseError,
)
from .estimate import FileRecord, MosDataset, SampleStats, TestSummary
from .scale import MOS_SCALE, RatingScale

VOTES_COLUMNS = ("file_id", "subject_id", "vote")
MOS_COLUMNS = ("file_id", "mos", "n_votes")

_NUMBER = re.compile(r"^[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^\+?\d+$")


def _number(text: str, line: int, column: str) -> float:
    text = text.strip()
    if not _NUMBER.match(text):
        raise ParseError(f"{column}: {text!r} is not a number (use '.' as decimal point)", line)
    return float(text)


def _read_rows(path) -> tuple[list[str], list[tuple[int, dict[str, str]]]]:
    """Header names (lower-cased) and ``(line_number, row)`` pairs."""
    raw = Path(path).read_bytes().decode("utf-8-sig")
    lines = raw.splitlines()
    numbered = [(i + 1, ln) for i, ln in enumerate(lines)
                if ln.strip() and not ln.lstrip().startswith("#")]
    if not numbered:
        raise EmptyFileError(f"{path}: no header row")
    header_line, header_text = numbered[0]
    delimiter = next((d for d in (",", "\t", ";") if d in header_text), ",")
    reader = csv.reader(io.StringIO(header_text), delimiter=delimiter)
    header = [h.strip().lower() for h in next(reader)]
    if len(set(header)) != len(header):
        raise ParseError("duplicate column names", header_line)
    rows = []
    for lineno, text in numbered[1:]:
        cells = next(csv.reader(io.StringIO(text), delimiter=delimiter))
        if len(cells) != len(header):
            raise ParseError(f"expected {len(header)} fields, found {len(cells)}", lineno)
        rows.append((lineno, dict(zip(header, (c.strip() for c in cells)))))
    if not rows:
        raise EmptyFileError(f"{path}: no data rows")
    return header, rows


def _require(header: list[str], columns, path) -> None:
    missing = [c for c in columns if c not in header]
    if missing:
        raise ParseError(f"{path}: missing column(s) {', '.join(missing)}", 1)


def load_votes(path, scale: RatingScale = MOS_SCALE, convention: str = "unbiased",
               name: str | None = None) -> MosDataset:
    """Raw per-subject votes -> dataset with per-file MOS and vote variance."""
    header, rows = _read_rows(path)
    _require(header, VOTES_COLUMNS, path)
    votes: dict[str, list[float]] = {}
    seen: set[tuple[str, str]] = set()
    for lineno, row in rows:
        fid, sid = row["file_id"], row["subject_id"]
        if not fid or not sid:
            raise ParseError("empty file_id or subject_id", lineno)
        vote = _number(row["vote"], lineno, "vote")
        try:
            k = scale.level_index(vote)
        except OutOfRangeError:
            raise OffScaleVoteError(f"vote {vote:g} is not a level of the scale", lineno) from None
        if (fid, sid) in seen:
            raise DuplicateVoteError(f"subject {sid!r} already voted on {fid!r}", lineno)
        seen.add((fid, sid))
        votes.setdefault(fid, []).append(scale.level(k))
    files = [FileRecord.from_votes(fid, v, convention) for fid, v in votes.items()]
    return MosDataset(scale, tuple(files), name or Path(path).stem)


def load_mos(path, scale: RatingScale = MOS_SCALE, name: str | None = None) -> MosDataset:
    """Per-file MOS (and optional variance or standard deviation) -> dataset."""
    header, rows = _read_rows(path)
    _require(header, MOS_COLUMNS, path)
    files = []
    for lineno, row in rows:
        fid = row["file_id"]
        if not fid:
            raise ParseError("empty file_id", lineno)
        mos = _number(row["mos"], lineno, "mos")
        if not scale.contains(mos):
            raise OutOfRangeError(f"line {lineno}: MOS {mos:g} outside [{scale.s_L:g}, {scale.s_H:g}]")
        n_text = row["n_votes"]
        if not _INTEGER.match(n_text) or int(n_text) < 1:
            raise ParseError(f"n_votes: {n_text!r} is not a positive integer", lineno)
        var_text = row.get("vote_var", "")
        std_text = row.get("vote_std", "")
        if var_text and std_text:
            raise ParseError("give vote_var or vote_std, not both", lineno)
        variance = None
        if var_text:
            variance = _number(var_text, lineno, "vote_var")
        elif std_text:
            std = _number(std_text, lineno, "vote_std")
            if std < 0:
                raise ParseError("negative vote_std", lineno)
            variance = std * std
        if variance is not None and variance < 0:
            raise ParseError("negative vote_var", lineno)
        n_votes = int(n_text)
        if n_votes == 1:
            variance = None
        files.append(FileRecord(fid, mos, n_votes, variance))
    return MosDataset(scale, tuple(files), name or Path(path).stem)


def load_dataset(path, scale: RatingScale = MOS_SCALE, convention: str = "unbiased") -> MosDataset:
    """Load either layout, chosen from the header."""
    header, _ = _read_rows(path)
    if all(c in header for c in VOTES_COLUMNS):
        return load_votes(path, scale, convention)
    if all(c in header for c in MOS_COLUMNS):
        return load_mos(path, scale)
    raise ParseError(f"{path}: header matches neither votes nor MOS layout", 1)


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def write_votes(ds: MosDataset, path) -> None:
    """Write raw votes; subject ids are positional (``s1``, ``s2``, ...)."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(VOTES_COLUMNS)
        for rec in ds.files:
            if rec.raw_votes is None:
                raise ValueError(f"{rec.file_id}: no raw votes to write")
            for j, v in enumerate(rec.raw_votes, start=1):
                w.writerow((rec.file_id, f"s{j}", _fmt(v)))


def write_mos(ds: MosDataset, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(MOS_COLUMNS + ("vote_var",))
        for rec in ds.files:
            var = "" if rec.vote_variance is None else _fmt(rec.vote_variance)
            w.writerow((rec.file_id, _fmt(rec.mos), rec.n_votes, var))


# bundled reference tables


@dataclass(frozen=True)
class Table1Row:
    name: str
    n_v: float
    mu_x: float
    var_x: float
    var_v: float

    def summary(self) -> TestSummary:
        # n_f is not published; every test has at least 200 files
        return TestSummary(self.name, MOS_SCALE,
                           SampleStats(self.mu_x, self.var_x, 200, self.n_v), self.var_v)


@dataclass(frozen=True)
class Table2Row:
    name: str
    mu_x: float
    var_x: float
    n_v: float
    scale: RatingScale
    scale_inferred: bool
    rmse_binovotes: float
    rmse_fixed: float | None
    pcc_binovotes: float
    pcc_fixed: float | None

    def summary(self) -> TestSummary:
        return TestSummary(self.name, self.scale, SampleStats(self.mu_x, self.var_x, 2, self.n_v))


@dataclass(frozen=True)
class FixtureTable:
    table1: tuple[Table1Row, ...]
    table2: tuple[Table2Row, ...]

    def row(self, name: str):
        for r in self.table1 + self.table2:
            if r.name == name or r.name.lower().startswith(name.lower()):
                return r
        raise KeyError(name)


def _fixture_rows(filename: str) -> list[dict[str, str]]:
    text = resources.files("mosbounds.data").joinpath(filename).read_text(encoding="utf-8")
    body = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    return list(csv.DictReader(body))


def _opt(text: str) -> float | None:
    return float(text) if text else None


def fixtures() -> FixtureTable:
    """Reference tables of published summary statistics and bounds."""
    t1 = tuple(
        Table1Row(r["name"], float(r["n_v"]), float(r["mu_x"]), float(r["var_x"]), float(r["var_v"]))
        for r in _fixture_rows("table1.csv")
    )
    t2 = tuple(
        Table2Row(
            r["name"], float(r["mu_x"]), float(r["var_x"]), float(r["n_v"]),
            RatingScale(float(r["s_l"]), float(r["s_h"]), int(r["n_s"])),
            r["scale_inferred"] == "1",
            float(r["rmse_binovotes"]), _opt(r["rmse_fixed"]),
            float(r["pcc_binovotes"]), _opt(r["pcc_fixed"]),
        )
        for r in _fixture_rows("table2.csv")
    )
    return FixtureTable(t1, t2)
