"""Coefficient files: one per ``k``, a ``# key=value`` header then CSV rows.

::

    # k=4
    # delta=1e-25
    # P=942939827
    r,value,stable_digits,source
    0,2.465018391934227354079894e-13,24,paper-table

Values are written in scientific notation and parsed into ``mpfr`` with at
least 128 bits, enough to round-trip every printed digit. Rows from published
tables keep the printed digits verbatim; computed rows are written with the
run's ``digits``.
"""

from __future__ import annotations

import csv
import hashlib
import io
import re
import statistics
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import mpfr

from .engine import matched_digits
from .mpcontext import bits_for_digits, format_sci
from .polynomial import MomentPolynomial

SOURCES = ("paper-table", "computed", "method1")
COLUMNS = ("r", "value", "stable_digits", "source")
MIN_BITS = 128
DEFAULT_COMPUTED_DIGITS = 20
DATA_PACKAGE = "zetamoments.data"
CHECKSUM_FILE = "SHA256SUMS"
_VALUE_RE = re.compile(r"^-?\d(\.\d+)?e[+-]\d{2,3}$")


class CoefficientParseError(ValueError):
    """Malformed coefficient file; carries the 1-based line number when known."""

    def __init__(self, message: str, path=None, line: Optional[int] = None):
        where = f"{path}" if path is not None else "<coefficients>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {message}")
        self.path = path
        self.line = line


@dataclass
class CoefficientRow:
    r: int
    value: object  # mpfr
    stable_digits: int
    source: str
    text: str  # the value exactly as written

    @property
    def significant_digits(self) -> int:
        mant = self.text.lstrip("-").split("e")[0]
        return len(mant.replace(".", ""))


@dataclass
class CoefficientFile:
    k: int
    rows: List[CoefficientRow]
    metadata: Dict[str, str] = field(default_factory=dict)

    @property
    def is_partial(self) -> bool:
        return len(self.rows) != self.k * self.k + 1

    def validate(self, path=None) -> None:
        if not self.rows:
            raise CoefficientParseError("no coefficient rows", path)
        rs = [row.r for row in self.rows]
        if rs != list(range(len(rs))):
            missing = sorted(set(range(max(rs) + 1)) - set(rs))
            raise CoefficientParseError(f"rows must be r = 0, 1, ... in order; missing {missing}", path)
        if len(rs) > self.k * self.k + 1:
            raise CoefficientParseError(f"r runs past k^2 = {self.k * self.k}", path)
        if self.is_partial and any(row.source != "method1" for row in self.rows):
            raise CoefficientParseError(
                f"only method1 files may be partial; have r = 0..{len(rs) - 1} of 0..{self.k * self.k}", path
            )

    @property
    def provenance(self) -> str:
        sources = {row.source for row in self.rows}
        if "computed" in sources:
            return "computed"
        if "paper-table" in sources:
            return "ingested-from-paper"
        return "method1"

    def to_polynomial(self) -> MomentPolynomial:
        return MomentPolynomial(
            self.k,
            [row.value for row in self.rows],
            [row.stable_digits for row in self.rows],
            self.provenance,
            dict(self.metadata),
        )

    @classmethod
    def from_polynomial(cls, poly: MomentPolynomial, source: Optional[str] = None, sig: Optional[int] = None) -> "CoefficientFile":
        """Rows for ``poly``; ``sig`` significant digits per value (default: metadata ``digits``)."""
        if source is None:
            source = {"computed": "computed", "ingested-from-paper": "paper-table", "method1": "method1"}[poly.provenance]
        if source not in SOURCES:
            raise ValueError(f"unknown source {source!r}")
        if sig is None:
            sig = int(poly.metadata.get("digits", DEFAULT_COMPUTED_DIGITS))
        stable = poly.stable_digits or [0] * len(poly)
        rows = []
        for r, (c, sd) in enumerate(zip(poly.coefficients, stable)):
            text = format_sci(c, sig)
            rows.append(CoefficientRow(r, _parse_value(text), int(sd or 0), source, text))
        meta = {"k": str(poly.k)}
        meta.update({k: str(v) for k, v in poly.metadata.items() if k != "k"})
        return cls(poly.k, rows, meta)

    def dumps(self) -> str:
        buf = io.StringIO()
        meta = dict(self.metadata)
        meta.pop("k", None)
        buf.write(f"# k={self.k}\n")
        for key, value in meta.items():
            if "\n" in str(value) or "=" in key:
                raise ValueError(f"metadata {key!r} cannot be written on one header line")
            buf.write(f"# {key}={value}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for row in self.rows:
            w.writerow([row.r, row.text, row.stable_digits, row.source])
        return buf.getvalue()

    def save(self, path) -> None:
        self.validate(path)
        Path(path).write_text(self.dumps())


def _parse_value(text: str):
    digits = len(text.lstrip("-").split("e")[0].replace(".", ""))
    bits = max(MIN_BITS, bits_for_digits(digits + 2))
    return mpfr(text, bits)


def parse_coefficient_text(text: str, path=None) -> CoefficientFile:
    meta: Dict[str, str] = {}
    rows: List[CoefficientRow] = []
    header_seen = False
    seen = set()
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" not in body:
                raise CoefficientParseError(f"header line needs key=value: {line!r}", path, lineno)
            key, value = body.split("=", 1)
            meta[key.strip()] = value.strip()
            continue
        cells = next(csv.reader([line]))
        if not header_seen:
            if tuple(cells) != COLUMNS:
                raise CoefficientParseError(f"expected column header {','.join(COLUMNS)}", path, lineno)
            header_seen = True
            continue
        if len(cells) != 4:
            raise CoefficientParseError(f"expected 4 fields, got {len(cells)}", path, lineno)
        r_text, value, sd_text, source = cells
        try:
            r = int(r_text)
            sd = int(sd_text)
        except ValueError:
            raise CoefficientParseError(f"r and stable_digits must be integers: {line!r}", path, lineno) from None
        if not _VALUE_RE.match(value):
            raise CoefficientParseError(f"value is not in scientific notation: {value!r}", path, lineno)
        if source not in SOURCES:
            raise CoefficientParseError(f"unknown source tag {source!r}", path, lineno)
        if r in seen:
            raise CoefficientParseError(f"duplicate r = {r}", path, lineno)
        seen.add(r)
        rows.append(CoefficientRow(r, _parse_value(value), sd, source, value))
    if "k" not in meta:
        raise CoefficientParseError("missing '# k=' header", path)
    try:
        k = int(meta["k"])
    except ValueError:
        raise CoefficientParseError(f"bad k {meta['k']!r}", path) from None
    rows.sort(key=lambda row: row.r)
    cf = CoefficientFile(k, rows, meta)
    cf.validate(path)
    return cf


def read_coefficient_file(path) -> CoefficientFile:
    return parse_coefficient_text(Path(path).read_text(), path)


def load_coefficients(path) -> MomentPolynomial:
    return read_coefficient_file(path).to_polynomial()


def save_coefficients(poly: MomentPolynomial, path, source: Optional[str] = None, sig: Optional[int] = None) -> None:
    CoefficientFile.from_polynomial(poly, source, sig).save(path)


# ---------------------------------------------------------------------------
# comparison and merging


@dataclass
class DiffReport:
    k: int
    matched: List[Tuple[int, int]]  # (r, matched significant digits)

    @property
    def min(self) -> int:
        return min(d for _, d in self.matched)

    @property
    def median(self) -> float:
        return statistics.median(d for _, d in self.matched)

    def format(self) -> str:
        lines = [f"# diff k={self.k} rows={len(self.matched)} min={self.min} median={self.median:g}", "r,matched_digits"]
        lines += [f"{r},{d}" for r, d in self.matched]
        return "\n".join(lines) + "\n"


def _cap(poly: MomentPolynomial, r: int) -> int:
    if poly.stable_digits and poly.stable_digits[r] is not None:
        return int(poly.stable_digits[r])
    return 40


def diff_coefficients(a: MomentPolynomial, b: MomentPolynomial) -> DiffReport:
    """Matched significant digits per common ``r``, capped by the smaller stable-digit count."""
    if a.k != b.k:
        raise ValueError(f"cannot compare k={a.k} with k={b.k}")
    n = min(len(a), len(b))
    out = []
    for r in range(n):
        cap = min(_cap(a, r), _cap(b, r))
        bits = max(a[r].precision, b[r].precision)
        with gmpy2.context(gmpy2.get_context(), precision=bits):
            out.append((r, matched_digits(a[r], b[r], cap)))
    return DiffReport(a.k, out)


def merge_coefficient_files(files: Sequence[CoefficientFile]) -> CoefficientFile:
    """Row-wise best of several files for the same ``k`` (most stable digits wins, earlier file on ties)."""
    if not files:
        raise ValueError("nothing to merge")
    k = files[0].k
    if any(f.k != k for f in files):
        raise ValueError("all files must have the same k")
    best: Dict[int, Tuple[CoefficientRow, int]] = {}
    for i, f in enumerate(files):
        for row in f.rows:
            cur = best.get(row.r)
            if cur is None or row.stable_digits > cur[0].stable_digits:
                best[row.r] = (row, i)
    rows = [best[r][0] for r in sorted(best)]
    meta = {"k": str(k)}
    for i, f in enumerate(files):
        used = [r for r in sorted(best) if best[r][1] == i]
        if not used:
            continue
        note = " ".join(f"{key}={val}" for key, val in f.metadata.items() if key not in ("k",) and " " not in val)
        meta[f"part{i + 1}"] = f"r={_ranges(used)} {note}".strip()
    merged = CoefficientFile(k, rows, meta)
    merged.validate()
    return merged


def _ranges(rs: Iterable[int]) -> str:
    rs = sorted(rs)
    out = []
    start = prev = rs[0]
    for r in rs[1:] + [None]:
        if r is not None and r == prev + 1:
            prev = r
            continue
        out.append(f"{start}-{prev}" if prev != start else f"{start}")
        if r is not None:
            start = prev = r
    return ",".join(out)


# ---------------------------------------------------------------------------
# shipped data


def _data_dir():
    return resources.files(DATA_PACKAGE)


def shipped_names() -> List[str]:
    return sorted(p.name for p in _data_dir().iterdir() if p.name.endswith(".csv"))


def shipped_path(k: int, kind: str = "coeffs"):
    if kind not in ("coeffs", "method1"):
        raise ValueError("kind must be 'coeffs' or 'method1'")
    p = _data_dir() / f"{kind}_k{k:02d}.csv"
    if not p.is_file():
        raise FileNotFoundError(f"no shipped {kind} file for k={k}")
    return p


def shipped_coefficients(k: int) -> MomentPolynomial:
    """Published (k >= 4) or engine-computed (k <= 3) coefficients shipped with the package."""
    p = shipped_path(k, "coeffs")
    return parse_coefficient_text(p.read_text(), p.name).to_polynomial()


def shipped_method1(k: int) -> MomentPolynomial:
    p = shipped_path(k, "method1")
    return parse_coefficient_text(p.read_text(), p.name).to_polynomial()


def checksums(names: Optional[Iterable[str]] = None) -> Dict[str, str]:
    names = shipped_names() if names is None else names
    return {n: hashlib.sha256((_data_dir() / n).read_bytes()).hexdigest() for n in names}


def verify_checksums() -> List[str]:
    """Names of shipped files whose SHA-256 differs from the committed list."""
    listed = {}
    for line in (_data_dir() / CHECKSUM_FILE).read_text().splitlines():
        if line.strip():
            digest, name = line.split()
            listed[name] = digest
    actual = checksums(listed)
    bad = [n for n in listed if actual[n] != listed[n]]
    bad += [n for n in shipped_names() if n not in listed]
    return sorted(bad)
