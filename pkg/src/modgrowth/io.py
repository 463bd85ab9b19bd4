"""Parsing, configuration, CSV output and run manifests for the command line."""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import re
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence

from .geometry import Point, Units
from .group import GroupElement

__version__ = "0.1.0"

CONFIG_ENV = "MODGROWTH_CONFIG"
CSV_FIELDS = ["R", "units", "count", "variant"]
CENSUS_FIELDS = CSV_FIELDS + ["frac_hyp", "frac_par", "frac_ell"]


class UsageError(ValueError):
    """Bad command-line input; maps to exit status 1."""


# ---------------------------------------------------------------------------
# points and matrices

_NUM = r"[+-]?(?:\d+(?:\.\d*)?|\.\d+)(?:/\d+)?"
_POINT = re.compile(rf"^(?:(?P<re>{_NUM})(?=[+-]|$))?(?P<im>[+-]?(?:{_NUM})?\*?i)?$")


def _fraction(text: str) -> Fraction:
    return Fraction(text)


def parse_point(text: str) -> Point:
    """Parse ``p/q+r/s*i`` style points; ``i``, ``2i``, ``1+i``, ``-1/2+3/4*i`` all work.

    Values are kept as exact fractions (decimals included), so downstream
    orbit deduplication stays exact.
    """
    s = text.replace(" ", "")
    m = _POINT.match(s)
    if not s or m is None or m.group("im") is None:
        raise UsageError(f"cannot parse point {text!r}; expected e.g. 'i', '2i', '1/2+3/2*i'")
    re_part = _fraction(m.group("re")) if m.group("re") else Fraction(0)
    im = m.group("im").rstrip("i").rstrip("*")
    if im in ("", "+"):
        im_part = Fraction(1)
    elif im == "-":
        im_part = Fraction(-1)
    else:
        im_part = _fraction(im)
    try:
        return Point(re_part, im_part)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def format_point(p: Point) -> str:
    if p.exact:
        return f"{p.x}+{p.y}*i"
    return f"{float(p.x)!r}+{float(p.y)!r}*i"


def parse_matrix(text: str) -> GroupElement:
    parts = [t for t in re.split(r"[,\s;]+", text.strip()) if t]
    if len(parts) != 4:
        raise UsageError(f"matrix {text!r} must have four integer entries a,b,c,d")
    try:
        a, b, c, d = (int(t) for t in parts)
    except ValueError as exc:
        raise UsageError(f"matrix {text!r} has a non-integer entry") from exc
    try:
        return GroupElement(a, b, c, d)
    except ValueError as exc:
        if isinstance(exc, OverflowError):
            raise
        raise UsageError(str(exc)) from exc


def parse_radii(text: str) -> list[float]:
    """Comma list (``1,2,3``) or range ``start:stop:step`` (stop inclusive)."""
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0 or stop < start:
                raise ValueError
            n = int(round((stop - start) / step))
            out = [round(start + k * step, 12) for k in range(n + 1)]
        else:
            out = [float(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse radii {text!r}") from exc
    if not out or any(r < 0 for r in out):
        raise UsageError("radii must be a nonempty list of nonnegative numbers")
    return sorted(out)


def matrix_str(g: GroupElement) -> str:
    return ",".join(str(v) for v in g.entries)


# ---------------------------------------------------------------------------
# configuration


@dataclass
class Config:
    """Settings read from a ``key = value`` file.

    Keys: ``units`` (hyp or teich), ``tolerance`` (dedup epsilon for
    irrational points), ``cache_dir`` (norm-ball cache), ``workers``.
    Lines starting with ``#`` are comments.
    """

    units: Units = Units.HYPERBOLIC
    tolerance: float | None = None
    cache_dir: str | None = None
    workers: int = 1

    KEYS = ("units", "tolerance", "cache_dir", "workers")

    @classmethod
    def parse(cls, text: str, source: str = "<config>") -> Config:
        cfg = cls()
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{source}:{lineno}: expected key = value")
            key, value = (t.strip() for t in line.split("=", 1))
            if key not in cls.KEYS:
                raise UsageError(f"{source}:{lineno}: unknown key {key!r}")
            try:
                if key == "units":
                    cfg.units = Units.parse(value)
                elif key == "tolerance":
                    cfg.tolerance = float(value)
                elif key == "cache_dir":
                    cfg.cache_dir = value
                else:
                    cfg.workers = int(value)
                    if cfg.workers < 1:
                        raise ValueError("workers must be positive")
            except ValueError as exc:
                raise UsageError(f"{source}:{lineno}: {exc}") from exc
        return cfg

    @classmethod
    def load(cls, path: str | os.PathLike | None = None) -> Config:
        path = path or os.environ.get(CONFIG_ENV)
        if not path:
            return cls()
        p = Path(path)
        if not p.is_file():
            raise UsageError(f"config file {p} not found")
        return cls.parse(p.read_text(), str(p))


# ---------------------------------------------------------------------------
# CSV and manifests


def render_csv(rows: Iterable[dict], fields: Sequence[str] = CSV_FIELDS) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(fields), lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _fmt(row[k]) for k in fields})
    return buf.getvalue()


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def read_csv(path: str | os.PathLike) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | os.PathLike) -> str:
    return sha256_bytes(Path(path).read_bytes())


def write_idempotent(path: str | os.PathLike, text: str) -> str:
    """Overwrite ``path`` with ``text`` unless it already holds exactly that; return the digest."""
    p = Path(path)
    data = text.encode()
    digest = sha256_bytes(data)
    if p.is_file() and sha256_file(p) == digest:
        return digest
    p.parent.mkdir(parents=True, exist_ok=True)
    tmp = p.with_name(p.name + ".tmp")
    tmp.write_bytes(data)
    os.replace(tmp, p)
    if sha256_file(p) != digest:
        raise OSError(f"digest mismatch after writing {p}")
    return digest


def emit(text: str, out: str | None) -> str:
    """Write to ``out`` (idempotently) or stdout; returns the digest of the text."""
    if out is None or out == "-":
        sys.stdout.write(text)
        return sha256_bytes(text.encode())
    return write_idempotent(out, text)


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    version: str = __version__
    phi: str | None = None
    X: str | None = None
    Y: str | None = None
    units: str = Units.HYPERBOLIC.value
    radii: list[float] = field(default_factory=list)
    A: float | None = None
    L: float | None = None
    N: int | None = None
    h: float | None = None
    seed: int | None = None
    workers: int = 1
    started: str = ""
    finished: str = ""
    outputs: dict[str, str] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def start(self) -> None:
        self.started = _now()

    def finish(self) -> None:
        self.finished = _now()

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> RunManifest:
        return cls(**json.loads(text))

    def write(self, path: str | os.PathLike) -> None:
        # timestamps change on every run, so a plain overwrite is the idempotent choice here
        write_idempotent(path, self.to_json())

    def verify_outputs(self) -> dict[str, bool]:
        """Digest check of every recorded output file against its current content."""
        return {p: Path(p).is_file() and sha256_file(p) == d for p, d in self.outputs.items()}


def manifest_path(out: str) -> str:
    return out + ".manifest.json"


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")
