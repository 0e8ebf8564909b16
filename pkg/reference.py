"""Loader for the shipped reference table (reference/bounds.txt)."""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from typing import Dict, List, Optional

from exactnum import CertifiedInterval

REFERENCE_FILE = Path(__file__).resolve().parent / "reference" / "bounds.txt"
REL_TOL = Fraction(1, 10**9)


@dataclass
class ReferenceRow:
    """One printed row.

    Attributes:
        n: int -- dimension
        yamabe_sphere: str -- printed Y(S^n)
        lambda_min: str -- printed Lambda_{n,>=2}
        lambda_hp2: Optional[str] -- printed lambda_n, only for n >= 11
    """

    n: int
    yamabe_sphere: str
    lambda_min: str
    lambda_hp2: Optional[str] = None

    @staticmethod
    def last_digit(printed: str) -> Decimal:
        """Unit in the last printed place, e.g. 1E-5 for "74.50435"."""
        return Decimal(1).scaleb(Decimal(printed).as_tuple().exponent)

    def tolerance(self, column: str, rel_tol: Fraction = REL_TOL) -> Fraction:
        """max(rel_tol * |printed|, one unit in the last printed digit)."""
        printed = getattr(self, column)
        return max(rel_tol * abs(Fraction(printed)), Fraction(self.last_digit(printed)))

    def matches(self, column: str, value: object, rel_tol: Fraction = REL_TOL) -> bool:
        """Whether `value` agrees with the printed entry up to `tolerance`.

        `value` is a CertifiedInterval (distance from the enclosure) or a
        decimal string / number.
        """
        printed = getattr(self, column)
        if printed is None:
            return value is None
        if value is None:
            return False
        if isinstance(value, CertifiedInterval):
            distance = value.distance_to(printed)
        else:
            distance = abs(Fraction(str(value)) - Fraction(printed))
        return distance <= self.tolerance(column, rel_tol)


@dataclass
class ReferenceTable:
    path: Path
    rows: Dict[int, ReferenceRow]

    @classmethod
    def load_from_file(cls, path: str | Path = REFERENCE_FILE) -> "ReferenceTable":
        p = Path(path)
        if not p.exists() or not p.is_file():
            raise FileNotFoundError(f"Reference table not found: {p}")

        rows: Dict[int, ReferenceRow] = {}
        for lineno, raw in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if ":" not in line:
                raise RuntimeError(f"Incorrect reference file format {p}. Line {lineno}: {line}")
            key, values = line.split(":", 1)
            fields = [v.strip() for v in values.split(",") if v.strip()]
            try:
                n = int(key.strip())
                for value in fields:
                    Decimal(value)
            except Exception:
                raise RuntimeError(f"Incorrect reference file format {p}. Line {lineno}: {line}")
            if len(fields) not in (2, 3):
                raise RuntimeError(f"Expected 2 or 3 values in {p}. Line {lineno}: {line}")
            if n in rows:
                raise ValueError(f"Duplicate row for n={n} in {p}")
            rows[n] = ReferenceRow(n, fields[0], fields[1], fields[2] if len(fields) == 3 else None)
        return cls(path=p, rows=rows)

    @property
    def dimensions(self) -> List[int]:
        return sorted(self.rows)

    def __getitem__(self, n: int) -> ReferenceRow:
        return self.rows[n]
