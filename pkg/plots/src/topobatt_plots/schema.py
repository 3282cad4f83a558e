"""Validation of input CSVs against the producer's documented schemas."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd

SCHEMAS: dict[str, tuple[str, ...]] = {
    "heatmap": ("delta", "g", "value", "n_bound", "flags"),
    "overlay": ("curve", "delta", "g"),
    "timeseries": ("t", "re_cB", "im_cB", "abs2_cB", "re_cC", "im_cC",
                   "norm", "p_loss", "energy", "ergotropy", "power"),
    "bse_lines": ("delta", "energy_re", "energy_im", "res_re", "res_im",
                  "res_abs", "multiplicity", "kind"),
    "power_curve": ("kappa", "E0", "kappa_qze", "slow_re", "slow_im",
                    "fast_re", "fast_im", "res_slow_abs", "res_fast_abs",
                    "max_power"),
}

# columns that stay text; everything else must parse as numbers
TEXT_COLUMNS = {"flags", "curve", "kind"}


@dataclass
class SchemaReport:
    kind: str
    path: str
    ok: bool
    missing: tuple[str, ...] = ()
    extra: tuple[str, ...] = ()
    bad_types: tuple[str, ...] = ()
    messages: list[str] = field(default_factory=list)

    def summary(self) -> str:
        lines = [f"{self.path} as {self.kind}: {'ok' if self.ok else 'MISMATCH'}"]
        for col in self.missing:
            lines.append(f"  missing column: {col}")
        for col in self.bad_types:
            lines.append(f"  non-numeric values in column: {col}")
        for col in self.extra:
            lines.append(f"  extra column (ignored): {col}")
        lines.extend(f"  {m}" for m in self.messages)
        return "\n".join(lines)


def verify_schema(csv_path: str | Path, kind: str) -> SchemaReport:
    """Check column names and types of a CSV against one producer schema.

    Missing or non-numeric required columns fail; extra columns pass with
    a warning entry (forward compatibility).
    """
    if kind not in SCHEMAS:
        raise ValueError(f"unknown schema kind {kind!r}; "
                         f"expected one of {sorted(SCHEMAS)}")
    path = Path(csv_path)
    expected = SCHEMAS[kind]
    try:
        frame = pd.read_csv(path, dtype=str)
    except FileNotFoundError:
        return SchemaReport(kind=kind, path=str(path), ok=False,
                            messages=["file not found"])
    except Exception as exc:
        return SchemaReport(kind=kind, path=str(path), ok=False,
                            messages=[f"unreadable CSV: {exc}"])
    present = list(frame.columns)
    missing = tuple(c for c in expected if c not in present)
    extra = tuple(c for c in present if c not in expected)
    bad_types = []
    for col in expected:
        if col in missing or col in TEXT_COLUMNS:
            continue
        converted = pd.to_numeric(frame[col], errors="coerce")
        filled = frame[col].notna() & (frame[col].str.strip() != "")
        if (converted.isna() & filled).any():
            bad_types.append(col)
    ok = not missing and not bad_types
    return SchemaReport(kind=kind, path=str(path), ok=ok, missing=missing,
                        extra=extra, bad_types=tuple(bad_types))


def load_validated(csv_path: str | Path, kind: str) -> pd.DataFrame:
    """Read a CSV after schema validation, raising on mismatch."""
    report = verify_schema(csv_path, kind)
    if not report.ok:
        raise ValueError(report.summary())
    frame = pd.read_csv(csv_path)
    if frame.empty:
        raise ValueError(f"{csv_path}: no data rows")
    return frame
