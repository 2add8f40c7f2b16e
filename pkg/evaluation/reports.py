# ================== REPORTS ==================
"""
Rapor kayıtları - (protokol, varyant, grup, metrik, değer) satırları
"""

from dataclasses import astuple, dataclass, fields
from typing import List, Sequence

import pandas as pd

from utils.errors import InputError


@dataclass(frozen=True)
class ReportRow:
    protocol: str
    variant: str
    group: str
    metric: str
    value: float


REPORT_COLUMNS = [f.name for f in fields(ReportRow)]


def rows_frame(rows: Sequence[ReportRow]) -> pd.DataFrame:
    return pd.DataFrame([astuple(r) for r in rows], columns=REPORT_COLUMNS)


def write_report(rows: Sequence[ReportRow], path: str) -> str:
    """Başlık satırı + sekme ile ayrılmış kayıtlar"""
    rows_frame(rows).to_csv(path, sep="\t", index=False, float_format="%.17g")
    return path


def read_report(path: str) -> List[ReportRow]:
    """write_report çıktısını kayıplı olmadan geri oku"""
    try:
        frame = pd.read_csv(path, sep="\t", dtype={c: str for c in REPORT_COLUMNS[:-1]},
                            keep_default_na=False, float_precision="round_trip")
    except (OSError, pd.errors.ParserError) as e:
        raise InputError(f"rapor okunamadı: {path}: {e}") from e
    if list(frame.columns) != REPORT_COLUMNS:
        raise InputError(f"beklenmeyen rapor başlığı: {list(frame.columns)}")
    return [ReportRow(r.protocol, r.variant, r.group, r.metric, float(r.value))
            for r in frame.itertuples(index=False)]


def format_table(rows: Sequence[ReportRow]) -> str:
    """İnsan için hizalı tablo"""
    if not rows:
        return "(boş rapor)"
    frame = rows_frame(rows)
    frame["value"] = frame["value"].map(lambda v: f"{v:.4f}")
    return frame.to_string(index=False)
