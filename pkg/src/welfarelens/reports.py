"""Report serialization: JSON, CSV and YAML with 15 significant digits.

Every report is first reduced to plain Python data (a mapping or a list of
mappings), floats rounded to 15 significant digits, then rendered. Rendering is
deterministic, so the same report always yields the same bytes.
"""

import csv
import io
import json
from collections.abc import Iterable, Mapping, Sequence
from enum import StrEnum
from typing import cast

import yaml

from .curves import CurveGrid, IndexReport
from .dominance import DominanceVerdict
from .welfare import IdentityRow, PropositionCertificate, WeightProfile

type Record = Mapping[str, object]


class OutputFormat(StrEnum):
    JSON = "json"
    CSV = "csv"
    YAML = "yaml"


SIGNIFICANT_DIGITS: int = 15


def format_number(value: float) -> str:
    return f"{value:.{SIGNIFICANT_DIGITS}g}"


def _rounded(value: object) -> object:
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        return float(format_number(value))
    if isinstance(value, Mapping):
        mapping = cast(Mapping[object, object], value)
        return {str(k): _rounded(v) for k, v in mapping.items()}
    if isinstance(value, (list, tuple)):
        return [_rounded(v) for v in cast(Sequence[object], value)]
    return value


def _cell(value: object) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return format_number(value)
    if isinstance(value, (list, tuple)):
        return ";".join(_cell(v) for v in cast(Sequence[object], value))
    return "" if value is None else str(value)


def _csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO(newline="")
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows([_cell(v) for v in row] for row in rows)
    return buffer.getvalue()


def render_data(data: object, fmt: OutputFormat) -> str:
    """Render a mapping or list of mappings as JSON or YAML."""
    plain = _rounded(data)
    if fmt is OutputFormat.YAML:
        return yaml.safe_dump(plain, sort_keys=False, allow_unicode=True)
    return json.dumps(plain, indent=2, ensure_ascii=False) + "\n"


def _records_csv(records: Sequence[Record]) -> str:
    header = list(records[0]) if records else []
    return _csv(header, ([record[key] for key in header] for record in records))


# ---------------------------------------------------------------------------
# Per-report renderers
# ---------------------------------------------------------------------------


def render_index(report: IndexReport, fmt: OutputFormat) -> str:
    if fmt is not OutputFormat.CSV:
        return render_data(report.as_dict(), fmt)
    rows: list[tuple[str, float]] = [("gini", report.gini)]
    rows.extend((f"gini_k:{k:g}", value) for k, value in report.gini_k.items())
    rows.extend(
        [
            ("bonferroni", report.bonferroni),
            ("zenga", report.zenga),
            ("mean", report.mean),
        ]
    )
    return _csv(("index", "value"), rows)


def render_curve(grid: CurveGrid, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.CSV:
        return _csv(("p", "value"), grid.points)
    return render_data(grid.as_records(), fmt)


def render_weights(profile: WeightProfile, fmt: OutputFormat) -> str:
    if fmt is OutputFormat.CSV:
        rows: list[tuple[str | float, float]] = list(profile.points)
        # Trailing metadata row: the integral of the weight over (0, 1).
        rows.append(("integral", profile.integral))
        return _csv(("p", "weight"), rows)
    return render_data(
        {
            "kind": profile.kind.label,
            "variant": str(profile.variant),
            "integral": profile.integral,
            "points": [{"p": p, "weight": w} for p, w in profile.points],
        },
        fmt,
    )


def _identity_record(row: IdentityRow) -> Record:
    return {
        "kind": row.kind.label,
        "index": row.index,
        "welfare": row.welfare,
        "welfare_direct": row.welfare_direct,
        "relative_gap": row.relative_gap,
    }


def render_welfare(rows: Sequence[IdentityRow], fmt: OutputFormat) -> str:
    records = [_identity_record(row) for row in rows]
    if fmt is OutputFormat.CSV:
        return _records_csv(records)
    return render_data(records, fmt)


def render_dominance(
    verdicts: Mapping[str, DominanceVerdict],
    equivalent: bool,
    fmt: OutputFormat,
) -> str:
    if fmt is OutputFormat.CSV:
        records = [
            {"ordering": name, **verdict.as_dict()}
            for name, verdict in verdicts.items()
        ]
        return _records_csv(records)
    data: dict[str, object] = {
        name: verdict.as_dict() for name, verdict in verdicts.items()
    }
    data["equivalent"] = equivalent
    return render_data(data, fmt)


def render_certificates(
    certificates: Sequence[PropositionCertificate],
    fmt: OutputFormat,
) -> str:
    records = [certificate.as_dict() for certificate in certificates]
    if fmt is OutputFormat.CSV:
        return _records_csv(records)
    return render_data(records, fmt)
