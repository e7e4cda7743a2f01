"""Export service for solver results and benchmark reports."""
import csv
import io
import json
import logging
from collections import Counter
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional, Sequence

from app.models.base import OriginKind, VarSort, VarTable
from app.models.results import SolverStats, Status
from app.utils.exceptions import ExportError

logger = logging.getLogger(__name__)

BENCH_FIELDS = ['file', 'status', 'expected', 'objective', 'iterations', 'time_ms', 'agrees']


def format_value(value: Fraction, sort: VarSort = VarSort.REAL) -> str:
    """SMT-LIB literal for an exact value: ``(- 3)``, ``(/ 1 2)``, ``true``."""
    if sort == VarSort.BOOL:
        return 'true' if value != 0 else 'false'
    value = Fraction(value)
    magnitude = abs(value)
    if magnitude.denominator == 1:
        body = str(magnitude.numerator)
    else:
        body = f"(/ {magnitude.numerator} {magnitude.denominator})"
    return f"(- {body})" if value < 0 else body


def _sort_name(sort: VarSort) -> str:
    return {VarSort.INT: 'Int', VarSort.REAL: 'Real', VarSort.BOOL: 'Bool'}[sort]


def format_model(
    table: VarTable, model: Mapping[int, Fraction], extra: Optional[Mapping[int, Fraction]] = None
) -> str:
    """Model block over the declared variables, then any ``extra`` entries."""
    entries = []
    for info in table:
        if info.origin.kind == OriginKind.ORIGINAL and info.id in model:
            entries.append(
                f"(define-fun {info.name} () {_sort_name(info.sort)} {format_value(model[info.id], info.sort)})"
            )
    for var, value in sorted((extra or {}).items()):
        entries.append(f"(define-fun {table.name(var)} () Real {format_value(value)})")
    return "(model " + "\n  ".join(entries) + ")"


def print_result(
    status: Status,
    table: Optional[VarTable] = None,
    model: Optional[Mapping[int, Fraction]] = None,
    objective: Optional[Fraction] = None,
    certificate: Optional[Mapping[int, Fraction]] = None,
) -> str:
    """
    Render a result in SMT-LIB style.

    Args:
        status: Outcome
        table: Variable table naming the model entries
        model: Assignment (a best-so-far model may accompany ``unknown``)
        objective: Soft cost for optimization runs
        certificate: Multiplier values printed after the model

    Returns:
        Text without trailing newline
    """
    lines = [status.smtlib]
    if objective is not None:
        lines.append(f"(objective {format_value(objective)})")
    if model is not None and table is not None:
        lines.append(format_model(table, model, certificate))
    return "\n".join(lines)


def format_stats(stats: SolverStats) -> str:
    """Statistics as an SMT-LIB comment block."""
    lines = [
        f"; iterations {stats.iterations}",
        f"; case-clauses-added {stats.case_clauses_added}",
        f"; case-clauses-removed {stats.case_clauses_removed}",
        f"; optimizer-calls {stats.optimizer_calls}",
        f"; lia-calls {stats.lia_calls}",
        f"; wall-time {stats.wall_time:.3f}",
    ]
    for rec in stats.history:
        domains = " ".join(f"{k}:[{lo},{hi}]" for k, (lo, hi) in rec.domains.items())
        cost = f" cost {rec.bound_cost}/{rec.soft_cost}" if rec.bound_cost is not None else ""
        blocking = f" blocking {rec.blocking_size}" if rec.blocking_size is not None else ""
        lines.append(f";   #{rec.index} {rec.outcome}{cost}{blocking} {domains}".rstrip())
    return "\n".join(lines)


class ExportService:
    """
    Service for exporting benchmark records in multiple formats.
    """

    def __init__(self):
        """Initialize export service."""
        self.supported_formats = ['json', 'jsonl', 'csv', 'markdown', 'txt']

    def export(self, records: List[Dict[str, Any]], fmt: str) -> str:
        if fmt not in self.supported_formats:
            raise ExportError(f"Unsupported export format: {fmt}")
        if fmt == 'json':
            return self.export_json(records)
        if fmt == 'jsonl':
            return self.export_jsonl(records)
        if fmt == 'csv':
            return self.export_csv(records)
        if fmt == 'markdown':
            return self.export_markdown(records)
        return self.export_txt(records)

    def export_json(self, data: Any, pretty: bool = True) -> str:
        """
        Export data as JSON.

        Args:
            data: Data to export
            pretty: Pretty print JSON

        Returns:
            JSON string
        """
        try:
            if pretty:
                return json.dumps(data, indent=2, default=str)
            return json.dumps(data, default=str)
        except Exception as e:
            logger.error(f"JSON export failed: {str(e)}")
            raise ExportError(f"JSON export failed: {str(e)}")

    def export_jsonl(self, records: Sequence[Dict[str, Any]]) -> str:
        """One compact JSON object per line."""
        return "\n".join(self.export_json(r, pretty=False) for r in records)

    def export_csv(self, records: List[Dict[str, Any]], fields: Optional[List[str]] = None) -> str:
        """
        Export benchmark records as CSV.

        Args:
            records: List of record dictionaries
            fields: Fields to include (None = bench fields)

        Returns:
            CSV string
        """
        try:
            if not records:
                return ""
            output = io.StringIO()
            writer = csv.DictWriter(output, fieldnames=fields or BENCH_FIELDS, extrasaction='ignore')
            writer.writeheader()
            writer.writerows(records)
            return output.getvalue()
        except Exception as e:
            logger.error(f"CSV export failed: {str(e)}")
            raise ExportError(f"CSV export failed: {str(e)}")

    def export_markdown(self, records: List[Dict[str, Any]], title: str = "Benchmark run") -> str:
        """
        Export as a Markdown report with a results table.

        Args:
            records: Benchmark records
            title: Report heading

        Returns:
            Markdown string
        """
        md = f"# {title}\n\n"
        md += f"**Generated:** {datetime.now(timezone.utc).strftime('%Y-%m-%d %H:%M:%S UTC')}  \n"
        md += f"**Instances:** {len(records)}  \n\n"
        md += "| " + " | ".join(BENCH_FIELDS) + " |\n"
        md += "|" + "---|" * len(BENCH_FIELDS) + "\n"
        for r in records:
            md += "| " + " | ".join(_cell(r.get(f)) for f in BENCH_FIELDS) + " |\n"
        md += "\n" + "  \n".join(f"**{k}:** {v}" for k, v in self.totals(records).items()) + "\n"
        return md

    def export_txt(self, records: List[Dict[str, Any]]) -> str:
        """
        Fixed-width table followed by per-status totals.

        Args:
            records: Benchmark records

        Returns:
            Plain text string
        """
        widths = {f: len(f) for f in BENCH_FIELDS}
        rows = []
        for r in records:
            row = {f: _cell(r.get(f)) for f in BENCH_FIELDS}
            for f in BENCH_FIELDS:
                widths[f] = max(widths[f], len(row[f]))
            rows.append(row)
        line = "  ".join(f.ljust(widths[f]) for f in BENCH_FIELDS)
        txt = line + "\n" + "-" * len(line) + "\n"
        for row in rows:
            txt += "  ".join(row[f].ljust(widths[f]) for f in BENCH_FIELDS).rstrip() + "\n"
        txt += "-" * len(line) + "\n"
        txt += "  ".join(f"{k}: {v}" for k, v in self.totals(records).items()) + "\n"
        return txt

    @staticmethod
    def totals(records: Sequence[Dict[str, Any]]) -> Dict[str, int]:
        counts = Counter(r.get('status', 'error') for r in records)
        out = {s: counts.get(s, 0) for s in ('sat', 'unsat', 'unknown', 'error')}
        out['disagreements'] = sum(1 for r in records if r.get('agrees') is False)
        return out


def _cell(value: Any) -> str:
    if value is None:
        return '-'
    if isinstance(value, float):
        return f"{value:.3f}"
    return str(value)
