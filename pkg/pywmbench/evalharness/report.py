from .experiment_types import *
from enum import Enum
import json
import logging
import math
from pathlib import Path
import pandas as pd

logger = logging.getLogger('pywmbench.evalharness.report')

CELL_COLUMNS = ["scheme", "attack", "channel_placement"]
QUALITY_FIELDS = ["mcd_db", "lsd_db", "f0_corr", "voiced_overlap", "snr_db", "speaker_sim"]
CSV_COLUMNS = CELL_COLUMNS + ["utterance_id", "payload_hex", "bit_accuracy", "attacker_perf",
                              "embedding_snr_db"] + QUALITY_FIELDS + ["channel_draws"]


class ReportFormat(Enum):
    csv = "csv"
    json = "json"
    markdown = "markdown"

    @property
    def suffix(self) -> str:
        return {"csv": ".csv", "json": ".json", "markdown": ".md"}[self.value]


def row_record(row: EvalRow) -> dict:
    """flat record of a successful row, channel draws serialized to a JSON string"""
    record = {
        "scheme": row.scheme,
        "attack": row.attack,
        "channel_placement": row.channel_placement,
        "utterance_id": row.utterance_id,
        "payload_hex": row.payload_hex,
        "bit_accuracy": row.bit_accuracy,
        "attacker_perf": row.attacker_perf,
        "embedding_snr_db": row.embedding_snr_db,
        "channel_draws": json.dumps(row.channel_draws, sort_keys=True),
    }
    quality = row.quality.to_dict() if row.quality is not None else {}
    for name in QUALITY_FIELDS:
        record[name] = quality.get(name)
    return record


def rows_frame(rows: list) -> pd.DataFrame:
    frame = pd.DataFrame([row_record(row) for row in rows], columns=CSV_COLUMNS)
    frame[METRICS] = frame[METRICS].astype(float)
    return frame


def _plain(value):
    value = float(value)
    return None if math.isnan(value) else value


def aggregate_rows(rows: list) -> list:
    """
    Mean and population standard deviation of every metric per (scheme, attack, channel placement) over the
    successful rows, in order of first appearance. Missing values (f0_corr of unvoiced material) are
    skipped. Error rows are only counted.
    """
    successful = [row for row in rows if row.ok]
    if not successful:
        return []
    errors = {}
    for row in rows:
        if not row.ok:
            errors[row.cell] = errors.get(row.cell, 0) + 1

    grouped = rows_frame(successful).groupby(CELL_COLUMNS, sort=False)
    means = grouped[METRICS].mean()
    stds = grouped[METRICS].std(ddof=0)
    counts = grouped.size()

    aggregates = []
    for cell in means.index:
        agg = dict(zip(CELL_COLUMNS, cell))
        agg["count"] = int(counts[cell])
        agg["errors"] = errors.get(tuple(cell), 0)
        for metric in METRICS:
            agg[f"{metric}_mean"] = _plain(means.loc[cell, metric])
            agg[f"{metric}_std"] = _plain(stds.loc[cell, metric])
        aggregates.append(agg)
    return aggregates


def _format(value, digits: int = 3) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def markdown_table(report: EvalReport) -> str:
    """
    Attacker performance shaped like a robustness table: schemes as columns, attack and channel placement
    as rows, mean ± std per cell. A second table lists the quality metrics per cell.
    """
    schemes = []
    conditions = []
    for agg in report.aggregates:
        if agg["scheme"] not in schemes:
            schemes.append(agg["scheme"])
        condition = (agg["attack"], agg["channel_placement"])
        if condition not in conditions:
            conditions.append(condition)
    cells = {(agg["scheme"], agg["attack"], agg["channel_placement"]): agg for agg in report.aggregates}

    lines = ["# Attacker performance", "",
             f"pywmbench {report.version}, global seed {report.global_seed}. 0 is perfect extraction, "
             f"0.5 is chance.", "",
             "| attack | channel | " + " | ".join(schemes) + " |",
             "|---|---|" + "---|" * len(schemes)]
    for attack, placement in conditions:
        values = []
        for scheme in schemes:
            agg = cells.get((scheme, attack, placement))
            if agg is None:
                values.append("n/a")
            else:
                values.append(f"{_format(agg['attacker_perf_mean'])} ± {_format(agg['attacker_perf_std'])}")
        lines.append(f"| {attack} | {placement} | " + " | ".join(values) + " |")

    lines += ["", "# Quality", "",
              "| scheme | attack | channel | n | errors | MCD dB | LSD dB | F0 corr | SNR dB | speaker sim |",
              "|---|---|---|---|---|---|---|---|---|---|"]
    for agg in report.aggregates:
        lines.append(f"| {agg['scheme']} | {agg['attack']} | {agg['channel_placement']} | {agg['count']} | "
                     f"{agg['errors']} | {_format(agg['mcd_db_mean'], 2)} | {_format(agg['lsd_db_mean'], 2)} | "
                     f"{_format(agg['f0_corr_mean'])} | {_format(agg['snr_db_mean'], 1)} | "
                     f"{_format(agg['speaker_sim_mean'])} |")
    return "\n".join(lines) + "\n"


def write_report(report: EvalReport, report_format, path) -> Path:
    """
    Writes the report as csv (one line per successful row), json (the full nested report) or markdown
    (aggregate tables).

    :raises EmptyReportException: no successful row, nothing is written
    :raises ExperimentException: the file can't be written
    """
    report_format = ReportFormat(report_format)
    path = Path(path)
    if not report.successful_rows:
        logger.error(f"Report has no successful rows ({len(report.error_rows)} errors). Not writing {path}.")
        raise EmptyReportException("Can't write a report without a single successful row.")

    try:
        if report_format == ReportFormat.csv:
            rows_frame(report.successful_rows).to_csv(path, index=False)
        elif report_format == ReportFormat.json:
            with open(path, 'w', encoding='utf-8') as stream:
                json.dump(report.to_dict(), stream, indent=2, allow_nan=False)
        else:
            with open(path, 'w', encoding='utf-8') as stream:
                stream.write(markdown_table(report))
    except OSError as err:
        logger.error(f"Can't write {report_format.value} report to {path}: {err}")
        raise ExperimentException(f"Can't write report to {path}.") from err

    logger.info(f"Wrote {report_format.value} report to {path}.")
    return path


def read_json_report(path) -> EvalReport:
    with open(path, 'r', encoding='utf-8') as stream:
        return EvalReport.from_dict(json.load(stream))
