"""
CSV rows, JSON sidecars and the text summary of benchmark results.
"""

import csv
import json
import math
from pathlib import Path
from typing import Any, Dict, List

from .config import CSV_COLUMNS, DOMINANCE_SLACK, ENTROPY_COST_SLACK

# mean visits may exceed leaf entropy / log2(4/3) by at most ENTROPY_COST_SLACK
ENTROPY_COST_DIVISOR = math.log2(4.0 / 3.0)


def append_rows(path: Path, rows: List[Dict[str, Any]]) -> None:
    """Append rows to the results CSV, writing the header for a new file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    exists = path.exists() and path.stat().st_size > 0
    if exists:
        with open(path, 'r', encoding='utf-8', newline='') as f:
            header = next(csv.reader(f), [])
        if header != CSV_COLUMNS:
            raise ValueError(f"{path}: CSV header does not match schema (columns {header})")
    with open(path, 'a', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=CSV_COLUMNS)
        if not exists:
            writer.writeheader()
        for row in rows:
            writer.writerow({column: row[column] for column in CSV_COLUMNS})


def read_rows(path: Path) -> List[Dict[str, str]]:
    with open(path, 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def write_sidecar(path: Path, payload: Dict[str, Any]) -> None:
    """Per-run JSON sidecar (visit and leaf-depth histograms)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, indent=2, sort_keys=True)


def _is_baseline(row: Dict[str, Any]) -> bool:
    return str(row['baseline']).lower() in ('1', 'true')


def row_violations(row: Dict[str, Any]) -> List[str]:
    """
    Relations every filtered run should satisfy:
        mean_visits <= leaf_entropy / log2(4/3) + 3
        answer_entropy <= leaf_entropy + 0.1
    Baseline rows bypass the tree and are never flagged.
    """
    if _is_baseline(row):
        return []
    mean_visits = float(row['mean_visits'])
    leaf_entropy = float(row['leaf_entropy_bits'])
    answer_entropy = float(row['answer_entropy_bits'])
    problems = []
    ceiling = leaf_entropy / ENTROPY_COST_DIVISOR + ENTROPY_COST_SLACK
    if mean_visits > ceiling:
        problems.append(f"mean_visits {mean_visits:.3f} > {ceiling:.3f}")
    if answer_entropy > leaf_entropy + DOMINANCE_SLACK:
        problems.append(f"answer entropy {answer_entropy:.3f} > leaf entropy {leaf_entropy:.3f} + {DOMINANCE_SLACK}")
    return problems


def format_table(rows: List[Dict[str, Any]]) -> str:
    """Fixed-width summary of the main columns."""
    columns = ['app', 'rule', 'distribution', 'depth_cap_mode', 'baseline', 'm',
               'mean_visits', 'p99_visits', 'fallback_rate', 'leaf_entropy_bits',
               'answer_entropy_bits', 'mean_backup_ops']
    cells = [columns]
    for row in rows:
        line = []
        for column in columns:
            value = row[column]
            try:
                number = float(value)
                text = value if str(value).lstrip('-').isdigit() else f"{number:.3f}"
            except (TypeError, ValueError):
                text = str(value)
            line.append(str(text))
        cells.append(line)
    widths = [max(len(line[i]) for line in cells) for i in range(len(columns))]
    return "\n".join("  ".join(cell.ljust(width) for cell, width in zip(line, widths))
                     for line in cells)


def summarize(rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    """Table text plus flagged rows (index, problems)."""
    flagged = []
    for index, row in enumerate(rows):
        problems = row_violations(row)
        if problems:
            flagged.append((index, problems))
    return {'table': format_table(rows), 'flagged': flagged, 'rows': len(rows)}
