# mixedbm.core.export

import csv
import json
import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FORMAT_VERSION = "v1"


def format_value(value: Any) -> str:
    """Stable text form: %.17g for reals, plain text otherwise"""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % float(value)
    if value is None:
        return ""
    return str(value)


def _header(kind: str, columns: Sequence[str], timestamp: bool) -> list[str]:
    lines = [f"# mixedbm {kind} {FORMAT_VERSION}", "# columns: " + ",".join(columns)]
    if timestamp:
        now = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
        lines.append(f"# generated: {now}")
    return lines


def write_csv(
    path: Path,
    kind: str,
    columns: Sequence[str],
    rows: Iterable[Sequence[Any]],
    timestamp: bool = True,
) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        for line in _header(kind, columns, timestamp):
            handle.write(line + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(
                    f"row of length {len(row)} for {len(columns)} columns in {path}"
                )
            writer.writerow([format_value(value) for value in row])
            count += 1
    logger.info("wrote %d row(s) to %s", count, path)
    return path


def read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    """Columns and body rows of a file written by ``write_csv``"""
    with open(path, newline="", encoding="utf-8") as handle:
        lines = [line for line in handle if not line.startswith("#")]
    reader = csv.reader(lines)
    columns = next(reader)
    return columns, [row for row in reader]


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(key): _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, (complex, np.complexfloating)):
        return {"re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        return value.item()
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    if isinstance(value, Path):
        return str(value)
    return value


def write_json(path: Path, data: dict[str, Any], timestamp: bool = True) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = dict(_jsonable(data))
    payload["format"] = f"mixedbm summary {FORMAT_VERSION}"
    if timestamp:
        payload["generated"] = datetime.now(timezone.utc).replace(microsecond=0).isoformat()
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info("wrote %s", path)
    return path


def write_gnuplot(path: Path, series: Sequence[tuple[str, str]]) -> Path:
    """
    Script plotting Im(omega) against Re(omega) from CSV files.

    ``series`` holds (csv file name, gnuplot 'every/using' clause plus title).
    """
    lines = [
        "# mixedbm eigenvalue plot",
        "set datafile separator ','",
        "set datafile commentschars '#'",
        "set key outside",
        "set xlabel 'Re(omega)'",
        "set ylabel 'Im(omega)'",
        "set grid",
    ]
    plots = [f"'{name}' {clause}" for name, clause in series]
    lines.append("plot " + ", \\\n     ".join(plots) if plots else "# nothing to plot")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("wrote %s", path)
    return path
