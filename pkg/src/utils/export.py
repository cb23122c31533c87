"""Файловые выгрузки: CSV (UTF-8, '\\n', точка как разделитель), канонический JSON, XLSX"""
import csv
import json
from pathlib import Path

import numpy as np
import xlsxwriter

from src.logs import getLogger

logger = getLogger(__name__)


def _check_parent(path: Path):
    if not path.parent.is_dir():
        raise FileNotFoundError(f"output directory does not exist: {path.parent} (for {path})")


def canonical_json(document: dict) -> str:
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(document: dict, path) -> Path:
    path = Path(path)
    _check_parent(path)
    with open(path, "w", encoding="utf-8", newline="\n") as out:
        out.write(canonical_json(document))
    return path


def write_csv(rows, header: list[str], path) -> Path:
    path = Path(path)
    _check_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    logger.debug(f"CSV written: {path}")
    return path


def export_paths_csv(paths: np.ndarray, path) -> Path:
    """Столбцы path_id, i, t, value; t_i = i/N"""
    paths = np.atleast_2d(paths)
    n_steps = paths.shape[1] - 1
    rows = ((path_id, i, repr(i / n_steps), repr(float(value)))
            for path_id, row in enumerate(paths) for i, value in enumerate(row))
    return write_csv(rows, ["path_id", "i", "t", "value"], path)


def read_paths_csv(path) -> dict[int, np.ndarray]:
    """Обратное чтение export_paths_csv: path_id -> значения по возрастанию i"""
    path = Path(path)
    collected: dict[int, list[tuple[int, float]]] = {}
    with open(path, encoding="utf-8", newline="") as source:
        reader = csv.DictReader(source)
        missing = {"path_id", "i", "value"} - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing CSV columns {sorted(missing)}")
        for row in reader:
            collected.setdefault(int(row["path_id"]), []).append((int(row["i"]), float(row["value"])))
    return {path_id: np.array([v for _, v in sorted(points)]) for path_id, points in collected.items()}


def export_sweep_csv(results, path) -> Path:
    """Столбцы s, t, a, probability, bound, ratio"""
    rows = ((repr(r.query.s), repr(r.query.t), repr(r.query.a),
             repr(r.probability), repr(r.bound_value), repr(r.ratio)) for r in results)
    return write_csv(rows, ["s", "t", "a", "probability", "bound", "ratio"], path)


def _write_sheet(workbook, title: str, columns: dict[str, list]):
    worksheet = workbook.add_worksheet(title)
    header_format = workbook.add_format({"bold": True, "align": "center"})
    headers = list(columns.keys())
    for col_num, header in enumerate(headers):
        worksheet.write(0, col_num, header, header_format)
        worksheet.set_column(col_num, col_num, max(len(header), 12) + 2)
    for row_num in range(len(columns[headers[0]]) if headers else 0):
        for col_num, key in enumerate(headers):
            worksheet.write(row_num + 1, col_num, columns[key][row_num])


def export_rate_to_excel(estimate, path) -> Path:
    """Таблица ||S_n - S||_r по n и лист с подгонкой"""
    path = Path(path)
    _check_parent(path)
    workbook = xlsxwriter.Workbook(str(path))
    _write_sheet(workbook, "Нормы ошибок", {
        "n": list(estimate.n_values),
        "error_norm": list(estimate.error_norms),
        "mc_stderr": list(estimate.mc_stderr),
        "log_n": [float(np.log(n)) for n in estimate.n_values],
        "log_error": [float(np.log(e)) for e in estimate.error_norms],
    })
    _write_sheet(workbook, "Подгонка", {
        "slope": [estimate.slope],
        "slope_stderr": [estimate.slope_stderr],
        "intercept": [estimate.intercept],
        "theoretical_exponent": [estimate.theoretical_exponent],
        "passed": [str(estimate.passed)],
    })
    workbook.close()
    logger.info(f"Rate table exported to {path}")
    return path


def export_sweep_to_excel(results, path) -> Path:
    path = Path(path)
    _check_parent(path)
    workbook = xlsxwriter.Workbook(str(path))
    _write_sheet(workbook, "Пересечения", {
        "s": [r.query.s for r in results],
        "t": [r.query.t for r in results],
        "a": [r.query.a for r in results],
        "probability": [r.probability for r in results],
        "bound": [r.bound_value for r in results],
        "ratio": [r.ratio for r in results],
    })
    workbook.close()
    logger.info(f"Crossing sweep exported to {path}")
    return path
