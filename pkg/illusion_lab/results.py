"""Result tables and their CSV form"""
import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

from . import ARTIFACT_VERSION
from .config import Config
from .evalmetrics import EvalRecord
from .exceptions import IngestionError, PreconditionError
from .schemas import ExperimentConfig

RESULT_FORMATS = ('csv', 'plain')


def config_hash(config: ExperimentConfig) -> str:
    canonical = json.dumps(config.canonical(), sort_keys=True, separators=(',', ':'))
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def table_metadata(config: ExperimentConfig) -> Dict[str, str]:
    return {
        'kind': config.kind,
        'seed': str(config.seed),
        'replicates': str(config.replicates),
        'version': ARTIFACT_VERSION,
        'config_sha256': config_hash(config),
    }


@dataclass
class ResultTable:
    rows: List[EvalRecord] = field(default_factory=list)
    metadata: Dict[str, str] = field(default_factory=dict)

    def select(self, metric: str, label: Optional[str] = None) -> List[EvalRecord]:
        return [r for r in self.rows if r.metric == metric and (label is None or r.label == label)]


def render_results(table: ResultTable, format: str = 'csv') -> str:
    """CSV text with `# key: value` metadata comments ('plain' omits them)"""
    if format not in RESULT_FORMATS:
        raise PreconditionError(f"unknown result format '{format}', expected one of {RESULT_FORMATS}")
    buffer = io.StringIO()
    if format == 'csv':
        for key, value in table.metadata.items():
            buffer.write(f"# {key}: {value}\n")
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(Config.RESULT_COLUMNS)
    for record in table.rows:
        writer.writerow([
            Config.format_float(record.index),
            record.metric,
            Config.format_float(record.value),
            Config.format_float(record.ci_half_width),
            record.label,
        ])
    return buffer.getvalue()


def write_results(table: ResultTable, path: Union[str, Path], format: str = 'csv') -> Path:
    path = Path(path)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        f.write(render_results(table, format))
    return path


def read_results(path: Union[str, Path]) -> ResultTable:
    metadata: Dict[str, str] = {}
    lines = Path(path).read_text(encoding='utf-8').splitlines()
    body_start = 0
    for body_start, line in enumerate(lines):
        if not line.startswith('#'):
            break
        key, _, value = line[1:].strip().partition(':')
        metadata[key.strip()] = value.strip()

    reader = csv.reader(lines[body_start:])
    header = next(reader, None)
    if header is None or tuple(header) != Config.RESULT_COLUMNS:
        raise IngestionError(f"{path}: expected header {','.join(Config.RESULT_COLUMNS)}")
    rows = []
    for number, fields in enumerate(reader, start=1):
        if len(fields) != len(Config.RESULT_COLUMNS):
            raise IngestionError(f"{path}: row {number} has {len(fields)} fields")
        index, metric, value, ci_half_width, label = fields
        rows.append(EvalRecord(
            index=float(index),
            metric=metric,
            value=float(value),
            ci_half_width=float(ci_half_width),
            label=label,
        ))
    return ResultTable(rows=rows, metadata=metadata)
