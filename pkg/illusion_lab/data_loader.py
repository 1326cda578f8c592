"""Data loader for dataset CSV files and experiment recipes"""
import configparser
import csv
import logging
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
from pydantic import ValidationError

from .config import Config
from .dataset import Dataset
from .exceptions import ConfigurationError, IngestionError, UnsupportedClassError
from .schemas import ClassifierSpec, ExperimentConfig, FitConfig
from .synthdata import Stream

logger = logging.getLogger(__name__)

CLASSIFIER_SECTION_PREFIX = 'classifier:'


def _cell(value: Optional[str], row: int, column: str) -> str:
    if value is None or not value.strip():
        raise IngestionError(f"missing value at row {row}, column '{column}'")
    return value.strip()


def _number(value: Optional[str], row: int, column: str) -> float:
    text = _cell(value, row, column)
    try:
        number = float(text)
    except ValueError:
        raise IngestionError(f"non-numeric value '{text}' at row {row}, column '{column}'") from None
    if not np.isfinite(number):
        raise IngestionError(f"non-finite value '{text}' at row {row}, column '{column}'")
    return number


def _step(value: Optional[str], row: int, column: str) -> int:
    number = _number(value, row, column)
    if not number.is_integer():
        raise IngestionError(f"non-integer time step '{value.strip()}' at row {row}, column '{column}'")
    return int(number)


def load_dataset_csv(csv_path: Union[str, Path], label_column: str = Config.DEFAULT_LABEL_COLUMN) -> Dataset:
    """Load a two-class dataset.

    Every column other than the label, `t` and `latent` is a numeric feature.
    The first label value seen becomes class 0, the other class 1. Rows are
    numbered from 1 after the header.
    """
    csv_file = Path(csv_path)
    if not csv_file.exists():
        raise IngestionError(f"CSV file not found: {csv_path}")

    with open(csv_file, 'r', encoding='utf-8', newline='') as f:
        reader = csv.DictReader(f)
        header = reader.fieldnames
        if not header:
            raise IngestionError(f"{csv_path} has no header row")
        if label_column not in header:
            raise IngestionError(f"label column '{label_column}' not in header {header}")
        reserved = {label_column, Config.TIME_COLUMN, Config.LATENT_COLUMN}
        feature_names = [name for name in header if name not in reserved]
        if not feature_names:
            raise IngestionError(f"{csv_path} has no feature columns")

        features: List[List[float]] = []
        raw_labels: List[str] = []
        times: List[int] = []
        latent: List[float] = []
        for row_number, row in enumerate(reader, start=1):
            if None in row:
                raise IngestionError(f"row {row_number} has more fields than the header")
            features.append([_number(row[name], row_number, name) for name in feature_names])
            raw_labels.append(_cell(row[label_column], row_number, label_column))
            if Config.TIME_COLUMN in header:
                times.append(_step(row[Config.TIME_COLUMN], row_number, Config.TIME_COLUMN))
            if Config.LATENT_COLUMN in header:
                latent.append(_number(row[Config.LATENT_COLUMN], row_number, Config.LATENT_COLUMN))

    if not features:
        raise IngestionError(f"{csv_path} has no data rows")

    classes = list(dict.fromkeys(raw_labels))
    if len(classes) != 2:
        raise UnsupportedClassError(
            f"label column '{label_column}' must hold exactly two values, found {len(classes)}: {classes[:5]}"
        )
    logger.info(f"Loaded {len(features)} rows from {csv_file.name}; labels {classes[0]} -> 0, {classes[1]} -> 1")

    return Dataset(
        features=np.array(features),
        labels=np.array([classes.index(value) for value in raw_labels]),
        feature_names=tuple(feature_names),
        time_index=np.array(times, dtype=np.int64) if times else None,
        latent_score=np.array(latent) if latent else None,
        class_names=(classes[0], classes[1]),
    )


def write_dataset_csv(data: Dataset, csv_path: Union[str, Path],
                      label_column: str = Config.DEFAULT_LABEL_COLUMN) -> Path:
    """Write a dataset in the format load_dataset_csv reads"""
    csv_file = Path(csv_path)
    header = list(data.feature_names) + [label_column]
    if data.time_index is not None:
        header.append(Config.TIME_COLUMN)
    if data.latent_score is not None:
        header.append(Config.LATENT_COLUMN)

    with open(csv_file, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for i in range(data.n_rows):
            row = [Config.format_float(v) for v in data.features[i]]
            row.append(str(int(data.labels[i])))
            if data.time_index is not None:
                row.append(str(int(data.time_index[i])))
            if data.latent_score is not None:
                row.append(Config.format_float(data.latent_score[i]))
            writer.writerow(row)
    return csv_file


def write_stream_csv(stream: Stream, csv_path: Union[str, Path]) -> Path:
    """All batches of a stream in time order, with a `t` column"""
    return write_dataset_csv(stream.concat(), csv_path)


def _classifier_specs(parser: configparser.ConfigParser) -> List[ClassifierSpec]:
    specs = []
    for section in parser.sections():
        if not section.startswith(CLASSIFIER_SECTION_PREFIX):
            continue
        name = section[len(CLASSIFIER_SECTION_PREFIX):].strip()
        options = dict(parser[section])
        kind = options.pop('kind', None)
        specs.append(ClassifierSpec(name=name, kind=kind, fit=FitConfig(**options)))
    return specs


def load_experiment_config(config_path: Union[str, Path], seed: Optional[int] = None,
                           output_path: Optional[str] = None) -> ExperimentConfig:
    """Parse an INI recipe into a validated ExperimentConfig.

    `seed` and `output_path` override the file's values when given.
    """
    config_file = Path(config_path)
    if not config_file.exists():
        raise ConfigurationError(f"config file not found: {config_path}")

    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read(config_file, encoding='utf-8')
    except configparser.Error as e:
        raise ConfigurationError(f"{config_path}: {e}") from e
    if not parser.has_section('experiment'):
        raise ConfigurationError(f"{config_path}: missing [experiment] section")

    known = {'experiment', 'parameters'}
    for section in parser.sections():
        if section not in known and not section.startswith(CLASSIFIER_SECTION_PREFIX):
            raise ConfigurationError(f"{config_path}: unknown section [{section}]")

    settings: Dict = dict(parser['experiment'])
    if seed is not None:
        settings['seed'] = seed
    if output_path is not None:
        settings['output_path'] = output_path
    settings['parameters'] = dict(parser['parameters']) if parser.has_section('parameters') else {}

    try:
        settings['classifiers'] = _classifier_specs(parser)
        config = ExperimentConfig(**settings)
    except ValidationError as e:
        raise ConfigurationError(f"{config_path}: {e}") from e

    logger.debug(f"Loaded {config.kind} recipe from {config_file}")
    return config
