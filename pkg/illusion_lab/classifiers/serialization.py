"""Versioned text form of fitted models.

    illusion-lab-model 1
    kind tree
    complexity 3
    n_features 2
    feature_names ["x1", "x2"]
    param <name> <float64|int64> <shape, comma separated>
    <values, space separated, 17 significant digits>
    ...

Diagnostics are not written.
"""
import json
from pathlib import Path
from typing import Union

import numpy as np

from ..config import Config
from ..exceptions import IngestionError
from .base_classifier import ClassifierModel


def _format_values(array: np.ndarray) -> str:
    flat = array.ravel()
    if array.dtype.kind in 'iu':
        return ' '.join(str(int(v)) for v in flat)
    return ' '.join(Config.format_float(v) for v in flat)


def dumps_model(model: ClassifierModel) -> str:
    lines = [
        f"{Config.MODEL_FORMAT_TAG} {Config.MODEL_FORMAT_VERSION}",
        f"kind {model.kind}",
        f"complexity {model.complexity}",
        f"n_features {model.n_features}",
        f"feature_names {json.dumps(list(model.feature_names))}",
    ]
    for name in sorted(model.parameters):
        array = model.parameters[name]
        dtype = 'int64' if array.dtype.kind in 'iu' else 'float64'
        shape = ','.join(str(dim) for dim in array.shape)
        lines.append(f"param {name} {dtype} {shape}")
        lines.append(_format_values(array.astype(dtype)))
    return '\n'.join(lines) + '\n'


def _field(line: str, key: str) -> str:
    head, _, rest = line.partition(' ')
    if head != key:
        raise IngestionError(f"model file: expected '{key}', got '{line[:40]}'")
    return rest


def loads_model(text: str) -> ClassifierModel:
    lines = text.splitlines()
    if len(lines) < 5:
        raise IngestionError("model file is truncated")
    header = lines[0].split()
    if header != [Config.MODEL_FORMAT_TAG, str(Config.MODEL_FORMAT_VERSION)]:
        raise IngestionError(f"unsupported model format header '{lines[0]}'")

    kind = _field(lines[1], 'kind')
    complexity = int(_field(lines[2], 'complexity'))
    n_features = int(_field(lines[3], 'n_features'))
    feature_names = tuple(json.loads(_field(lines[4], 'feature_names')))

    parameters = {}
    body = lines[5:]
    if len(body) % 2:
        raise IngestionError("model file has a parameter header without values")
    for header_line, value_line in zip(body[0::2], body[1::2]):
        name, dtype, shape_text = _field(header_line, 'param').split(' ')
        shape = tuple(int(dim) for dim in shape_text.split(',') if dim)
        values = np.array(value_line.split(), dtype=np.float64 if dtype == 'float64' else np.int64)
        try:
            parameters[name] = values.reshape(shape)
        except ValueError as e:
            raise IngestionError(f"parameter {name}: {values.size} values do not fit shape {shape}") from e

    return ClassifierModel(
        kind=kind,
        parameters=parameters,
        complexity=complexity,
        n_features=n_features,
        feature_names=feature_names,
    )


def write_model(model: ClassifierModel, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps_model(model))
    return path


def read_model(path: Union[str, Path]) -> ClassifierModel:
    return loads_model(Path(path).read_text())
