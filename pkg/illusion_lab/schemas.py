from typing import Dict, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ClassifierKind = Literal['default', 'one-r', 'lda', 'tree', 'mlp']
MetricName = Literal['error-rate', 'cost-weighted', 'brier', 'auc']
ExperimentKind = Literal[
    'variance-curves',
    'flat-max',
    'label-noise',
    'diminishing-returns',
    'drift-replay',
    'proportion',
    'rank-disagreement',
]
EXPERIMENT_KINDS = (
    'variance-curves',
    'flat-max',
    'label-noise',
    'diminishing-returns',
    'drift-replay',
    'proportion',
    'rank-disagreement',
)


def _split_list(value):
    if isinstance(value, str):
        return [item.strip() for item in value.split(',') if item.strip()]
    return value


# Classifier Schemas
class FitConfig(BaseModel):
    """Settings shared by every classifier fit"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    seed: int = Field(default=0, ge=0)
    ridge: float = Field(default=0.0, ge=0.0)
    min_leaf: int = Field(default=1, ge=1)
    max_leaves: int = Field(default=16, ge=1)
    hidden_nodes: int = Field(default=3, ge=0)
    epochs: int = Field(default=500, ge=1)
    learning_rate: float = 0.1  # sign checked by fit_mlp
    bins: int = Field(default=6, ge=2)


class ClassifierSpec(BaseModel):
    """A named classifier entry of an experiment"""
    model_config = ConfigDict(frozen=True, extra='forbid')

    name: str
    kind: ClassifierKind
    fit: FitConfig = FitConfig()


# Parameter blocks, one per experiment kind
class VarianceCurvesParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['variance-curves'] = 'variance-curves'
    tau: float = Field(default=0.5, ge=0.0, le=1.0)
    rhos: List[float] = [0.0, 0.3, 0.5, 0.7, 0.9]
    d_max: int = Field(default=10, ge=1)

    @field_validator('rhos', mode='before')
    @classmethod
    def split_rhos(cls, value):
        return _split_list(value)


class FlatMaxParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['flat-max'] = 'flat-max'
    n_matrices: int = Field(default=50, ge=1)
    d_min: int = Field(default=2, ge=1)
    d_max: int = Field(default=8, ge=1)
    draws: int = Field(default=10000, ge=1)
    rhos: List[float] = []  # extra equicorrelated matrices, evaluated first

    @field_validator('rhos', mode='before')
    @classmethod
    def split_rhos(cls, value):
        return _split_list(value)

    @model_validator(mode='after')
    def check_range(self):
        if self.d_min > self.d_max:
            raise ValueError('d_min must not exceed d_max')
        return self


class DataSourceParams(BaseModel):
    """Either a named Gaussian preset sampled with n rows, or a dataset CSV"""
    model_config = ConfigDict(extra='forbid')

    preset: Optional[str] = 'delta-2'
    n: int = Field(default=400, ge=2)
    csv_path: Optional[str] = None
    label_column: str = 'label'


class LabelNoiseParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['label-noise'] = 'label-noise'
    preset: str = 'delta-2'
    k: float = Field(default=3.0, gt=0.0)
    deltas: List[float] = [0.05, 0.1, 0.2]
    n: int = Field(default=10000, ge=2)
    learned: bool = True
    design_n: int = Field(default=2000, ge=4)

    @field_validator('deltas', mode='before')
    @classmethod
    def split_deltas(cls, value):
        return _split_list(value)

    @field_validator('deltas')
    @classmethod
    def check_deltas(cls, value: List[float]) -> List[float]:
        for delta in value:
            if not 0.0 <= delta < 0.5:
                raise ValueError(f'delta must lie in [0, 0.5), got {delta}')
        return value


class DiminishingReturnsParams(DataSourceParams):
    kind: Literal['diminishing-returns'] = 'diminishing-returns'
    family: Literal['tree', 'mlp'] = 'tree'
    levels: List[int] = list(range(1, 17))

    @field_validator('levels', mode='before')
    @classmethod
    def split_levels(cls, value):
        return _split_list(value)


class DriftReplayParams(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: Literal['drift-replay'] = 'drift-replay'
    scenario: str = 'tree-lda-crossing'
    design_steps: int = Field(default=5, ge=1)
    span: float = Field(default=0.3, gt=0.0, le=1.0)


class ProportionParams(DataSourceParams):
    kind: Literal['proportion'] = 'proportion'
    source: Literal['rows', 'dataset'] = 'rows'
    survey: Optional[str] = 'literature-survey'
    rows: List[str] = []  # "name m0 mL mT" entries separated by ';'

    @field_validator('rows', mode='before')
    @classmethod
    def split_rows(cls, value):
        if isinstance(value, str):
            return [item.strip() for item in value.split(';') if item.strip()]
        return value


class RankDisagreementParams(DataSourceParams):
    kind: Literal['rank-disagreement'] = 'rank-disagreement'
    preset: Optional[str] = 'delta-2-imbalanced'
    n: int = Field(default=2000, ge=2)
    metrics: List[MetricName] = ['error-rate', 'cost-weighted', 'brier', 'auc']
    cost_ratio: Optional[float] = Field(default=None, gt=0.0)

    @field_validator('metrics', mode='before')
    @classmethod
    def split_metrics(cls, value):
        return _split_list(value)


ParameterBlock = Union[
    VarianceCurvesParams,
    FlatMaxParams,
    LabelNoiseParams,
    DiminishingReturnsParams,
    DriftReplayParams,
    ProportionParams,
    RankDisagreementParams,
]


# Experiment Schemas
class ExperimentConfig(BaseModel):
    """One experiment recipe"""
    model_config = ConfigDict(extra='forbid')

    kind: ExperimentKind
    seed: int = Field(default=0, ge=0)
    replicates: int = Field(default=1, ge=1)
    workers: int = Field(default=1, ge=1)
    output_path: Optional[str] = None
    model_dir: Optional[str] = None
    parameters: ParameterBlock = Field(discriminator='kind')
    classifiers: List[ClassifierSpec] = []

    @model_validator(mode='before')
    @classmethod
    def tag_parameters(cls, data):
        if isinstance(data, dict):
            params = dict(data.get('parameters') or {})
            params.setdefault('kind', data.get('kind'))
            data = {**data, 'parameters': params}
        return data

    @model_validator(mode='after')
    def check_consistency(self):
        if self.parameters.kind != self.kind:
            raise ValueError(f'parameter block is for {self.parameters.kind}, experiment is {self.kind}')
        names = [c.name for c in self.classifiers]
        if len(set(names)) != len(names):
            raise ValueError('classifier names must be unique')
        if self.kind == 'diminishing-returns' and self.replicates < 2:
            raise ValueError('diminishing-returns reports confidence intervals and needs replicates >= 2')
        if self.kind == 'label-noise' and self.replicates < 2:
            raise ValueError('label-noise reports confidence intervals and needs replicates >= 2')
        return self

    def canonical(self) -> Dict:
        """Settings that determine the output bytes (output_path excluded)"""
        return self.model_dump(mode='json', exclude={'output_path', 'model_dir', 'workers'})
