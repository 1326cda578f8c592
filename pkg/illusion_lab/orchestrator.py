"""Experiment runner: one handler per experiment kind, replicates in parallel"""
import asyncio
import logging
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Dict, List, Sequence, Tuple

import numpy as np

from . import analytic
from .analytic import EquicorrSpec, NoiseModel
from .classifiers import (
    ClassifierModel,
    fit_classifier,
    fit_default,
    fit_lda,
    fit_mlp,
    fit_tree_path,
    predict_scores,
)
from .classifiers.serialization import write_model
from .data_loader import load_dataset_csv
from .dataset import Dataset
from .evalmetrics import (
    EvalRecord,
    MetricKind,
    bayes_error_gaussian,
    confidence_interval,
    evaluate,
    mann_kendall,
    proportion_achievable,
    rank_methods,
    ranking_agreement,
    smooth_records,
    temporal_evaluate,
)
from .exceptions import ConfigurationError, ConstraintError, ValidityError
from .logging_config import ExperimentLogger
from .presets import CROSSING_TREE, drift_preset, gaussian_preset, survey_rows
from .results import ResultTable, table_metadata
from .rng import derive_seed, rng_for
from .schemas import ClassifierSpec, DataSourceParams, ExperimentConfig, FitConfig
from .synthdata import (
    class1_posterior,
    gen_gaussian_two_class,
    inject_label_noise,
    make_drift_stream,
    random_nonnegative_correlation,
)

logger = logging.getLogger(__name__)

DEFAULT_COMPARISON = (
    ClassifierSpec(name='one-r', kind='one-r'),
    ClassifierSpec(name='lda', kind='lda'),
    ClassifierSpec(name='tree', kind='tree', fit=FitConfig(max_leaves=8, min_leaf=5)),
    ClassifierSpec(name='mlp', kind='mlp'),
)
DEFAULT_DRIFT_COMPARISON = (
    ClassifierSpec(name='lda', kind='lda'),
    ClassifierSpec(name='tree', kind='tree', fit=FitConfig(**CROSSING_TREE)),
)

# label-noise substreams under (seed, replicate)
TEST_DATA, DESIGN_DATA, DESIGN_NOISE = 0, 1, 2


def holdout_error(model: ClassifierModel, test: Dataset) -> float:
    return evaluate(MetricKind('error-rate'), predict_scores(model, test.features), test.labels)


def _parse_survey_row(text: str) -> Tuple[str, float, float, float]:
    parts = text.rsplit(maxsplit=3)
    if len(parts) != 4:
        raise ConfigurationError(f"proportion row '{text}' must read 'name m0 mL mT'")
    try:
        return parts[0], float(parts[1]), float(parts[2]), float(parts[3])
    except ValueError as e:
        raise ConfigurationError(f"proportion row '{text}': {e}") from e


class ExperimentRunner:
    """Runs one experiment recipe and collects its result rows"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.params = config.parameters
        self.seed = config.seed

    def load_data(self, params: DataSourceParams) -> Dataset:
        """Dataset CSV when csv_path is set, otherwise a sample of the named preset"""
        if params.csv_path:
            return load_dataset_csv(params.csv_path, params.label_column)
        if not params.preset:
            raise ConfigurationError("either csv_path or preset must be set")
        return gen_gaussian_two_class(gaussian_preset(params.preset), params.n, self.seed)

    async def _gather(self, work: Callable, items: Sequence) -> List:
        """Run work(item) for every item on the worker pool; results in item order"""
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            return await asyncio.gather(*(loop.run_in_executor(pool, work, item) for item in items))

    def _save_model(self, name: str, model: ClassifierModel) -> None:
        if self.config.model_dir:
            path = write_model(model, Path(self.config.model_dir) / f"{name}.model")
            logger.info(f"  Model: {path}")

    async def run(self) -> ResultTable:
        handlers: Dict[str, Callable] = {
            'variance-curves': self.variance_curves,
            'flat-max': self.flat_max,
            'label-noise': self.label_noise,
            'diminishing-returns': self.diminishing_returns,
            'drift-replay': self.drift_replay,
            'proportion': self.proportion,
            'rank-disagreement': self.rank_disagreement,
        }
        if self.config.kind not in handlers:
            raise ConfigurationError(f"unknown experiment kind '{self.config.kind}'")
        with ExperimentLogger(self.config.kind, self.seed, self.config.replicates) as experiment:
            rows = await handlers[self.config.kind]()
            experiment.record_rows(len(rows))
        return ResultTable(rows=rows, metadata=table_metadata(self.config))

    # variance-curves
    async def variance_curves(self) -> List[EvalRecord]:
        p = self.params
        rows = []
        for rho in p.rhos:
            label = f"rho={rho:g}"
            for d in range(1, p.d_max + 1):
                try:
                    spec = EquicorrSpec(d=d, rho=rho, tau=p.tau)
                except (ConstraintError, ValidityError) as e:
                    logger.debug(f"skipping d={d}, {label}: {e}")
                    continue
                rows.append(EvalRecord(d, 'conditional-variance', analytic.conditional_variance(spec), label=label))
                if d < p.d_max:
                    try:
                        spec.at(d + 1)
                    except (ConstraintError, ValidityError):
                        continue
                    rows.append(EvalRecord(d + 1, 'variance-reduction', analytic.variance_reduction(spec), label=label))
        return rows

    # flat-max
    def _flat_max_matrix(self, index: int) -> Tuple[str, analytic.CorrMatrix, analytic.FlatMaximumCheck]:
        p = self.params
        rng = rng_for(self.seed, index)
        if index < len(p.rhos):
            rho = p.rhos[index]
            corr = analytic.CorrMatrix.equicorrelated(p.d_max, rho)
            label = f"equicorrelated d={p.d_max} rho={rho:g}"
        else:
            d = int(rng.integers(p.d_min, p.d_max + 1))
            corr = random_nonnegative_correlation(d, rng)
            label = f"random d={d}"
        return label, corr, analytic.flat_maximum_monte_carlo(corr, p.draws, rng)

    async def flat_max(self) -> List[EvalRecord]:
        p = self.params
        results = await self._gather(self._flat_max_matrix, range(len(p.rhos) + p.n_matrices))
        rows = []
        for index, (label, corr, check) in enumerate(results, start=1):
            bound = analytic.flat_maximum_bound(corr)
            rows.extend([
                EvalRecord(index, 'row-minimum-mean', bound.row_minimum_mean, label=label),
                EvalRecord(index, 'smallest-row-average', bound.smallest_row_average, label=label),
                EvalRecord(index, 'min-correlation', check.min_correlation, label=label),
                EvalRecord(index, 'violations', check.violations, label=label),
            ])
        violations = sum(check.violations for _, _, check in results)
        if violations:
            logger.warning(f"flat-maximum bound violated {violations} times")
        return rows

    # label-noise
    def _label_noise_replicate(self, replicate: int) -> Dict[str, List[float]]:
        p = self.params
        spec = gaussian_preset(p.preset)
        test = gen_gaussian_two_class(spec, p.n, derive_seed(self.seed, replicate, TEST_DATA))
        posterior = class1_posterior(spec, test.features)
        cost = MetricKind('cost-weighted', p.k)
        design = gen_gaussian_two_class(spec, p.design_n, derive_seed(self.seed, replicate, DESIGN_DATA)) \
            if p.learned else None

        costs: Dict[str, List[float]] = {}
        for position, delta in enumerate(p.deltas):
            noise = NoiseModel(delta)
            k_star = analytic.corrected_threshold(p.k, noise)
            apparent = analytic.noisy_posterior(posterior, noise)
            values = {
                'optimal': evaluate(cost, posterior, test.labels, p.k),
                'corrected': evaluate(cost, apparent, test.labels, k_star),
                'naive': evaluate(cost, apparent, test.labels, p.k),
            }
            if design is not None:
                noisy = inject_label_noise(design, delta, derive_seed(self.seed, replicate, DESIGN_NOISE, position))
                scores = predict_scores(fit_lda(noisy), test.features)
                values['lda-corrected'] = evaluate(cost, scores, test.labels, k_star)
                values['lda-naive'] = evaluate(cost, scores, test.labels, p.k)
            for name, value in values.items():
                costs.setdefault(name, []).append(value)
        return costs

    async def label_noise(self) -> List[EvalRecord]:
        p = self.params
        replicates = await self._gather(self._label_noise_replicate, range(self.config.replicates))
        rows = []
        for position, delta in enumerate(p.deltas):
            per_rule = {name: [r[name][position] for r in replicates] for name in replicates[0]}
            for name, values in per_rule.items():
                mean, half_width = confidence_interval(values)
                rows.append(EvalRecord(delta, 'cost-weighted', mean, half_width, label=name))
            gap = np.array(per_rule['naive']) - np.array(per_rule['corrected'])
            mean, half_width = confidence_interval(gap)
            rows.append(EvalRecord(delta, 'cost-difference', mean, half_width, label='naive-minus-corrected'))
        return rows

    # diminishing-returns
    def _family_config(self) -> FitConfig:
        family = self.params.family
        for spec in self.config.classifiers:
            if spec.kind == family:
                return spec.fit
        return FitConfig()

    def _complexity_replicate(self, data: Dataset, replicate: int) -> List[float]:
        p = self.params
        design, test = data.random_halves(rng_for(self.seed, replicate))
        cfg = self._family_config()
        if p.family == 'tree':
            return [holdout_error(model, test) for model in fit_tree_path(design, cfg, p.levels)]
        return [holdout_error(fit_mlp(design, self._level_config(cfg, hidden, replicate)), test)
                for hidden in self._mlp_levels()]

    def _level_config(self, cfg: FitConfig, hidden: int, replicate: int) -> FitConfig:
        """Perceptron settings for one sweep level; initial weights follow the experiment seed"""
        return cfg.model_copy(update={'hidden_nodes': hidden, 'seed': derive_seed(self.seed, replicate, cfg.seed)})

    def _mlp_levels(self) -> List[int]:
        levels = list(self.params.levels)
        return levels if 0 in levels else [0] + levels

    async def diminishing_returns(self) -> List[EvalRecord]:
        p = self.params
        data = self.load_data(p)
        levels = p.levels if p.family == 'tree' else self._mlp_levels()
        replicates = await self._gather(
            lambda replicate: self._complexity_replicate(data, replicate), range(self.config.replicates)
        )
        errors = np.array(replicates)
        rows = []
        for column, level in enumerate(levels):
            mean, half_width = confidence_interval(errors[:, column])
            rows.append(EvalRecord(level, 'error-rate', mean, half_width, label=p.family))
        if not p.csv_path:
            spec = gaussian_preset(p.preset)
            if spec.sigma1 is None:
                rows.append(EvalRecord(0, 'bayes-error', bayes_error_gaussian(spec), label='bayes'))
        return rows

    # drift-replay
    async def drift_replay(self) -> List[EvalRecord]:
        p = self.params
        stream = make_drift_stream(drift_preset(p.scenario), self.seed)
        design, evaluation = stream.replay_split(p.design_steps)
        cost = MetricKind.balanced_cost(design.labels)
        threshold = float(cost.cost_ratio)
        logger.info(f"  Design set: {design.n_rows} rows from steps 1..{p.design_steps}; c0/c1 = {threshold:.6g}")
        specs = self.config.classifiers or list(DEFAULT_DRIFT_COMPARISON)

        def replay(spec: ClassifierSpec) -> List[EvalRecord]:
            model = fit_classifier(spec.kind, design, spec.fit)
            self._save_model(spec.name, model)
            raw = temporal_evaluate(model, evaluation, cost, threshold, label=spec.name)
            trend = mann_kendall([r.value for r in raw])
            return raw + smooth_records(raw, p.span) + [
                EvalRecord(0, 'mann-kendall-tau', trend.tau, label=spec.name),
                EvalRecord(0, 'mann-kendall-p', trend.p_value, label=spec.name),
            ]

        rows = [row for rows in await self._gather(replay, specs) for row in rows]
        if any(rate < 1.0 for rate in stream.acceptance_rates):
            rows.extend(
                EvalRecord(t, 'acceptance-rate', rate, label='selection')
                for t, rate in zip(stream.steps, stream.acceptance_rates)
            )
        return rows

    # proportion
    async def proportion(self) -> List[EvalRecord]:
        p = self.params
        if p.source == 'rows':
            entries = [_parse_survey_row(row) for row in p.rows] if p.rows else survey_rows(p.survey)
            return [
                EvalRecord(index, 'proportion', proportion_achievable(m0, m_simple, m_best), label=name)
                for index, (name, m0, m_simple, m_best) in enumerate(entries, start=1)
            ]

        data = self.load_data(p)
        design, test = data.random_halves(rng_for(self.seed, 0))
        specs = self.config.classifiers or list(DEFAULT_COMPARISON)
        m0 = holdout_error(fit_default(design), test)
        lda = fit_lda(design)
        self._save_model('lda', lda)
        m_simple = holdout_error(lda, test)
        errors = {}
        reused = None
        for spec in specs:
            if spec.name == 'lda' and spec.kind == 'lda' and spec.fit == FitConfig():
                # the baseline fit already is this candidate
                errors[spec.name] = m_simple
                reused = spec.name
                continue
            model = fit_classifier(spec.kind, design, spec.fit)
            self._save_model(spec.name, model)
            errors[spec.name] = holdout_error(model, test)
        best = min(errors, key=errors.get)
        rows = [
            EvalRecord(0, 'error-rate', m0, label='default'),
            EvalRecord(1, 'error-rate', m_simple, label='lda'),
        ]
        candidates = [(name, error) for name, error in errors.items() if name != reused]
        rows.extend(EvalRecord(i, 'error-rate', e, label=n) for i, (n, e) in enumerate(candidates, start=2))

        m_best = errors[best]
        if m0 > m_best and m_simple <= m0:
            proportion = proportion_achievable(m0, m_simple, m_best)
        else:
            logger.warning(
                f"proportion undefined on this split: m0={m0:.6g}, mL={m_simple:.6g}, mT={m_best:.6g} ({best})"
            )
            proportion = float('nan')
        rows.append(EvalRecord(0, 'proportion', proportion, label=f"best={best}"))
        return rows

    # rank-disagreement
    def _metric_kinds(self, labels: np.ndarray) -> List[Tuple[MetricKind, float]]:
        p = self.params
        kinds = []
        for name in p.metrics:
            if name == 'cost-weighted':
                metric = MetricKind(name, p.cost_ratio) if p.cost_ratio else MetricKind.balanced_cost(labels)
                kinds.append((metric, float(metric.cost_ratio)))
            else:
                kinds.append((MetricKind(name), 1.0))
        return kinds

    def _rank_replicate(self, data: Dataset, replicate: int) -> Dict[str, Dict[str, float]]:
        design, test = data.random_halves(rng_for(self.seed, replicate))
        metrics = self._metric_kinds(design.labels)
        values: Dict[str, Dict[str, float]] = {metric.name: {} for metric, _ in metrics}
        for spec in self.config.classifiers or DEFAULT_COMPARISON:
            model = fit_classifier(spec.kind, design, spec.fit)
            if replicate == 0:
                self._save_model(spec.name, model)
            scores = predict_scores(model, test.features)
            for metric, threshold in metrics:
                values[metric.name][spec.name] = evaluate(metric, scores, test.labels, threshold)
        return values

    async def rank_disagreement(self) -> List[EvalRecord]:
        data = self.load_data(self.params)
        replicates = await self._gather(
            lambda replicate: self._rank_replicate(data, replicate), range(self.config.replicates)
        )
        rows = []
        rankings = {}
        for metric, by_method in replicates[0].items():
            means = {}
            for index, method in enumerate(by_method, start=1):
                values = [r[metric][method] for r in replicates]
                mean, half_width = confidence_interval(values) if len(values) > 1 else (values[0], 0.0)
                means[method] = mean
                rows.append(EvalRecord(index, metric, mean, half_width, label=method))
            rankings[metric] = rank_methods(means, metric)
            rows.extend(
                EvalRecord(index, f"rank:{metric}", rank, label=method)
                for index, (method, rank) in enumerate(rankings[metric].items(), start=1)
            )
        for index, (first, second, tau) in enumerate(ranking_agreement(rankings), start=1):
            rows.append(EvalRecord(index, 'kendall-tau', tau, label=f"{first}|{second}"))
        return rows

    def print_summary(self, table: ResultTable, out=None) -> None:
        """Print a short human-readable digest of a result table"""
        lines = ["=" * 80, f"{self.config.kind.upper()} (seed={self.seed})", "=" * 80]
        metrics: Dict[str, int] = {}
        for row in table.rows:
            metrics[row.metric] = metrics.get(row.metric, 0) + 1
        for metric, count in metrics.items():
            lines.append(f"   {metric}: {count} rows")
        lines.append("=" * 80)
        print('\n'.join(lines), file=out)


def run_experiment(config: ExperimentConfig) -> ResultTable:
    """Run a recipe to completion; output depends only on (config, seed, version)"""
    return asyncio.run(ExperimentRunner(config).run())

