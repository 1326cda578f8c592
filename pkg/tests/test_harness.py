"""
Tests for recipes, dataset files, result files, the experiment runner and the CLI
"""
import logging
import os
import sys
import textwrap

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from illusion_lab.classifiers import fit_default
from illusion_lab.cli import main
from illusion_lab.config import Config
from illusion_lab.data_loader import (
    load_dataset_csv,
    load_experiment_config,
    write_dataset_csv,
    write_stream_csv,
)
from illusion_lab.dataset import Dataset
from illusion_lab.evalmetrics import EvalRecord
from illusion_lab.exceptions import ConfigurationError, IngestionError, UnsupportedClassError
from illusion_lab.orchestrator import ExperimentRunner, holdout_error, run_experiment
from illusion_lab.presets import drift_preset, gaussian_preset
from illusion_lab.results import ResultTable, read_results, render_results, write_results
from illusion_lab.rng import derive_seed, rng_for
from illusion_lab.schemas import FitConfig
from illusion_lab.synthdata import gen_gaussian_two_class, make_drift_stream

ROOT = os.path.abspath(os.path.join(os.path.dirname(__file__), '..'))


def shipped(name):
    return os.path.join(ROOT, 'configs', name)


@pytest.fixture
def write_recipe(tmp_path):
    """Write an INI recipe into the test directory and return its path"""
    def _write(text, name='recipe.ini'):
        path = tmp_path / name
        path.write_text(textwrap.dedent(text))
        return path
    return _write


@pytest.fixture
def label_noise_recipe():
    return """
        [experiment]
        kind = label-noise
        seed = 4
        replicates = 3
        workers = {workers}

        [parameters]
        preset = delta-2
        k = 3
        deltas = 0.2
        n = 2000
        learned = false
    """


class TestDatasetFiles:
    """Test cases for dataset CSV ingestion"""

    def test_label_mapping(self, tmp_path, caplog):
        """Test the first label seen becomes class 0 and the mapping is logged"""
        path = tmp_path / 'sonar.csv'
        path.write_text("a,b,class\n0.1,0.2,R\n0.3,0.4,M\n0.5,0.6,M\n")
        caplog.set_level(logging.INFO)
        data = load_dataset_csv(path, 'class')
        assert data.n_rows == 3
        assert data.n_features == 2
        assert data.feature_names == ('a', 'b')
        assert list(data.labels) == [0, 1, 1]
        assert data.class_names == ('R', 'M')
        assert 'R -> 0' in caplog.text

    def test_missing_cell(self, tmp_path):
        """Test an empty cell names its row and column"""
        path = tmp_path / 'data.csv'
        path.write_text("a,b,label\n1,2,x\n3,,y\n")
        with pytest.raises(IngestionError, match="row 2, column 'b'"):
            load_dataset_csv(path)

    def test_non_numeric(self, tmp_path):
        """Test a text feature cell is rejected"""
        path = tmp_path / 'data.csv'
        path.write_text("a,label\n1,x\nhigh,y\n")
        with pytest.raises(IngestionError, match='non-numeric'):
            load_dataset_csv(path)

    def test_fractional_time_step(self, tmp_path):
        """Test a non-integer step in the time column is rejected, not truncated"""
        path = tmp_path / 'data.csv'
        path.write_text("a,label,t\n1,x,1\n2,y,1.5\n")
        with pytest.raises(IngestionError, match="row 2, column 't'"):
            load_dataset_csv(path)

    def test_three_classes(self, tmp_path):
        """Test a label column with three values is unsupported"""
        path = tmp_path / 'data.csv'
        path.write_text("a,label\n1,x\n2,y\n3,z\n")
        with pytest.raises(UnsupportedClassError):
            load_dataset_csv(path)

    def test_missing_label_column(self, tmp_path):
        """Test the label column must be in the header"""
        path = tmp_path / 'data.csv'
        path.write_text("a,b\n1,2\n")
        with pytest.raises(IngestionError):
            load_dataset_csv(path)

    def test_missing_file(self, tmp_path):
        """Test a nonexistent path is an ingestion error"""
        with pytest.raises(IngestionError):
            load_dataset_csv(tmp_path / 'absent.csv')

    def test_written_dataset_reloads(self, tmp_path):
        """Test a written dataset reads back with the same values"""
        data = Dataset(
            features=rng_for(1).standard_normal((6, 2)),
            labels=np.array([0, 1, 1, 0, 1, 0]),
            latent_score=np.arange(6.0) / 3.0,
        )
        loaded = load_dataset_csv(write_dataset_csv(data, tmp_path / 'data.csv'))
        assert np.array_equal(loaded.features, data.features)
        assert np.array_equal(loaded.labels, data.labels)
        assert np.array_equal(loaded.latent_score, data.latent_score)

    def test_stream_file_keeps_time_index(self, tmp_path):
        """Test a stream file carries each row's step"""
        stream = make_drift_stream(drift_preset('stationary'), seed=2)
        loaded = load_dataset_csv(write_stream_csv(stream, tmp_path / 'stream.csv'))
        assert loaded.n_rows == 50 * 400
        assert np.array_equal(loaded.time_index, np.repeat(np.arange(1, 51), 400))


class TestRecipes:
    """Test cases for recipe loading and validation"""

    @pytest.mark.parametrize('name', [
        'variance_curves.ini',
        'flat_max.ini',
        'label_noise.ini',
        'diminishing_returns_tree.ini',
        'diminishing_returns_sonar.ini',
        'drift_replay.ini',
        'proportion.ini',
        'rank_disagreement.ini',
    ])
    def test_shipped_recipes_are_valid(self, name):
        """Test every shipped recipe validates"""
        config = load_experiment_config(shipped(name))
        assert config.parameters.kind == config.kind

    def test_overrides(self):
        """Test seed and output path overrides win over the file"""
        config = load_experiment_config(shipped('variance_curves.ini'), seed=42, output_path='elsewhere.csv')
        assert config.seed == 42
        assert config.output_path == 'elsewhere.csv'

    def test_classifier_sections(self):
        """Test classifier sections become named specs with their settings"""
        config = load_experiment_config(shipped('rank_disagreement.ini'))
        names = [spec.name for spec in config.classifiers]
        assert names == ['one-r', 'lda', 'tree', 'mlp']
        assert config.classifiers[2].fit.max_leaves == 8

    def test_unknown_section(self, write_recipe):
        """Test stray sections are rejected"""
        path = write_recipe("""
            [experiment]
            kind = proportion

            [extras]
            x = 1
        """)
        with pytest.raises(ConfigurationError):
            load_experiment_config(path)

    def test_unknown_key(self, write_recipe):
        """Test misspelt parameters are rejected"""
        path = write_recipe("""
            [experiment]
            kind = variance-curves

            [parameters]
            taus = 0.5
        """)
        with pytest.raises(ConfigurationError):
            load_experiment_config(path)

    def test_unknown_kind(self, write_recipe):
        """Test an unknown experiment kind is rejected"""
        path = write_recipe("""
            [experiment]
            kind = fourier
        """)
        with pytest.raises(ConfigurationError):
            load_experiment_config(path)

    def test_replicates_required_for_intervals(self, write_recipe):
        """Test interval-reporting kinds need at least two replicates"""
        path = write_recipe("""
            [experiment]
            kind = diminishing-returns
            replicates = 1
        """)
        with pytest.raises(ConfigurationError):
            load_experiment_config(path)

    def test_missing_file(self, tmp_path):
        """Test a missing recipe is a configuration error"""
        with pytest.raises(ConfigurationError):
            load_experiment_config(tmp_path / 'absent.ini')


class TestResultFiles:
    """Test cases for result tables on disk"""

    @pytest.fixture
    def table(self):
        return ResultTable(
            rows=[
                EvalRecord(1, 'error-rate', 0.1 + 0.2, 0.013, label='tree'),
                EvalRecord(2.5, 'brier', 1.0 / 3.0, label='lda, ridge'),
            ],
            metadata={'kind': 'proportion', 'seed': '3'},
        )

    def test_values_survive_reading(self, table, tmp_path):
        """Test written values read back bit-exactly"""
        loaded = read_results(write_results(table, tmp_path / 'out.csv'))
        assert loaded.metadata == table.metadata
        assert loaded.rows == table.rows

    def test_empty_table(self, tmp_path):
        """Test an empty table is metadata plus header"""
        path = write_results(ResultTable(metadata={'kind': 'flat-max'}), tmp_path / 'empty.csv')
        assert path.read_text() == "# kind: flat-max\nindex,metric,value,ci_half_width,label\n"

    def test_plain_format(self, table):
        """Test the plain format only drops the comment lines"""
        full = render_results(table, 'csv').splitlines()
        plain = render_results(table, 'plain').splitlines()
        assert plain == [line for line in full if not line.startswith('#')]

    def test_seventeen_digits(self, table):
        """Test floats are written with 17 significant digits"""
        assert '0.30000000000000004' in render_results(table)

    def test_bad_header(self, tmp_path):
        """Test a file without the result header is rejected"""
        path = tmp_path / 'bad.csv'
        path.write_text("a,b,c\n1,2,3\n")
        with pytest.raises(IngestionError):
            read_results(path)


class TestExperiments:
    """Test cases for each experiment kind"""

    def test_variance_curves(self):
        """Test every curve starts at 0.75 and the uncorrelated curve ends at d = 4"""
        table = run_experiment(load_experiment_config(shipped('variance_curves.ini')))
        variance = table.select('conditional-variance')
        starts = [r.value for r in variance if r.index == 1]
        assert len(starts) == 5
        assert starts == pytest.approx([0.75] * 5)
        uncorrelated = [r for r in variance if r.label == 'rho=0']
        assert [r.index for r in uncorrelated] == [1, 2, 3, 4]
        assert uncorrelated[-1].value == pytest.approx(0.0, abs=1e-12)
        assert table.metadata['kind'] == 'variance-curves'

    def test_proportion_survey(self):
        """Test the survey rows reproduce the proportion column"""
        table = run_experiment(load_experiment_config(shipped('proportion.ini')))
        values = [r.value for r in table.select('proportion')]
        expected = [0.907, 0.848, 0.947, 0.883, 0.889, 1.000, 0.946, 0.999, 1.000, 0.962]
        assert values == pytest.approx(expected, abs=0.001)
        assert table.rows[0].label == 'Segmentation'

    def test_proportion_inline_rows(self, write_recipe):
        """Test rows given in the recipe, names with spaces included"""
        path = write_recipe("""
            [experiment]
            kind = proportion

            [parameters]
            source = rows
            rows = Heart Cleveland 0.560 0.141 0.1410; Pima 0.350 0.221 0.1979
        """)
        table = run_experiment(load_experiment_config(path))
        assert [r.label for r in table.rows] == ['Heart Cleveland', 'Pima']
        assert table.rows[0].value == pytest.approx(1.0)

    def test_proportion_dataset(self, write_recipe):
        """Test default, lda and candidate errors plus the proportion row"""
        path = write_recipe("""
            [experiment]
            kind = proportion
            seed = 2

            [parameters]
            source = dataset
            preset = delta-2
            n = 400

            [classifier:tree]
            kind = tree
            max_leaves = 4
        """)
        table = run_experiment(load_experiment_config(path))
        assert [r.label for r in table.select('error-rate')] == ['default', 'lda', 'tree']
        assert table.select('proportion')[0].label == 'best=tree'

    def test_proportion_default_comparison(self, write_recipe):
        """Test the default candidates report LDA once, as the baseline"""
        path = write_recipe("""
            [experiment]
            kind = proportion
            seed = 2

            [parameters]
            source = dataset
            preset = delta-2
            n = 400
        """)
        table = run_experiment(load_experiment_config(path))
        assert [r.label for r in table.select('error-rate')] == ['default', 'lda', 'one-r', 'tree', 'mlp']
        assert [r.index for r in table.select('error-rate')] == [0, 1, 2, 3, 4]

    def test_proportion_without_signal(self, write_recipe, caplog):
        """Test a split where LDA trails the default rule gives NaN and a warning"""
        path = write_recipe("""
            [experiment]
            kind = proportion
            seed = 2

            [parameters]
            source = dataset
            preset = no-signal
            n = 200
        """)
        caplog.set_level(logging.WARNING)
        table = run_experiment(load_experiment_config(path))
        errors = {r.label: r.value for r in table.select('error-rate')}
        assert errors['lda'] > errors['default']
        assert np.isnan(table.select('proportion')[0].value)
        assert 'proportion undefined' in caplog.text

    def test_flat_max(self, write_recipe):
        """Test the bound is never violated"""
        path = write_recipe("""
            [experiment]
            kind = flat-max
            seed = 1

            [parameters]
            n_matrices = 3
            d_min = 2
            d_max = 5
            draws = 500
            rhos = 0.5
        """)
        table = run_experiment(load_experiment_config(path))
        assert len(table.rows) == 4 * 4
        assert all(r.value == 0 for r in table.select('violations'))
        first = {r.metric: r.value for r in table.rows if r.index == 1}
        assert first['row-minimum-mean'] == pytest.approx(0.5)
        assert first['min-correlation'] >= first['row-minimum-mean'] - 1e-9

    def test_label_noise(self, write_recipe, label_noise_recipe):
        """Test the corrected threshold matches the optimal rule and beats the naive one"""
        path = write_recipe(label_noise_recipe.format(workers=1))
        table = run_experiment(load_experiment_config(path))
        cost = {r.label: r for r in table.select('cost-weighted')}
        assert set(cost) == {'optimal', 'corrected', 'naive'}
        assert cost['corrected'].value == pytest.approx(cost['optimal'].value, abs=1e-9)
        assert cost['naive'].value > cost['corrected'].value
        assert table.select('cost-difference')[0].value > 0.0

    def test_label_noise_learned(self, write_recipe, label_noise_recipe):
        """Test LDA fitted on noisy labels costs less at the corrected threshold"""
        recipe = label_noise_recipe.format(workers=2).replace('learned = false', 'learned = true\n        design_n = 2000')
        table = run_experiment(load_experiment_config(write_recipe(recipe)))
        cost = {r.label: r.value for r in table.select('cost-weighted')}
        assert set(cost) == {'optimal', 'corrected', 'naive', 'lda-corrected', 'lda-naive'}
        assert cost['lda-corrected'] <= cost['lda-naive']

    def test_diminishing_returns_tree(self):
        """Test the first extra leaf buys more than any later one"""
        table = run_experiment(load_experiment_config(shipped('diminishing_returns_tree.ini')))
        errors = [r.value for r in table.select('error-rate')]
        assert len(errors) == 16
        drops = [a - b for a, b in zip(errors, errors[1:])]
        assert all(drops[0] > later for later in drops[1:])
        bayes = table.select('bayes-error')[0].value
        assert bayes == pytest.approx(0.15866, abs=1e-5)

    def test_diminishing_returns_mlp_baseline(self, tmp_path, write_recipe):
        """Test the 0-node level equals the design-majority error on each test half"""
        csv_path = write_dataset_csv(gen_gaussian_two_class(gaussian_preset('delta-2-prior-0.7'), 120, seed=8),
                                     tmp_path / 'data.csv')
        path = write_recipe(f"""
            [experiment]
            kind = diminishing-returns
            seed = 6
            replicates = 3

            [parameters]
            csv_path = {csv_path}
            family = mlp
            levels = 2

            [classifier:mlp]
            kind = mlp
            epochs = 10
        """)
        table = run_experiment(load_experiment_config(path))
        rows = table.select('error-rate')
        assert [r.index for r in rows] == [0, 2]
        data = load_dataset_csv(csv_path)
        expected = []
        for replicate in range(3):
            design, test = data.random_halves(rng_for(6, replicate))
            expected.append(holdout_error(fit_default(design), test))
        assert rows[0].value == pytest.approx(np.mean(expected), abs=1e-12)
        assert not table.select('bayes-error')

    def test_perceptron_seed_follows_experiment_seed(self, write_recipe):
        """Test initial perceptron weights change with the experiment seed"""
        path = write_recipe("""
            [experiment]
            kind = diminishing-returns
            seed = 6

            [parameters]
            family = mlp
            levels = 2

            [classifier:mlp]
            kind = mlp
            seed = 1
        """)
        config = load_experiment_config(path)
        first = ExperimentRunner(config)
        second = ExperimentRunner(config.model_copy(update={'seed': 7}))
        cfg = config.classifiers[0].fit
        assert first._level_config(cfg, 2, 0).seed == derive_seed(6, 0, 1)
        assert first._level_config(cfg, 2, 0).hidden_nodes == 2
        assert first._level_config(cfg, 2, 0).seed != second._level_config(cfg, 2, 0).seed
        assert first._level_config(cfg, 2, 0).seed != first._level_config(cfg, 2, 1).seed
        assert first._level_config(FitConfig(), 2, 0).seed != first._level_config(cfg, 2, 0).seed

    def test_drift_replay_crossing(self):
        """Test the tree wins early and LDA wins late on the calibrated scenario"""
        table = run_experiment(load_experiment_config(shipped('drift_replay.ini')))
        cost = {name: [r.value for r in table.select('cost-weighted', name)] for name in ('lda', 'tree')}
        assert len(cost['lda']) == 50
        assert np.mean(cost['tree'][:5]) < np.mean(cost['lda'][:5])
        assert np.mean(cost['lda'][-5:]) <= np.mean(cost['tree'][-5:])
        assert len(table.select('cost-weighted:lowess', 'lda')) == 50
        assert len(table.select('mann-kendall-p')) == 2

    def test_drift_replay_selection(self, write_recipe):
        """Test selected batches report their acceptance rates"""
        path = write_recipe("""
            [experiment]
            kind = drift-replay
            seed = 3

            [parameters]
            scenario = reject-inference
            design_steps = 5

            [classifier:lda]
            kind = lda
        """)
        table = run_experiment(load_experiment_config(path))
        rates = table.select('acceptance-rate')
        assert len(rates) == 50
        assert all(r.value < 1.0 for r in rates[:5])
        assert all(r.value == 1.0 for r in rates[5:])

    def test_drift_replay_stationary(self, write_recipe):
        """Test a drift-free stream shows no trend in the replayed cost"""
        path = write_recipe("""
            [experiment]
            kind = drift-replay
            seed = 3

            [parameters]
            scenario = stationary

            [classifier:lda]
            kind = lda
        """)
        table = run_experiment(load_experiment_config(path))
        assert len(table.select('cost-weighted', 'lda')) == 50
        assert table.select('mann-kendall-p', 'lda')[0].value > 0.01
        assert not table.select('acceptance-rate')

    def test_rank_disagreement(self, write_recipe):
        """Test rankings per metric and agreement per metric pair"""
        path = write_recipe("""
            [experiment]
            kind = rank-disagreement
            seed = 9
            replicates = 2

            [parameters]
            preset = delta-2-imbalanced
            n = 400

            [classifier:default]
            kind = default

            [classifier:lda]
            kind = lda

            [classifier:tree]
            kind = tree
            max_leaves = 4
        """)
        table = run_experiment(load_experiment_config(path))
        assert len(table.select('kendall-tau')) == 6
        ranks = {r.label: r.value for r in table.select('rank:error-rate')}
        assert sum(ranks.values()) == pytest.approx(6.0)
        assert ranks['default'] == 3.0
        auc = {r.label: r.value for r in table.select('auc')}
        assert auc['default'] == pytest.approx(0.5)

    def test_unknown_preset(self, write_recipe):
        """Test an unknown preset is a configuration error"""
        path = write_recipe("""
            [experiment]
            kind = rank-disagreement

            [parameters]
            preset = nope
        """)
        with pytest.raises(ConfigurationError):
            run_experiment(load_experiment_config(path))


class TestCLI:
    """Test cases for the command-line entry point"""

    def test_run_writes_results(self, tmp_path):
        """Test a run writes the result file and exits 0"""
        out = tmp_path / 'results' / 'curves.csv'
        code = main(['variance-curves', '--config', shipped('variance_curves.ini'), '--out', str(out), '--quiet'])
        assert code == Config.EXIT_OK
        table = read_results(out)
        assert table.metadata['kind'] == 'variance-curves'
        assert table.metadata['version'] == '0.1.0'

    def test_identical_runs_identical_bytes(self, tmp_path, write_recipe, label_noise_recipe):
        """Test repeated runs, serial or threaded, produce the same bytes"""
        serial = write_recipe(label_noise_recipe.format(workers=1), 'serial.ini')
        threaded = write_recipe(label_noise_recipe.format(workers=3), 'threaded.ini')
        outputs = []
        for recipe, name in ((serial, 'a.csv'), (serial, 'b.csv'), (threaded, 'c.csv')):
            out = tmp_path / name
            assert main(['label-noise', '--config', str(recipe), '--out', str(out), '--quiet']) == 0
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1] == outputs[2]

    def test_seed_override(self, tmp_path):
        """Test --seed is recorded in the metadata"""
        out = tmp_path / 'p.csv'
        main(['proportion', '--config', shipped('proportion.ini'), '--out', str(out), '--seed', '17', '--quiet'])
        assert read_results(out).metadata['seed'] == '17'

    def test_stdout_plain(self, write_recipe, capsys):
        """Test without an output path results go to stdout"""
        path = write_recipe("""
            [experiment]
            kind = proportion

            [parameters]
            rows = A 0.75 0.5 0.25
        """)
        assert main(['proportion', '--config', str(path), '--format', 'plain', '--quiet']) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == 'index,metric,value,ci_half_width,label'
        assert lines[1] == '1,proportion,0.5,0,A'

    def test_validate_config(self):
        """Test validate-config accepts a shipped recipe"""
        assert main(['validate-config', '--config', shipped('drift_replay.ini'), '--quiet']) == Config.EXIT_OK

    def test_kind_mismatch(self):
        """Test running a recipe under the wrong subcommand exits 2"""
        assert main(['flat-max', '--config', shipped('proportion.ini'), '--quiet']) == Config.EXIT_CONFIGURATION

    def test_missing_config(self, tmp_path):
        """Test a missing recipe exits 2"""
        assert main(['proportion', '--config', str(tmp_path / 'none.ini'), '--quiet']) == Config.EXIT_CONFIGURATION

    def test_missing_dataset(self, tmp_path, write_recipe):
        """Test an unreadable dataset exits 3"""
        path = write_recipe(f"""
            [experiment]
            kind = diminishing-returns
            replicates = 2

            [parameters]
            csv_path = {tmp_path / 'absent.csv'}
        """)
        assert main(['diminishing-returns', '--config', str(path), '--quiet']) == Config.EXIT_INGESTION

    def test_invalid_computation(self, write_recipe):
        """Test a library error during a run exits 1"""
        path = write_recipe("""
            [experiment]
            kind = proportion

            [parameters]
            rows = Broken 0.3 0.2 0.3
        """)
        assert main(['proportion', '--config', str(path), '--quiet']) == Config.EXIT_FAILURE
