"""
Unit tests for the seeded data generators
"""
import os
import sys

import numpy as np
import pytest
from scipy import stats

# Add parent directory to path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))

from illusion_lab.analytic import EquicorrSpec, build_equicorr_sigma, conditional_variance
from illusion_lab.dataset import Dataset
from illusion_lab.exceptions import (
    ConfigurationError,
    ConstraintError,
    DegenerateInputError,
    PreconditionError,
    ShapeError,
    ValidityError,
)
from illusion_lab.presets import drift_preset, gaussian_preset
from illusion_lab.rng import derive_seed, rng_for
from illusion_lab.synthdata import (
    DriftScenario,
    GaussianClassSpec,
    apply_class_redefinition,
    apply_selection_filter,
    class1_posterior,
    gen_equicorr_samples,
    gen_gaussian_two_class,
    inject_label_noise,
    label_flip_mask,
    make_drift_stream,
    random_nonnegative_correlation,
    sampling_factor,
)


@pytest.fixture
def spec():
    return gaussian_preset('delta-2')


@pytest.fixture
def small_scenario(spec):
    """Stationary five-step scenario with small batches"""
    return DriftScenario(base=spec, steps=5, batch_size=50)


class TestRandomStreams:
    """Test cases for seeded substreams"""

    def test_same_key_same_draws(self):
        """Test a (seed, key) pair always yields the same numbers"""
        assert np.array_equal(rng_for(7, 3).random(5), rng_for(7, 3).random(5))

    def test_keys_are_independent(self):
        """Test different keys give different streams"""
        assert not np.array_equal(rng_for(7, 3).random(5), rng_for(7, 4).random(5))
        assert derive_seed(7, 1) != derive_seed(7, 2)


class TestGaussianClassSpec:
    """Test cases for GaussianClassSpec validation"""

    def test_prior_range(self):
        """Test prior1 must lie strictly inside (0, 1)"""
        with pytest.raises(ConstraintError):
            GaussianClassSpec(mu0=[0.0], mu1=[1.0], sigma=[[1.0]], prior1=1.0)

    def test_mean_lengths(self):
        """Test class means must have equal length"""
        with pytest.raises(ShapeError):
            GaussianClassSpec(mu0=[0.0, 0.0], mu1=[1.0], sigma=np.eye(2), prior1=0.5)

    def test_covariance_must_be_positive_definite(self):
        """Test a singular covariance is a validity error"""
        with pytest.raises(ValidityError):
            GaussianClassSpec(mu0=[0.0, 0.0], mu1=[1.0, 0.0], sigma=np.ones((2, 2)), prior1=0.5)

    def test_mahalanobis(self, spec):
        """Test the preset means are two units apart"""
        assert spec.mahalanobis == pytest.approx(2.0)
        assert np.allclose(spec.direction, [2.0, 0.0])

    def test_posterior_needs_shared_covariance(self):
        """Test the linear posterior is refused when class 1 has its own covariance"""
        spec = GaussianClassSpec(mu0=[0.0], mu1=[1.0], sigma=[[1.0]], sigma1=[[4.0]], prior1=0.5)
        with pytest.raises(PreconditionError):
            class1_posterior(spec, [[0.0]])

    def test_posterior_at_midpoint(self, spec):
        """Test equal priors give posterior 0.5 halfway between the means"""
        assert class1_posterior(spec, [[1.0, 3.0]])[0] == pytest.approx(0.5)


class TestGenerators:
    """Test cases for equicorrelated and two-class samples"""

    def test_sampling_factor_singular(self):
        """Test a singular PSD matrix still factors"""
        sigma = np.ones((2, 2))
        factor = sampling_factor(sigma)
        assert np.allclose(factor @ factor.T, sigma)

    def test_equicorr_moments(self):
        """Test sample correlations match the specified matrix"""
        spec = EquicorrSpec(d=2, rho=0.5, tau=0.5)
        data = gen_equicorr_samples(spec, 100000, seed=1)
        assert data.feature_names == ('x1', 'x2', 'response')
        sample = np.corrcoef(data.features, rowvar=False)
        assert np.allclose(sample, build_equicorr_sigma(spec), atol=0.02)

    def test_equicorr_residual_variance(self):
        """Test the least-squares residual variance of the response matches V(d)"""
        spec = EquicorrSpec(d=2, rho=0.5, tau=0.5)
        data = gen_equicorr_samples(spec, 100000, seed=1)
        design = np.column_stack([np.ones(data.n_rows), data.features[:, :2]])
        response = data.features[:, 2]
        coef, _, _, _ = np.linalg.lstsq(design, response, rcond=None)
        residual = response - design @ coef
        assert conditional_variance(spec) == pytest.approx(2.0 / 3.0)
        assert np.var(residual) == pytest.approx(conditional_variance(spec), abs=0.02)

    def test_equicorr_deterministic(self):
        """Test the same seed gives the same sample"""
        spec = EquicorrSpec(d=3, rho=0.2, tau=0.3)
        assert np.array_equal(gen_equicorr_samples(spec, 50, 4).features, gen_equicorr_samples(spec, 50, 4).features)

    def test_two_class_deterministic(self, spec):
        """Test the same seed gives the same sample and a new seed a new one"""
        first = gen_gaussian_two_class(spec, 100, seed=5)
        second = gen_gaussian_two_class(spec, 100, seed=5)
        third = gen_gaussian_two_class(spec, 100, seed=6)
        assert np.array_equal(first.features, second.features)
        assert np.array_equal(first.labels, second.labels)
        assert not np.array_equal(first.features, third.features)

    def test_two_class_moments(self):
        """Test class frequency and class means"""
        data = gen_gaussian_two_class(gaussian_preset('delta-2-imbalanced'), 20000, seed=2)
        assert data.class1_fraction() == pytest.approx(0.3, abs=0.02)
        assert np.allclose(data.features[data.labels == 1].mean(axis=0), [2.0, 0.0], atol=0.1)
        assert np.allclose(data.features[data.labels == 0].mean(axis=0), [0.0, 0.0], atol=0.1)

    def test_latent_score(self, spec):
        """Test the latent score is the linear discriminant direction"""
        data = gen_gaussian_two_class(spec, 50, seed=1)
        assert np.allclose(data.latent_score, data.features @ spec.direction)

    def test_too_few_rows(self, spec):
        """Test n < 2 is rejected"""
        with pytest.raises(PreconditionError):
            gen_gaussian_two_class(spec, 1, seed=0)


class TestLabelTransforms:
    """Test cases for label noise, redefinition and selection"""

    def test_flip_fraction(self, spec):
        """Test the flipped share matches delta"""
        data = gen_gaussian_two_class(spec, 100000, seed=1)
        noisy = inject_label_noise(data, 0.1, seed=2)
        assert np.mean(noisy.labels != data.labels) == pytest.approx(0.1, abs=0.005)

    def test_zero_noise(self, spec):
        """Test delta = 0 leaves labels unchanged"""
        data = gen_gaussian_two_class(spec, 100, seed=1)
        assert np.array_equal(inject_label_noise(data, 0.0, seed=2).labels, data.labels)

    def test_flipped_rows_follow_mask(self, spec):
        """Test the flipped rows are exactly the seeded flip mask"""
        data = gen_gaussian_two_class(spec, 2000, seed=1)
        noisy = inject_label_noise(data, 0.2, seed=3)
        assert np.array_equal(noisy.labels != data.labels, label_flip_mask(2000, 0.2, 3))

    def test_noise_deterministic(self, spec):
        """Test the same noise seed flips the same rows"""
        data = gen_gaussian_two_class(spec, 500, seed=1)
        assert np.array_equal(inject_label_noise(data, 0.2, 3).labels, inject_label_noise(data, 0.2, 3).labels)

    def test_noise_range(self, spec):
        """Test delta >= 0.5 is rejected"""
        data = gen_gaussian_two_class(spec, 10, seed=1)
        with pytest.raises(PreconditionError):
            inject_label_noise(data, 0.5, seed=2)

    def test_redefinition(self, spec):
        """Test class 1 becomes latent >= threshold"""
        data = gen_gaussian_two_class(spec, 200, seed=1)
        relabelled = apply_class_redefinition(data, 3.0)
        assert np.array_equal(relabelled.labels, (data.latent_score >= 3.0).astype(int))

    def test_redefinition_needs_latent(self):
        """Test relabelling without a latent score is rejected"""
        data = Dataset(features=np.arange(4.0), labels=np.array([0, 1, 0, 1]))
        with pytest.raises(PreconditionError):
            apply_class_redefinition(data, 0.0)

    def test_selection_at_median(self, spec):
        """Test a median cutoff accepts half the rows and enriches class 1"""
        data = gen_gaussian_two_class(spec, 10000, seed=1)
        weights = spec.mu1 - spec.mu0
        scores = data.features @ weights
        result = apply_selection_filter(data, weights, float(np.median(scores)))
        assert result.acceptance_rate == pytest.approx(0.5, abs=1.0 / data.n_rows)
        assert np.all(result.accepted.features @ weights >= np.median(scores))
        assert result.accepted.class1_fraction() > data.class1_fraction()

    def test_selection_without_cutoff(self, spec):
        """Test a cutoff of minus infinity keeps the input unchanged"""
        data = gen_gaussian_two_class(spec, 300, seed=1)
        result = apply_selection_filter(data, spec.mu1 - spec.mu0, -np.inf)
        assert result.acceptance_rate == 1.0
        assert np.array_equal(result.accepted.features, data.features)
        assert np.array_equal(result.accepted.labels, data.labels)
        assert np.array_equal(result.accepted.latent_score, data.latent_score)

    def test_selection_rejects_everything(self, spec):
        """Test an unreachable cutoff is degenerate"""
        data = gen_gaussian_two_class(spec, 100, seed=1)
        with pytest.raises(DegenerateInputError):
            apply_selection_filter(data, [1.0, 0.0], 1e9)

    def test_selection_weight_length(self, spec):
        """Test score weights must match the feature count"""
        data = gen_gaussian_two_class(spec, 100, seed=1)
        with pytest.raises(PreconditionError):
            apply_selection_filter(data, [1.0, 0.0, 0.0], 0.0)


class TestCorrelationMatrices:
    """Test cases for random nonnegative correlation matrices"""

    def test_valid_matrix(self):
        """Test unit diagonal, nonnegative entries and PSD"""
        rng = rng_for(3)
        for d in range(2, 9):
            corr = random_nonnegative_correlation(d, rng)
            entries = corr.entries
            assert np.all(np.diag(entries) == 1.0)
            assert np.all(entries >= 0.0)
            assert np.linalg.eigvalsh(entries)[0] > -1e-10


class TestDriftStreams:
    """Test cases for drifting batch streams"""

    def test_stream_shape(self, small_scenario):
        """Test one batch per step with the step as time index"""
        stream = make_drift_stream(small_scenario, seed=1)
        assert len(stream) == 5
        assert stream.steps == [1, 2, 3, 4, 5]
        assert all(batch.n_rows == 50 for batch in stream)
        assert stream.acceptance_rates == (1.0,) * 5

    def test_batches_do_not_depend_on_horizon(self, spec):
        """Test batch t is the same whatever the number of steps"""
        short = make_drift_stream(DriftScenario(base=spec, steps=3, batch_size=40), seed=2)
        long = make_drift_stream(DriftScenario(base=spec, steps=8, batch_size=40), seed=2)
        for a, b in zip(short, long):
            assert np.array_equal(a.features, b.features)
            assert np.array_equal(a.labels, b.labels)

    def test_stationary_stream(self):
        """Test the first and last batches of a drift-free stream share a feature mean"""
        stream = make_drift_stream(drift_preset('stationary'), seed=1)
        first, last = stream.batches[0], stream.batches[-1]
        assert len(stream) == 50
        assert stats.ttest_ind(first.features[:, 0], last.features[:, 0]).pvalue > 0.01

    def test_mean_drift(self, spec):
        """Test class-1 mean at the last step is shifted by T times the velocity"""
        scenario = DriftScenario(base=spec, mean_velocity=[0.05, 0.0], steps=100, batch_size=4000)
        last = make_drift_stream(scenario, seed=3).batches[-1]
        assert np.allclose(last.features[last.labels == 1].mean(axis=0), [7.0, 0.0], atol=0.1)

    def test_prior_path(self, spec):
        """Test the class-1 share follows the prior path"""
        scenario = DriftScenario(base=spec, prior_path=[0.1, 0.9], steps=2, batch_size=5000)
        first, second = make_drift_stream(scenario, seed=4)
        assert first.class1_fraction() == pytest.approx(0.1, abs=0.02)
        assert second.class1_fraction() == pytest.approx(0.9, abs=0.02)

    def test_path_length_checked(self, spec):
        """Test a path with the wrong number of entries is a configuration error"""
        scenario = DriftScenario(base=spec, prior_path=[0.5, 0.5], steps=3, batch_size=10)
        with pytest.raises(ConfigurationError):
            make_drift_stream(scenario, seed=1)

    def test_concept_drift(self):
        """Test labels follow the redefinition threshold of each step"""
        stream = make_drift_stream(drift_preset('concept-drift'), seed=5)
        for t, batch in zip(stream.steps, stream):
            threshold = 2.0 if t <= 25 else 3.0
            assert np.array_equal(batch.labels, (batch.latent_score >= threshold).astype(int))

    def test_reject_inference(self):
        """Test early batches hold only accepted rows"""
        stream = make_drift_stream(drift_preset('reject-inference'), seed=6)
        for t, batch, rate in zip(stream.steps, stream, stream.acceptance_rates):
            if t <= 5:
                assert rate < 1.0
                assert np.all(batch.latent_score >= 1.0)
            else:
                assert rate == 1.0
                assert batch.n_rows == 400

    def test_covariance_path(self):
        """Test class-1 spread moves from its start to its end value"""
        scenario = drift_preset('tree-lda-crossing')
        assert np.allclose(scenario.class1_sigma_at(1), np.diag([1.0, 9.0]))
        assert np.allclose(scenario.class1_sigma_at(scenario.steps), np.eye(2))

    def test_replay_split(self, small_scenario):
        """Test design rows come from odd rows of the first steps"""
        stream = make_drift_stream(small_scenario, seed=7)
        design, evaluation = stream.replay_split(2)
        assert design.n_rows == 50
        assert np.array_equal(design.features[:25], stream.batches[0].features[0::2])
        assert len(evaluation) == 5
        assert np.array_equal(evaluation[4].features, stream.batches[4].features[1::2])

    def test_replay_split_range(self, small_scenario):
        """Test the design window must fit the stream"""
        stream = make_drift_stream(small_scenario, seed=7)
        with pytest.raises(PreconditionError):
            stream.replay_split(0)

    def test_scenario_validation(self, spec):
        """Test bad horizons and noise levels are rejected"""
        with pytest.raises(ConstraintError):
            DriftScenario(base=spec, steps=0)
        with pytest.raises(ConstraintError):
            DriftScenario(base=spec, label_noise_delta=0.6)
