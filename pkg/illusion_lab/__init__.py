"""Classifier performance illusions: analytic results, simple classifiers and experiment harness"""

__version__ = "0.1.0"
ARTIFACT_VERSION = __version__
