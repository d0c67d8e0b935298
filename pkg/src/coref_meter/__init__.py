"""Evaluation toolkit for coreference scoring, pronoun benchmarks and plausibility models."""

__version__ = "0.1.0"
