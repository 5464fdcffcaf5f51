"""Topic classification toolkit.

Builds topic models by clustering the graph of significantly
co-occurring words, refines them with a local likelihood sweep and
asymmetric LDA, and ships PLSA/LDA baselines, synthetic corpus
generators, model-comparison metrics, and an analytical module for the
likelihood landscape that explains why plain likelihood maximization
overfits unequal topics.
"""

__version__ = "0.1.0"
