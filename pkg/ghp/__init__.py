"""Graphon-based Hawkes processes.

Sample finite multivariate Hawkes processes from a parametric graphon,
simulate heterogeneous event sequences, learn the graphon back from event
sequence corpora, and check the model's guarantees numerically.
"""

__version__ = "0.1.0"
