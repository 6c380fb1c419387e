"""
robust-linkage: robust hierarchical clustering.

Builds hierarchies that stay correct when a fraction of every point's
nearest neighbors and a fraction of the points themselves are adversarial,
together with classical linkage baselines, similarity-property checkers,
synthetic instance generators and the evaluation protocol.
"""

__version__ = "0.1.0"
__author__ = "Teknologika"
__email__ = "hello@teknologika.com"
