"""Concept-discovery workbench.

Turns timestamped semi-structured text documents into analyst-facing
artifacts: concept lattices with temporal life tracks, emergent
self-organizing maps, and hidden Markov process models, driven by a layered
attribute ontology and organized as a four-phase design loop.
"""

__version__ = "0.1.0"
