"""Conversational question answering over property graphs.

The package turns natural-language questions into Cypher via a language
model, executes queries on an embedded property-graph engine, explains
them (deterministically or via a model), and lets users refine queries
through amendment instructions. A benchmark generator, a schema-aware
fault detector, and a statistics lab support systematic evaluation.
"""

__version__ = "0.1.0"
