"""Corpus-to-ontology toolkit for anchor-term scientometrics.

Pipeline: ingest a bibliographic export (corpus), capture candidate term
forms ending in an anchor token (extract), run the team validation
workflow (codebook), then analyze the validated forms: indices (metrics),
co-occurrence networks (conet), knowledge-production networks (scholnet)
and the multi-label ontology (ontology). The cli module ties the stages
together and serves the review HTTP API.
"""

__version__ = "0.1.0"

from .kernels import BACKEND as kernel_backend  # noqa: F401
