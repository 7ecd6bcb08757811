"""Embedding file generator for the ontology pipeline.

Reads a validated-form CSV, encodes each form with a pretrained sentence
encoder, and writes the JSON-lines embedding file contract: a header line
{dimension, model_tag} followed by one {term, vector} line per form.
"""

__version__ = "0.1.0"
