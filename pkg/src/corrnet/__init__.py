"""corrnet: predict correlation coefficients from correlate descriptions.

Pipeline pieces: text normalization, pretrained word-vector embedding, a
shared gated recurrent encoder with a symmetric regression head, Adam
training, a mean-value baseline, ensemble-disagreement (query-by-committee)
search over untested correlate pairs, and correlation-table infilling.
"""

__version__ = "0.1.0"
