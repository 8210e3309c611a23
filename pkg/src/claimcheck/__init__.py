"""claimcheck: retrieve evidence for textual claims and assess their veracity.

The pipeline stages, each its own module:

- :mod:`claimcheck.corpus` claim/document records, segmentation, categorization
- :mod:`claimcheck.index` inverted index, BM25, RM3 query expansion
- :mod:`claimcheck.rerank` cross-encoder re-ranking of first-stage results
- :mod:`claimcheck.dedup` near-duplicate claim removal and similarity stats
- :mod:`claimcheck.encoder_client` boundary to pretrained-model services
- :mod:`claimcheck.evidence` sentence-level evidence selection
- :mod:`claimcheck.nn` dense autodiff kernel and AdamW optimizer
- :mod:`claimcheck.verdict` veracity heads, training harness, metrics
- :mod:`claimcheck.cli` command-line surface
"""

__version__ = "0.1.0"
