"""Log-time log-space extreme classification.

Thin Python layer over the C++ core: trellis construction, Viterbi and
list-Viterbi decoding, forward-backward, and model training/prediction.
"""

from ._ltls import (
    LtlsError,
    Model,
    Path,
    Trellis,
    expected_edge_count,
    forward_log_partition,
    oracle_top_frequent,
    score_path,
    separation_ranking_loss,
    soft_threshold,
    train,
    viterbi_top1,
    viterbi_topk,
)

__all__ = [
    "LtlsError",
    "Model",
    "Path",
    "Trellis",
    "expected_edge_count",
    "forward_log_partition",
    "oracle_top_frequent",
    "score_path",
    "separation_ranking_loss",
    "soft_threshold",
    "train",
    "viterbi_top1",
    "viterbi_topk",
]

__version__ = "0.1.0"
