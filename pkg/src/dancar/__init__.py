"""Disk-anchor (DANCAR) embeddings of directed graphs."""

from .analytic import (
    embed_tree,
    import_poincare,
    poincare_ball_to_euclidean,
    poincare_distance,
    transform_to_bipartite,
    tree_layout_constants,
)
from .core import (
    DancarEmbedding,
    Hyperparams,
    LossBreakdown,
    anchor_loss,
    disk_embedding_score,
    loss_gradients,
    negative_loss,
    positive_loss,
    read_embedding,
    reconstruct_edges,
    score,
    total_loss,
    write_embedding,
)
from .evaluation import EvalReport, link_prediction_report, map_score, reconstruction_report, spearman
from .graph import (
    DirectedGraph,
    largest_weakly_connected_component,
    parse_edge_list,
    read_edge_list,
    sample_negative_pairs,
    split_edges,
    transitive_closure,
)
from .trainer import AdamState, TrainReport, adam_step, init_embedding, train

__version__ = "0.1.0"
