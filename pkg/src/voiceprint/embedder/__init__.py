"""Learnt identity-embedding frontend."""

from .tcn import (EMBED_DIM, ModelWeights, TcnConfig, embed_snippet, forward, init_weights,
                  mean_pool_embedding)
from .train import TrainConfig, TripletBatch, mine_triplets, train, triplet_loss
from .weights_io import WeightsFormatError, load_weights, save_weights

__all__ = [
    "EMBED_DIM", "ModelWeights", "TcnConfig", "TrainConfig", "TripletBatch", "WeightsFormatError",
    "embed_snippet", "forward", "init_weights", "load_weights", "mean_pool_embedding", "mine_triplets",
    "save_weights", "train", "triplet_loss",
]
