"""Multi-relational network embedding with local two-edge structure sampling."""

__version__ = "0.1.0"

from .census import StructureCensus, census, count_parallelograms, count_triangles, filter_by_trinode_ratio
from .checkpoint import load_checkpoint, save_checkpoint
from .classifier import BinaryClassifier, ClassifierConfig
from .evaluation import EvalResult, eval_link_prediction, eval_triplet_classification, featurize
from .graph import RelGraph, Triple, Vocabulary, build_graph, load_graph, load_triples
from .model import BridgeMode, EmbeddingTable, bridge, triple_score
from .trainer import TrainConfig, TrainReport, train

__all__ = [
    "BinaryClassifier", "BridgeMode", "ClassifierConfig", "EmbeddingTable", "EvalResult", "RelGraph",
    "StructureCensus", "TrainConfig", "TrainReport", "Triple", "Vocabulary", "bridge", "build_graph",
    "census", "count_parallelograms", "count_triangles", "eval_link_prediction",
    "eval_triplet_classification", "featurize", "filter_by_trinode_ratio", "load_checkpoint", "load_graph",
    "load_triples", "save_checkpoint", "train", "triple_score",
]
