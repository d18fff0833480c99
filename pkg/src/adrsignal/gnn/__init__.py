__all__ = [
    "Variant",
    "GnnConfig",
    "GraphTensors",
    "to_tensors",
    "gcn_alpha",
    "gat_alpha",
    "GcnLayer",
    "AdrGcnLayer",
    "GatLayer",
    "AdrGnn",
    "gnn_forward",
    "bilinear_score",
    "cross_entropy",
    "loss_and_gradients",
    "save_checkpoint",
    "load_checkpoint",
    "finite_difference_check",
]

from .config import Variant, GnnConfig
from .tensors import GraphTensors, to_tensors
from .layers import gcn_alpha, gat_alpha, GcnLayer, AdrGcnLayer, GatLayer
from .model import AdrGnn, gnn_forward, bilinear_score, cross_entropy, loss_and_gradients
from .checkpoint import save_checkpoint, load_checkpoint
from .gradcheck import finite_difference_check
