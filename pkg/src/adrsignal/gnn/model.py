import logging
from typing import Dict, Sequence, Tuple

import numpy as np
import torch
import torch.nn as nn

from adrsignal.errors import ShapeError
from adrsignal.gnn.config import GnnConfig, Variant
from adrsignal.gnn.layers import AdrGcnLayer, GatLayer, GcnLayer, glorot_
from adrsignal.gnn.tensors import DTYPE, GraphTensors


log = logging.getLogger("adrsignal")

LOG_CLAMP = 1e-12


class Projection(nn.Module):
    """Affine map + ReLU taking one node kind's initial features to ``hidden_dim``."""

    def __init__(self, in_dim: int, out_dim: int, generator: torch.Generator):
        super().__init__()
        self.weight = nn.Parameter(glorot_(torch.empty(in_dim, out_dim, dtype=DTYPE), in_dim, out_dim, generator))
        self.bias = nn.Parameter(torch.zeros(out_dim, dtype=DTYPE))

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return torch.relu(x @ self.weight + self.bias)


class BilinearDecoder(nn.Module):
    def __init__(self, dim: int, generator: torch.Generator):
        super().__init__()
        self.weight = nn.Parameter(glorot_(torch.empty(dim, dim, dtype=DTYPE), dim, dim, generator))
        self.bias = nn.Parameter(torch.zeros((), dtype=DTYPE))

    def forward(self, z_drug: torch.Tensor, z_dis: torch.Tensor) -> torch.Tensor:
        return bilinear_logit(z_drug, z_dis, self.weight, self.bias)


def bilinear_logit(z_drug, z_dis, w_p, b):
    return torch.einsum("bi,ij,bj->b", z_drug, w_p, z_dis) + b


def bilinear_score(z_drug, z_dis, w_p, b) -> torch.Tensor:
    """``sigmoid(z_drug^T W_p z_dis + b)`` for one pair or a batch of pairs."""
    z_drug = torch.as_tensor(z_drug, dtype=DTYPE)
    z_dis = torch.as_tensor(z_dis, dtype=DTYPE)
    w_p = torch.as_tensor(w_p, dtype=DTYPE)
    b = torch.as_tensor(b, dtype=DTYPE)
    single = z_drug.dim() == 1
    if single:
        z_drug, z_dis = z_drug[None, :], z_dis[None, :]
    if z_drug.shape[1] != w_p.shape[0] or z_dis.shape[1] != w_p.shape[1]:
        raise ShapeError(f"bilinear shapes {tuple(z_drug.shape)} x {tuple(w_p.shape)} x {tuple(z_dis.shape)}")
    p = torch.sigmoid(bilinear_logit(z_drug, z_dis, w_p, b))
    return p[0] if single else p


class AdrGnn(nn.Module):
    """
    Per-kind input projection, ``config.layers`` message-passing layers and
    a bilinear drug-disease decoder.
    """

    def __init__(self, config: GnnConfig, drug_dim: int, dis_dim: int):
        super().__init__()
        self.config = config
        self.drug_dim = drug_dim
        self.dis_dim = dis_dim
        gen = torch.Generator().manual_seed(config.seed)
        hidden = config.hidden_dim
        self.proj_drug = Projection(drug_dim, hidden, gen)
        self.proj_dis = Projection(dis_dim, hidden, gen)

        layers = []
        for depth in range(config.layers):
            if config.variant is Variant.GCN:
                layers.append(GcnLayer(hidden, hidden, gen, config.self_loop_weight))
            elif config.variant is Variant.ADRGCN:
                layers.append(AdrGcnLayer(hidden, hidden, gen, config.self_loop_weight))
            else:
                last = depth == config.layers - 1
                layers.append(
                    GatLayer(hidden, hidden, config.gat_heads[depth], concat=not last, generator=gen, slope=config.leaky_slope)
                )
        self.layers = nn.ModuleList(layers)
        self.decoder = BilinearDecoder(hidden, gen)

    def embed(self, g: GraphTensors) -> torch.Tensor:
        if g.x_drug.shape[1] != self.drug_dim or g.x_dis.shape[1] != self.dis_dim:
            raise ShapeError(
                f"features ({g.x_drug.shape[1]}, {g.x_dis.shape[1]}) do not match "
                f"projections ({self.drug_dim}, {self.dis_dim})"
            )
        z = torch.cat([self.proj_drug(g.x_drug), self.proj_dis(g.x_dis)], dim=0)
        last = len(self.layers) - 1
        for depth, layer in enumerate(self.layers):
            z = layer(z, g)
            if depth < last or self.config.final_activation:
                z = torch.relu(z)
        return z

    def logits(self, z: torch.Tensor, g: GraphTensors, drug_ids, dis_ids) -> torch.Tensor:
        drug_ids = torch.as_tensor(drug_ids, dtype=torch.long)
        dis_ids = torch.as_tensor(dis_ids, dtype=torch.long)
        return self.decoder(z[drug_ids], z[g.n_drug + dis_ids])

    def forward(self, g: GraphTensors, drug_ids, dis_ids) -> torch.Tensor:
        return torch.sigmoid(self.logits(self.embed(g), g, drug_ids, dis_ids))

    @torch.no_grad()
    def predict(self, g: GraphTensors, drug_ids, dis_ids) -> np.ndarray:
        self.eval()
        return self.forward(g, drug_ids, dis_ids).numpy().copy()


def gnn_forward(g: GraphTensors, params: AdrGnn, config: GnnConfig = None) -> torch.Tensor:
    """Final-layer embeddings of every node (drugs first, then diseases)."""
    if config is not None and config != params.config:
        raise ShapeError("parameters were built for a different GNN config")
    return params.embed(g)


def cross_entropy(p: torch.Tensor, y: torch.Tensor) -> torch.Tensor:
    """Mean binary cross-entropy with log inputs clamped at 1e-12."""
    return -torch.mean(y * torch.log(p.clamp(min=LOG_CLAMP)) + (1 - y) * torch.log((1 - p).clamp(min=LOG_CLAMP)))


def loss_and_gradients(
    batch: Tuple[Sequence[int], Sequence[int], Sequence[int]],
    g: GraphTensors,
    params: AdrGnn,
    config: GnnConfig = None,
) -> Tuple[float, Dict[str, np.ndarray]]:
    """
    Cross-entropy over ``(drug_ids, dis_ids, labels)`` and the reverse-mode
    gradient of every named parameter.
    """
    drug_ids, dis_ids, labels = batch
    params.zero_grad(set_to_none=True)
    z = gnn_forward(g, params, config)
    p = torch.sigmoid(params.logits(z, g, drug_ids, dis_ids))
    loss = cross_entropy(p, torch.as_tensor(labels, dtype=DTYPE))
    loss.backward()
    grads = {
        name: (param.grad.detach().numpy().copy() if param.grad is not None else np.zeros(tuple(param.shape)))
        for name, param in params.named_parameters()
    }
    return float(loss.detach()), grads
