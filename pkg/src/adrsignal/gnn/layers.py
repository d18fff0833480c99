import math
from typing import Optional

import torch
import torch.nn as nn
import torch.nn.functional as F

from adrsignal.graph.builder import PartitionKind
from adrsignal.gnn.tensors import DTYPE, GraphTensors


def glorot_(tensor: torch.Tensor, fan_in: int, fan_out: int, generator: torch.Generator) -> torch.Tensor:
    bound = math.sqrt(6.0 / (fan_in + fan_out))
    with torch.no_grad():
        return tensor.uniform_(-bound, bound, generator=generator)


def gcn_alpha(w_ij: float, d_i: float, d_j: float) -> float:
    """Degree-normalised edge weight ``w_ij / sqrt(d_i d_j)``."""
    return w_ij / math.sqrt(d_i * d_j)


def gat_alpha(h_i: torch.Tensor, h_neighbors: torch.Tensor, attn: torch.Tensor, slope: float = 0.2) -> torch.Tensor:
    """
    Attention of node ``i`` over its neighbours (self included).

    ``attn`` is the scoring vector applied to ``[h_i || h_k]``; scores pass
    through LeakyReLU and a softmax over the neighbour rows.
    """
    f = h_i.shape[-1]
    scores = F.leaky_relu(h_neighbors @ attn[f:] + h_i @ attn[:f], slope)
    return torch.softmax(scores, dim=0)


def aggregate(messages: torch.Tensor, dst: torch.Tensor, n: int) -> torch.Tensor:
    out = torch.zeros(n, messages.shape[1], dtype=messages.dtype)
    return out.index_add_(0, dst, messages)


class GcnLayer(nn.Module):
    def __init__(self, in_dim: int, out_dim: int, generator: torch.Generator, self_loop_weight: float = 1.0):
        super().__init__()
        self.weight = nn.Parameter(glorot_(torch.empty(in_dim, out_dim, dtype=DTYPE), in_dim, out_dim, generator))
        self.self_loop_weight = self_loop_weight

    def forward(self, z: torch.Tensor, g: GraphTensors) -> torch.Tensor:
        h = z @ self.weight
        src, dst, w = g.union()
        alpha = g.gcn_alpha((src, dst, w))
        out = aggregate(alpha[:, None] * h[src], dst, g.n_nodes)
        return out + g.self_alpha(self.self_loop_weight)[:, None] * h


class AdrGcnLayer(nn.Module):
    """One weight matrix per edge partition plus one for the self-loop; outputs are summed."""

    def __init__(self, in_dim: int, out_dim: int, generator: torch.Generator, self_loop_weight: float = 1.0):
        super().__init__()
        names = [k.value for k in PartitionKind] + ["self"]
        self.weights = nn.ParameterDict(
            {
                name: nn.Parameter(glorot_(torch.empty(in_dim, out_dim, dtype=DTYPE), in_dim, out_dim, generator))
                for name in names
            }
        )
        self.self_loop_weight = self_loop_weight

    def forward(self, z: torch.Tensor, g: GraphTensors) -> torch.Tensor:
        out = g.self_alpha(self.self_loop_weight)[:, None] * (z @ self.weights["self"])
        for kind in PartitionKind:
            src, dst, w = g.partitions[kind]
            if src.numel() == 0:
                continue
            h = z @ self.weights[kind.value]
            alpha = g.gcn_alpha((src, dst, w))
            out = out + aggregate(alpha[:, None] * h[src], dst, g.n_nodes)
        return out


class GatLayer(nn.Module):
    """
    Multi-head attention layer. Heads are concatenated (``concat=True``, each
    of width ``out_dim // heads``) or averaged (each of width ``out_dim``).
    Edge weights play no part in the attention.
    """

    def __init__(
        self,
        in_dim: int,
        out_dim: int,
        heads: int,
        concat: bool,
        generator: torch.Generator,
        slope: float = 0.2,
    ):
        super().__init__()
        self.heads = heads
        self.concat = concat
        self.head_dim = out_dim // heads if concat else out_dim
        self.slope = slope
        f = self.head_dim
        self.weight = nn.Parameter(glorot_(torch.empty(heads, in_dim, f, dtype=DTYPE), in_dim, f, generator))
        self.attn = nn.Parameter(glorot_(torch.empty(heads, 2 * f, dtype=DTYPE), 2 * f, 1, generator))

    def _edges(self, g: GraphTensors):
        src, dst, _ = g.union()
        loops = torch.arange(g.n_nodes, dtype=torch.long)
        return torch.cat([src, loops]), torch.cat([dst, loops])

    def attention(self, z: torch.Tensor, g: GraphTensors, edges: Optional[tuple] = None):
        """Per-edge attention ``(E, heads)`` with the (src, dst) edge list it refers to."""
        src, dst = edges if edges is not None else self._edges(g)
        h = torch.einsum("ni,hif->nhf", z, self.weight)
        f = self.head_dim
        score_dst = torch.einsum("nhf,hf->nh", h, self.attn[:, :f])
        score_src = torch.einsum("nhf,hf->nh", h, self.attn[:, f:])
        e = F.leaky_relu(score_dst[dst] + score_src[src], self.slope)

        n = g.n_nodes
        peak = torch.full((n, self.heads), -math.inf, dtype=e.dtype)
        peak = peak.scatter_reduce(0, dst[:, None].expand_as(e), e.detach(), reduce="amax", include_self=True)
        ex = torch.exp(e - peak[dst])
        denom = torch.zeros(n, self.heads, dtype=e.dtype).index_add_(0, dst, ex)
        return ex / denom[dst], h, (src, dst)

    def forward(self, z: torch.Tensor, g: GraphTensors) -> torch.Tensor:
        alpha, h, (src, dst) = self.attention(z, g)
        msg = alpha[:, :, None] * h[src]
        out = torch.zeros(g.n_nodes, self.heads, self.head_dim, dtype=z.dtype).index_add_(0, dst, msg)
        if self.concat:
            return out.reshape(g.n_nodes, self.heads * self.head_dim)
        return out.mean(dim=1)
