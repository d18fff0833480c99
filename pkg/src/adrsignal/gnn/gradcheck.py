from typing import Callable, Dict

import numpy as np
import torch


def finite_difference_check(
    module: torch.nn.Module,
    loss_fn: Callable[[], torch.Tensor],
    analytic: Dict[str, np.ndarray],
    step: float = 1e-4,
) -> Dict[str, float]:
    """
    Central finite differences for every entry of every parameter, compared
    with ``analytic`` gradients.

    Returns the relative error ``|g_a - g_n| / max(|g_a|, |g_n|)`` per
    parameter tensor (norms over the tensor; 0 when both are zero).
    """
    errors = {}
    with torch.no_grad():
        for name, param in module.named_parameters():
            flat = param.view(-1)
            numeric = np.zeros(flat.numel())
            for k in range(flat.numel()):
                orig = flat[k].item()
                flat[k] = orig + step
                up = float(loss_fn())
                flat[k] = orig - step
                down = float(loss_fn())
                flat[k] = orig
                numeric[k] = (up - down) / (2.0 * step)
            a = np.asarray(analytic[name], dtype=np.float64).reshape(-1)
            scale = max(np.linalg.norm(a), np.linalg.norm(numeric))
            errors[name] = 0.0 if scale == 0 else float(np.linalg.norm(a - numeric) / scale)
    return errors
