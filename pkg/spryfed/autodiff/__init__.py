from .Batch import Batch
from .DualTensor import DualTensor
from .Engine import Engine
from .ForwardEngine import ForwardEngine
from .GradEstimate import EstimatorKind, GradEstimate
from .PrimalEngine import PrimalEngine
from .ReverseEngine import ReverseEngine
from .gradients import (
    combine_directional,
    forward_gradient,
    forward_loss,
    jvp,
    jvp_batch,
    perturbed,
    reverse_grad,
    zero_order_coefficient,
    zero_order_grad,
)

__all__ = [
    'Batch', 'DualTensor', 'Engine', 'ForwardEngine', 'EstimatorKind', 'GradEstimate',
    'PrimalEngine', 'ReverseEngine', 'combine_directional', 'forward_gradient', 'forward_loss',
    'jvp', 'jvp_batch', 'perturbed', 'reverse_grad', 'zero_order_coefficient', 'zero_order_grad',
]
