from .tensor import Graph, Tensor, as_tensor, parameter
from .gradcheck import gradient_check
from .optim import Adam, RMSprop
from . import ops

__all__ = [
    "Graph",
    "Tensor",
    "as_tensor",
    "parameter",
    "gradient_check",
    "Adam",
    "RMSprop",
    "ops",
]
