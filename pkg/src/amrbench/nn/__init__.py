from .layers import LayerSpec, infer_shape, param_shapes
from .network import Model, cross_entropy
from .optim import Adam
from .gradcheck import grad_check

__all__ = [
    "LayerSpec",
    "infer_shape",
    "param_shapes",
    "Model",
    "cross_entropy",
    "Adam",
    "grad_check",
]
