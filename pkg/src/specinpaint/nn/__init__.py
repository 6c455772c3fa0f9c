"""Minimal reverse-mode autodiff engine and the layers built on it."""

from .attention import multi_head_attention
from .autodiff import (
    Tensor,
    add,
    as_tensor,
    clip,
    concat,
    default_dtype,
    div,
    embedding,
    exp,
    layer_norm,
    linear,
    log,
    log_softmax,
    masked_softmax,
    matmul,
    maximum_scalar,
    mul,
    no_grad,
    relu,
    reshape,
    set_default_dtype,
    softmax,
    sqrt,
    stop_gradient,
    sub,
    swapaxes,
    take,
    tensor_mean,
    tensor_sum,
    using_dtype,
)
from .checkpoint import load_params, save_params
from .conv import conv2d, conv_out_shape, conv_transpose2d
from .losses import cross_entropy_label_smoothed, nll, smoothed_targets
from .optim import Parameter, adam_step, global_grad_norm, grad_clip, warmup_lr, zero_grads

__all__ = [
    "Parameter",
    "Tensor",
    "adam_step",
    "add",
    "as_tensor",
    "clip",
    "concat",
    "conv2d",
    "conv_out_shape",
    "conv_transpose2d",
    "cross_entropy_label_smoothed",
    "default_dtype",
    "div",
    "embedding",
    "exp",
    "global_grad_norm",
    "grad_clip",
    "layer_norm",
    "linear",
    "load_params",
    "log",
    "log_softmax",
    "masked_softmax",
    "matmul",
    "maximum_scalar",
    "mul",
    "multi_head_attention",
    "nll",
    "no_grad",
    "relu",
    "reshape",
    "save_params",
    "set_default_dtype",
    "smoothed_targets",
    "softmax",
    "sqrt",
    "stop_gradient",
    "sub",
    "swapaxes",
    "take",
    "tensor_mean",
    "tensor_sum",
    "using_dtype",
    "warmup_lr",
    "zero_grads",
]
