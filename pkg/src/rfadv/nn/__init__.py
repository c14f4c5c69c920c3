"""Minimal dense/conv network engine with exact backprop to weights and inputs."""

from .layers import Conv2D, Dense, Dropout, Layer, ReLU, Reshape, Softmax
from .losses import PROB_CLAMP, cross_entropy, cross_entropy_grad
from .model import (
    GradientReport,
    Model,
    backward,
    forward,
    input_gradient,
    one_hot,
    predict_label,
)
from .optim import SGD, Adam

__all__ = [
    "Adam",
    "Conv2D",
    "Dense",
    "Dropout",
    "GradientReport",
    "Layer",
    "Model",
    "PROB_CLAMP",
    "ReLU",
    "Reshape",
    "SGD",
    "Softmax",
    "backward",
    "cross_entropy",
    "cross_entropy_grad",
    "forward",
    "input_gradient",
    "one_hot",
    "predict_label",
]
