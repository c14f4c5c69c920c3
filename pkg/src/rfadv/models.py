"""Concrete classifier architectures and the ADVW weights file format.

All architecture constants live here so the reconstruction can be adjusted
in one place.
"""

from __future__ import annotations

import struct
from enum import Enum

import numpy as np

from . import nn
from .errors import FileFormatError, ShapeMismatchError

NUM_CLASSES = 11
FRAME_SHAPE = (2, 128)

# VT-CNN2 reconstruction: two conv blocks, one hidden dense layer,
# dropout 0.5 throughout, softmax head.
VTCNN2_INPUT_SHAPE = (2, 128, 1)
VTCNN2_CONV1_FILTERS = 256
VTCNN2_CONV1_KERNEL = (1, 3)
VTCNN2_CONV2_FILTERS = 80
VTCNN2_CONV2_KERNEL = (2, 3)
VTCNN2_DENSE_UNITS = 256
VTCNN2_DROPOUT = 0.5

# Substitute MLP widths, input to output.
MLP_WIDTHS = (256, 1024, 1024, 1024, 512, 128, NUM_CLASSES)

WEIGHTS_MAGIC = b"ADVW"
WEIGHTS_VERSION = 1


class ModelKind(Enum):
    VTCNN2 = "vtcnn2"
    SubstituteMLP = "mlp"


def build_vtcnn2(seed: int) -> nn.Model:
    """Seeded VT-CNN2: (2, 128, 1) frames to an 11-class distribution."""
    dr = VTCNN2_DROPOUT
    layers = [
        nn.Conv2D(VTCNN2_CONV1_FILTERS, VTCNN2_CONV1_KERNEL, padding="same"),
        nn.ReLU(),
        nn.Dropout(dr),
        nn.Conv2D(VTCNN2_CONV2_FILTERS, VTCNN2_CONV2_KERNEL, padding="same"),
        nn.ReLU(),
        nn.Dropout(dr),
        nn.Reshape((-1,)),
        nn.Dense(VTCNN2_DENSE_UNITS),
        nn.ReLU(),
        nn.Dropout(dr),
        nn.Dense(NUM_CLASSES),
        nn.Softmax(),
    ]
    return nn.Model(layers, VTCNN2_INPUT_SHAPE, NUM_CLASSES,
                    name=ModelKind.VTCNN2.value, seed=seed)


def build_substitute_mlp(seed: int) -> nn.Model:
    """Seeded fully connected substitute: flat 256-vector input."""
    layers: list[nn.Layer] = []
    for width in MLP_WIDTHS[1:-1]:
        layers.append(nn.Dense(width))
        layers.append(nn.ReLU())
    layers.append(nn.Dense(MLP_WIDTHS[-1]))
    layers.append(nn.Softmax())
    return nn.Model(layers, (MLP_WIDTHS[0],), NUM_CLASSES,
                    name=ModelKind.SubstituteMLP.value, seed=seed)


def build_model(kind: ModelKind | str, seed: int) -> nn.Model:
    kind = ModelKind(kind) if not isinstance(kind, ModelKind) else kind
    if kind is ModelKind.VTCNN2:
        return build_vtcnn2(seed)
    return build_substitute_mlp(seed)


def frame_for_model(model: nn.Model, frame: np.ndarray) -> np.ndarray:
    """Adapt a 2x128 frame to the model input: add a channel axis for the
    CNN, flatten row-major (I row then Q row) for the MLP."""
    if model.input_shape == VTCNN2_INPUT_SHAPE:
        return frame.reshape(VTCNN2_INPUT_SHAPE)
    return frame.reshape(-1)


def save_weights(model: nn.Model, path) -> None:
    """Write every parameter tensor to an ADVW file (little-endian f32)."""
    with open(path, "wb") as f:
        names = model.parameter_names()
        arrays = model.parameter_arrays()
        f.write(WEIGHTS_MAGIC)
        f.write(struct.pack("<II", WEIGHTS_VERSION, len(names)))
        for name, arr in zip(names, arrays):
            encoded = name.encode("utf-8")
            f.write(struct.pack("<I", len(encoded)))
            f.write(encoded)
            f.write(struct.pack("<I", arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            f.write(np.ascontiguousarray(arr, dtype="<f4").tobytes())


def read_weights_file(path) -> list[tuple[str, np.ndarray]]:
    """Parse an ADVW file into (name, float32 array) records."""
    with open(path, "rb") as f:
        data = f.read()
    view = memoryview(data)
    if len(view) < 12:
        raise FileFormatError(f"{path}: truncated header ({len(view)} bytes)")
    if bytes(view[:4]) != WEIGHTS_MAGIC:
        raise FileFormatError(f"{path}: bad magic {bytes(view[:4])!r}")
    version, count = struct.unpack("<II", view[4:12])
    if version != WEIGHTS_VERSION:
        raise FileFormatError(
            f"{path}: unsupported version {version} (expected {WEIGHTS_VERSION})"
        )
    off = 12
    records = []
    for i in range(count):
        try:
            (nlen,) = struct.unpack("<I", view[off:off + 4])
            off += 4
            name = bytes(view[off:off + nlen]).decode("utf-8")
            off += nlen
            (rank,) = struct.unpack("<I", view[off:off + 4])
            off += 4
            dims = struct.unpack(f"<{rank}I", view[off:off + 4 * rank])
            off += 4 * rank
            nbytes = int(np.prod(dims)) * 4
            payload = view[off:off + nbytes]
            if len(payload) != nbytes:
                raise struct.error("payload short")
            off += nbytes
        except struct.error as exc:
            raise FileFormatError(
                f"{path}: truncated at record {i} ({exc})"
            ) from None
        arr = np.frombuffer(payload, dtype="<f4").reshape(dims).copy()
        records.append((name, arr))
    if off != len(view):
        raise FileFormatError(f"{path}: {len(view) - off} trailing bytes")
    return records


def load_weights(path, model: nn.Model) -> nn.Model:
    """Load ADVW weights into a built model, validating names and shapes."""
    records = read_weights_file(path)
    expected = model.parameter_names()
    got = [name for name, _ in records]
    if got != expected:
        raise FileFormatError(
            f"{path}: parameter names {got[:3]}... do not match the "
            f"{model.name!r} architecture"
        )
    for (name, arr), own in zip(records, model.parameter_arrays()):
        if arr.shape != own.shape:
            raise FileFormatError(
                f"{path}: {name} has dims {arr.shape}, architecture "
                f"declares {own.shape}"
            )
        own[...] = arr
    return model


def load_model(path, seed: int = 0) -> nn.Model:
    """Build whichever known architecture matches the file and load it."""
    records = read_weights_file(path)
    names = [name for name, _ in records]
    for kind in ModelKind:
        candidate = build_model(kind, seed)
        if candidate.parameter_names() == names:
            return load_weights(path, candidate)
    raise FileFormatError(f"{path}: weight names match no known architecture")
