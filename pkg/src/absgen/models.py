"""Model builders, pair/siamese forward passes, losses, and parameter I/O.

Two families share one description type:

* ``mlp`` -- fully-connected chain whose width halves (integer floor) at
  every layer until the scalar output, Tanh throughout. The pair model
  consumes two flattened samples concatenated along the feature axis.
* ``cnn`` -- four 3x3 conv blocks (16/32/64/64 channels, stride 1, pad 1,
  ReLU, 2x2 maxpool), flatten, one fully-connected layer to 256, scalar
  output. The pair model consumes two images stacked along the channel
  axis.

``head='scalar'`` specs end in the output activation implied by the
convention: ``signed_distance`` -> Tanh in [-1, 1], ``probability`` ->
Sigmoid in [0, 1], where larger always means "more likely a
different-pattern pair". ``head='embedding'`` specs stop at the last
hidden layer and are used as weight-shared siamese branches compared by
Euclidean distance.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from absgen import tensor as T
from absgen.errors import ContractError, DimensionError

CONV_CHANNELS = (16, 32, 64, 64)
CONV_KERNEL = 3
POOL_WINDOW = 2
FC_DIM = 256
SIAMESE_MLP_DEPTH = 4  # branch keeps the first four halving layers


@dataclass(frozen=True)
class ModelSpec:
    kind: str                     # 'mlp' | 'cnn'
    output: str                   # 'signed_distance' | 'probability'
    head: str = "scalar"          # 'scalar' | 'embedding'
    widths: tuple = ()            # mlp: full width chain, input first
    in_channels: int = 0          # cnn only
    image_hw: tuple = ()          # cnn only

    def __post_init__(self):
        if self.kind not in ("mlp", "cnn"):
            raise ContractError(f"model kind must be mlp or cnn, got {self.kind!r}")
        if self.output not in ("signed_distance", "probability"):
            raise ContractError(f"unknown output convention {self.output!r}")
        if self.head not in ("scalar", "embedding"):
            raise ContractError(f"unknown head {self.head!r}")


@dataclass
class Params:
    """Named parameter tensors plus the seed they were initialized from."""

    tensors: dict = field(default_factory=dict)
    seed: int = 0

    def names(self):
        return list(self.tensors)

    def __getitem__(self, name):
        return self.tensors[name]

    def count(self) -> int:
        return sum(t.data.size for t in self.tensors.values())


@dataclass
class PairExample:
    """Two same-shape samples and their identical(0)/different(1) label."""

    sample_a: np.ndarray
    sample_b: np.ndarray
    label: int

    def __post_init__(self):
        if self.sample_a.shape != self.sample_b.shape:
            raise DimensionError(
                f"pair samples differ in shape: {self.sample_a.shape} vs {self.sample_b.shape}"
            )
        if self.label not in (0, 1):
            raise ContractError(f"pair label must be 0 or 1, got {self.label}")


# -- builders --------------------------------------------------------------


def halving_chain(input_dim: int):
    widths = [input_dim]
    while widths[-1] > 1:
        widths.append(max(widths[-1] // 2, 1))
    return tuple(widths)


def build_mlp(input_dim: int, output: str = "signed_distance") -> ModelSpec:
    """Fully-connected pair model: widths halve from ``input_dim`` down to 1."""
    if input_dim < 2:
        raise ContractError(f"build_mlp needs input_dim >= 2, got {input_dim}")
    return ModelSpec(kind="mlp", output=output, widths=halving_chain(input_dim))


def build_siamese_mlp(input_dim: int, output: str = "signed_distance") -> ModelSpec:
    """One weight-shared branch: the first ``SIAMESE_MLP_DEPTH`` halving layers."""
    if input_dim < 2:
        raise ContractError(f"build_siamese_mlp needs input_dim >= 2, got {input_dim}")
    chain = halving_chain(input_dim)
    keep = min(SIAMESE_MLP_DEPTH, len(chain) - 2)  # never keep the scalar layer
    keep = max(keep, 1)
    return ModelSpec(kind="mlp", output=output, head="embedding", widths=chain[: keep + 1])


def cnn_spatial_chain(image_hw):
    h, w = image_hw
    sizes = [(h, w)]
    for _ in CONV_CHANNELS:
        h, w = (h - POOL_WINDOW) // POOL_WINDOW + 1, (w - POOL_WINDOW) // POOL_WINDOW + 1
        sizes.append((h, w))
    return sizes


def build_cnn(in_channels: int, image_hw, output: str = "probability") -> ModelSpec:
    """Convolutional pair model; ``in_channels`` is 2 for channel-stacked pairs."""
    h, w = image_hw
    if h < 16 or w < 16:
        raise ContractError(f"build_cnn needs both image dimensions >= 16, got {image_hw}")
    return ModelSpec(kind="cnn", output=output, in_channels=in_channels, image_hw=(h, w))


def build_siamese_cnn(image_hw, output: str = "probability") -> ModelSpec:
    spec = build_cnn(1, image_hw, output)
    return ModelSpec(kind="cnn", output=output, head="embedding",
                     in_channels=1, image_hw=spec.image_hw)


def _layer_dims(spec: ModelSpec):
    """Yield (name, fan_in, fan_out, weight_shape) for every parameter pair."""
    if spec.kind == "mlp":
        for i, (a, b) in enumerate(zip(spec.widths, spec.widths[1:])):
            yield f"fc{i}.w", a, b, (a, b)
            yield f"fc{i}.b", a, b, (b,)
        return
    cin = spec.in_channels
    for i, cout in enumerate(CONV_CHANNELS):
        k = CONV_KERNEL
        yield f"conv{i}.w", cin * k * k, cout * k * k, (cout, cin, k, k)
        yield f"conv{i}.b", cin * k * k, cout * k * k, (cout,)
        cin = cout
    h, w = cnn_spatial_chain(spec.image_hw)[-1]
    flat = CONV_CHANNELS[-1] * h * w
    yield "fc0.w", flat, FC_DIM, (flat, FC_DIM)
    yield "fc0.b", flat, FC_DIM, (FC_DIM,)
    if spec.head == "scalar":
        yield "fc1.w", FC_DIM, 1, (FC_DIM, 1)
        yield "fc1.b", FC_DIM, 1, (1,)


def param_count(spec: ModelSpec) -> int:
    return sum(int(np.prod(shape)) for _, _, _, shape in _layer_dims(spec))


def init_params(spec: ModelSpec, seed: int = 0) -> Params:
    """Uniform +-sqrt(6/(fan_in+fan_out)) weights, zero biases."""
    rng = np.random.default_rng(np.random.SeedSequence([0x1A17, seed]))
    params = Params(seed=seed)
    for name, fan_in, fan_out, shape in _layer_dims(spec):
        if name.endswith(".b"):
            data = np.zeros(shape)
        else:
            limit = np.sqrt(6.0 / (fan_in + fan_out))
            data = rng.uniform(-limit, limit, size=shape)
        params.tensors[name] = T.Tensor(data, requires_grad=True)
    return params


def check_params_match(spec: ModelSpec, params: Params):
    expected = {name: shape for name, _, _, shape in _layer_dims(spec)}
    actual = {name: t.shape for name, t in params.tensors.items()}
    if {k: tuple(v) for k, v in expected.items()} != {k: tuple(v) for k, v in actual.items()}:
        raise ContractError(
            f"parameters do not match model spec: expected {sorted(expected)}, got {sorted(actual)}"
        )


# -- forward passes --------------------------------------------------------


def _output_activation(spec: ModelSpec):
    return T.tanh if spec.output == "signed_distance" else T.sigmoid


def _mlp_forward(spec: ModelSpec, params: Params, x: T.Tensor) -> T.Tensor:
    n_layers = len(spec.widths) - 1
    h = x
    for i in range(n_layers):
        h = T.matmul(h, params[f"fc{i}.w"]) + params[f"fc{i}.b"]
        last = i == n_layers - 1
        if spec.head == "scalar" and last:
            h = _output_activation(spec)(h)
        else:
            h = T.tanh(h)
    return h


def _cnn_forward(spec: ModelSpec, params: Params, x: T.Tensor) -> T.Tensor:
    h = x
    for i in range(len(CONV_CHANNELS)):
        b = params[f"conv{i}.b"]
        h = T.conv2d(h, params[f"conv{i}.w"], stride=1, padding=CONV_KERNEL // 2)
        h = h + T.reshape(b, (1, b.shape[0], 1, 1))
        h = T.relu(h)
        h = T.maxpool2d(h, POOL_WINDOW, POOL_WINDOW)
    n = h.shape[0]
    h = T.reshape(h, (n, -1))
    h = T.relu(T.matmul(h, params["fc0.w"]) + params["fc0.b"])
    if spec.head == "scalar":
        h = _output_activation(spec)(T.matmul(h, params["fc1.w"]) + params["fc1.b"])
    return h


def _forward(spec: ModelSpec, params: Params, x: T.Tensor) -> T.Tensor:
    return _mlp_forward(spec, params, x) if spec.kind == "mlp" else _cnn_forward(spec, params, x)


def _stack_pair_input(spec: ModelSpec, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Join batched samples per the model's concatenation convention."""
    if a.shape != b.shape:
        raise DimensionError(f"pair batch shapes differ: {a.shape} vs {b.shape}")
    n = a.shape[0]
    if spec.kind == "mlp":
        x = np.concatenate([a.reshape(n, -1), b.reshape(n, -1)], axis=1)
        if x.shape[1] != spec.widths[0]:
            raise DimensionError(
                f"concatenated width {x.shape[1]} does not match model input {spec.widths[0]}"
            )
        return x
    a4 = a.reshape((n, -1) + a.shape[-2:])
    b4 = b.reshape((n, -1) + b.shape[-2:])
    x = np.concatenate([a4, b4], axis=1)
    if x.shape[1] != spec.in_channels or x.shape[2:] != spec.image_hw:
        raise DimensionError(
            f"stacked pair shape {x.shape[1:]} does not match model input "
            f"({spec.in_channels}, {spec.image_hw})"
        )
    return x


def _single_input(spec: ModelSpec, a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    if spec.kind == "mlp":
        x = a.reshape(n, -1)
        if x.shape[1] != spec.widths[0]:
            raise DimensionError(f"sample width {x.shape[1]} does not match branch input {spec.widths[0]}")
        return x
    x = a.reshape((n, -1) + a.shape[-2:])
    if x.shape[1] != spec.in_channels or x.shape[2:] != spec.image_hw:
        raise DimensionError(
            f"sample shape {x.shape[1:]} does not match branch input ({spec.in_channels}, {spec.image_hw})"
        )
    return x


def forward_pair_batch(spec: ModelSpec, params: Params, a, b) -> T.Tensor:
    """Scores for a batch of ordered pairs; shape (n,)."""
    if spec.head != "scalar":
        raise ContractError("forward_pair needs a scalar-head model spec")
    x = T.Tensor(_stack_pair_input(spec, np.asarray(a, float), np.asarray(b, float)))
    out = _forward(spec, params, x)
    return T.reshape(out, (x.shape[0],))


def forward_pair(spec: ModelSpec, params: Params, pair: PairExample) -> float:
    return float(forward_pair_batch(spec, params, pair.sample_a[None], pair.sample_b[None]).data[0])


def forward_siamese_batch(spec: ModelSpec, params: Params, a, b) -> T.Tensor:
    """Euclidean distance between weight-shared branch embeddings; shape (n,)."""
    if spec.head != "embedding":
        raise ContractError("forward_siamese needs an embedding-head model spec")
    ea = _forward(spec, params, T.Tensor(_single_input(spec, np.asarray(a, float))))
    eb = _forward(spec, params, T.Tensor(_single_input(spec, np.asarray(b, float))))
    d = ea - eb
    return T.sqrt(T.tensor_sum(d * d, axis=1))


def forward_siamese(spec: ModelSpec, params: Params, pair: PairExample) -> float:
    return float(forward_siamese_batch(spec, params, pair.sample_a[None], pair.sample_b[None]).data[0])


def make_scorer(spec: ModelSpec, params: Params):
    """Batch scoring callable on a shared different-ness scale.

    Scores are nonnegative for signed-distance and siamese models: 0 means
    identical-like, larger means more likely different. Signed-distance
    models score with the magnitude of the raw output, since identical
    pairs sit on the zero level set and different pairs land on either
    side of it depending on concatenation order. Probability models score
    with the raw probability of being different.
    """
    if spec.head == "scalar" and spec.output == "signed_distance":
        def score(a, b):
            with T.no_grad():
                return np.abs(forward_pair_batch(spec, params, a, b).data)
    elif spec.head == "scalar":
        def score(a, b):
            with T.no_grad():
                return forward_pair_batch(spec, params, a, b).data.copy()
    else:
        def score(a, b):
            with T.no_grad():
                return forward_siamese_batch(spec, params, a, b).data.copy()
    return score


# -- losses ----------------------------------------------------------------


def loss_mse(pred, target) -> T.Tensor:
    """Mean squared error; scalar over however many predictions are given."""
    pred = T.as_tensor(pred)
    d = pred - T.Tensor(np.asarray(target, float))
    return T.mean(d * d)


def loss_bce(pred, target) -> T.Tensor:
    """Binary cross entropy with predictions clamped to [1e-7, 1 - 1e-7]."""
    pred = T.as_tensor(pred)
    if np.any(pred.data < 0.0) or np.any(pred.data > 1.0):
        raise ContractError("loss_bce predictions must lie in [0, 1] before clamping")
    t = np.asarray(target, float)
    p = T.clip(pred, 1e-7, 1.0 - 1e-7)
    return T.mean(-(t * T.log(p)) - (1.0 - t) * T.log(1.0 - p))


def loss_contrastive(energy, label, margin: float = 1.0) -> T.Tensor:
    """Hadsell-Chopra contrastive loss; label 1 marks a different-pattern pair."""
    if margin <= 0:
        raise ContractError(f"contrastive margin must be positive, got {margin}")
    energy = T.as_tensor(energy)
    if np.any(energy.data < 0):
        raise ContractError("contrastive loss needs nonnegative energies")
    lab = np.asarray(label, float)
    pull = (1.0 - lab) * (energy * energy)
    slack = T.relu(margin - energy)
    push = lab * (slack * slack)
    return T.mean(pull + push)


LOSS_FOR_CONVENTION = {"signed_distance": "mse", "probability": "bce"}


def targets_for(spec: ModelSpec, labels: np.ndarray) -> np.ndarray:
    """Training targets per output convention.

    Signed distance: identical pairs target 0 (on the identical-pair level
    set) and different pairs target the label sign, +1 for the canonical
    ordering and -1 for swapped pairs, so labels pass through unchanged.
    Probability: labels must be plain 0/1 and are used directly.
    """
    labels = np.asarray(labels, float)
    if spec.output == "signed_distance":
        if not np.all(np.isin(labels, (-1.0, 0.0, 1.0))):
            raise ContractError("signed-distance labels must be in {-1, 0, 1}")
        return labels
    if not np.all(np.isin(labels, (0.0, 1.0))):
        raise ContractError("probability labels must be in {0, 1}")
    return labels


# -- serialization ---------------------------------------------------------

PARAMS_MAGIC = b"ABSG"
PARAMS_VERSION = 1


def save_params(params: Params, path):
    """Flat binary container: magic, version, then per-tensor records."""
    with open(path, "wb") as fh:
        fh.write(PARAMS_MAGIC)
        fh.write(struct.pack("<I", PARAMS_VERSION))
        for name, t in params.tensors.items():
            raw = name.encode("utf-8")
            fh.write(struct.pack("<I", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<I", t.data.ndim))
            fh.write(struct.pack(f"<{t.data.ndim}I", *t.data.shape))
            fh.write(np.ascontiguousarray(t.data, dtype="<f8").tobytes())


def load_params(path) -> Params:
    from absgen.errors import FormatError

    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:4] != PARAMS_MAGIC:
        raise FormatError(f"bad params magic {blob[:4]!r}, expected {PARAMS_MAGIC!r}")
    (version,) = struct.unpack_from("<I", blob, 4)
    if version != PARAMS_VERSION:
        raise FormatError(f"unsupported params version {version}")
    params = Params()
    off = 8
    while off < len(blob):
        (nlen,) = struct.unpack_from("<I", blob, off)
        off += 4
        name = blob[off : off + nlen].decode("utf-8")
        off += nlen
        (rank,) = struct.unpack_from("<I", blob, off)
        off += 4
        dims = struct.unpack_from(f"<{rank}I", blob, off)
        off += 4 * rank
        count = int(np.prod(dims)) if rank else 1
        data = np.frombuffer(blob, dtype="<f8", count=count, offset=off).reshape(dims)
        off += 8 * count
        params.tensors[name] = T.Tensor(data, requires_grad=True)
    return params
