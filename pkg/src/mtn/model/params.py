"""Parameter store: layout, deterministic initialization, counting, files.

Parameter layout per variant (hidden size d, |V| vocabulary rows):

    embedding                    (|V|, d)
    container/default/*          gate bundle, 8d^2+4d   (all tree variants)
    container/<type>/*           gate bundle per enabled module type (mtn-b)
    module/<type>/*              per-type combination function (mtn-a, mtn-b)
    seq_lstm/*                   gate bundle (seq-lstm baseline)
    head/W, head/b               (M, d), (M, 1) when n_classes is set

Initialization is keyed by (seed, parameter name) through a counter-based
PRNG, so values do not depend on allocation order: weights are uniform in
[-1/sqrt(d), 1/sqrt(d)], biases zero, embeddings uniform in [-0.05, 0.05].
"""
from __future__ import annotations

import hashlib
import json

import numpy as np

from ..autodiff import Tensor
from .config import MODULE_TYPES, ModelConfig

MODEL_FORMAT = "mtn-model/1"

_GATES = ("i", "f", "o", "u")


class ModelFileError(Exception):
    pass


class GateBundle:
    """Per-gate W, U, b for an LSTM-style cell or unit container."""

    __slots__ = ("W_i", "U_i", "b_i", "W_f", "U_f", "b_f",
                 "W_o", "U_o", "b_o", "W_u", "U_u", "b_u")

    @classmethod
    def from_store(cls, tensors: dict[str, Tensor], prefix: str) -> "GateBundle":
        bundle = cls.__new__(cls)
        for g in _GATES:
            setattr(bundle, f"W_{g}", tensors[f"{prefix}/W_{g}"])
            setattr(bundle, f"U_{g}", tensors[f"{prefix}/U_{g}"])
            setattr(bundle, f"b_{g}", tensors[f"{prefix}/b_{g}"])
        return bundle


class PairModule:
    """tanh(W [left:right] + b) combination."""

    __slots__ = ("W", "b")

    def __init__(self, W: Tensor, b: Tensor):
        self.W = W
        self.b = b


class ForModule:
    __slots__ = ("W1", "b1", "W0", "b0")

    def __init__(self, W1, b1, W0, b0):
        self.W1 = W1
        self.b1 = b1
        self.W0 = W0
        self.b0 = b0


class CaseModule:
    __slots__ = ("cell", "W", "b")

    def __init__(self, cell: GateBundle, W: Tensor, b: Tensor):
        self.cell = cell
        self.W = W
        self.b = b


class SeqModule:
    __slots__ = ("cell",)

    def __init__(self, cell: GateBundle):
        self.cell = cell


def _gate_bundle_shapes(prefix: str, d: int) -> list[tuple[str, tuple[int, int], str]]:
    out = []
    for g in _GATES:
        out.append((f"{prefix}/W_{g}", (d, d), "weight"))
        out.append((f"{prefix}/U_{g}", (d, d), "weight"))
        out.append((f"{prefix}/b_{g}", (d, 1), "bias"))
    return out


def _module_shapes(mtype: str, d: int) -> list[tuple[str, tuple[int, int], str]]:
    p = f"module/{mtype}"
    if mtype in ("FuncDef", "While", "DoWhile", "Switch", "If"):
        return [(f"{p}/W", (d, 2 * d), "weight"), (f"{p}/b", (d, 1), "bias")]
    if mtype == "For":
        return [
            (f"{p}/W1", (d, 3 * d), "weight"), (f"{p}/b1", (d, 1), "bias"),
            (f"{p}/W0", (d, 2 * d), "weight"), (f"{p}/b0", (d, 1), "bias"),
        ]
    if mtype == "Case":
        return _gate_bundle_shapes(f"{p}/lstm", d) + [
            (f"{p}/W", (d, 2 * d), "weight"), (f"{p}/b", (d, 1), "bias"),
        ]
    if mtype == "Seq":
        return _gate_bundle_shapes(f"{p}/lstm", d)
    raise ValueError(f"unknown module type {mtype!r}")


def _layout(config: ModelConfig) -> list[tuple[str, tuple[int, int], str]]:
    d = config.hidden
    shapes: list[tuple[str, tuple[int, int], str]] = [
        ("embedding", (config.vocab_rows(), d), "embedding"),
    ]
    if config.variant in ("mtn-a", "mtn-b", "treelstm"):
        shapes.extend(_gate_bundle_shapes("container/default", d))
    if config.variant == "mtn-b":
        for mtype in config.enabled_modules:
            shapes.extend(_gate_bundle_shapes(f"container/{mtype}", d))
    if config.variant in ("mtn-a", "mtn-b"):
        for mtype in config.enabled_modules:
            shapes.extend(_module_shapes(mtype, d))
    if config.variant == "seq-lstm":
        shapes.extend(_gate_bundle_shapes("seq_lstm", d))
    if config.n_classes is not None:
        shapes.append(("head/W", (config.n_classes, d), "weight"))
        shapes.append(("head/b", (config.n_classes, 1), "bias"))
    return shapes


def _init_array(name: str, shape: tuple[int, int], kind: str, seed: int,
                d: int) -> np.ndarray:
    if kind == "bias":
        return np.zeros(shape)
    digest = hashlib.sha256(f"{seed}\x00{name}".encode()).digest()
    entropy = int.from_bytes(digest[:16], "big")
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
    if kind == "embedding":
        return rng.uniform(-0.05, 0.05, size=shape)
    bound = 1.0 / np.sqrt(d)
    return rng.uniform(-bound, bound, size=shape)


class ParamStore:
    """Named trainable tensors plus fast per-unit views."""

    def __init__(self, config: ModelConfig, tensors: dict[str, Tensor]):
        self.config = config
        self.tensors = tensors
        self._build_views()

    def _build_views(self) -> None:
        cfg = self.config
        t = self.tensors
        self.embedding = t["embedding"]
        self.containers: dict[str, GateBundle] = {}
        if cfg.variant in ("mtn-a", "mtn-b", "treelstm"):
            self.containers["default"] = GateBundle.from_store(
                t, "container/default")
        if cfg.variant == "mtn-b":
            for mtype in cfg.enabled_modules:
                self.containers[mtype] = GateBundle.from_store(
                    t, f"container/{mtype}")
        self.modules: dict[str, object] = {}
        if cfg.variant in ("mtn-a", "mtn-b"):
            for mtype in cfg.enabled_modules:
                p = f"module/{mtype}"
                if mtype in ("FuncDef", "While", "DoWhile", "Switch", "If"):
                    self.modules[mtype] = PairModule(t[f"{p}/W"], t[f"{p}/b"])
                elif mtype == "For":
                    self.modules[mtype] = ForModule(
                        t[f"{p}/W1"], t[f"{p}/b1"], t[f"{p}/W0"], t[f"{p}/b0"])
                elif mtype == "Case":
                    self.modules[mtype] = CaseModule(
                        GateBundle.from_store(t, f"{p}/lstm"),
                        t[f"{p}/W"], t[f"{p}/b"])
                elif mtype == "Seq":
                    self.modules[mtype] = SeqModule(
                        GateBundle.from_store(t, f"{p}/lstm"))
        self.seq_cell = (GateBundle.from_store(t, "seq_lstm")
                         if cfg.variant == "seq-lstm" else None)
        self.head = ((t["head/W"], t["head/b"])
                     if cfg.n_classes is not None else None)

    def names(self) -> list[str]:
        return list(self.tensors)

    def zero_grads(self) -> None:
        for t in self.tensors.values():
            t.grad = None

    def values_snapshot(self) -> dict[str, np.ndarray]:
        return {name: t.data.copy() for name, t in self.tensors.items()}

    def load_values(self, values: dict[str, np.ndarray]) -> None:
        for name, arr in values.items():
            self.tensors[name].data[...] = arr


def init_params(config: ModelConfig) -> ParamStore:
    """Allocate and deterministically initialize all parameters."""
    tensors: dict[str, Tensor] = {}
    for name, shape, kind in _layout(config):
        arr = _init_array(name, shape, kind, config.seed, config.hidden)
        tensors[name] = Tensor(arr, requires_grad=True)
    return ParamStore(config, tensors)


# --- counting ---------------------------------------------------------------

def table1_count(mtype: str, d: int) -> int:
    """Parameter count of one neural module at hidden size d."""
    if mtype in ("FuncDef", "While", "DoWhile", "Switch", "If"):
        return 2 * d * d + d
    if mtype == "For":
        return 5 * d * d + 2 * d
    if mtype == "Case":
        return 10 * d * d + 5 * d
    if mtype == "Seq":
        return 8 * d * d + 4 * d
    raise ValueError(f"unknown module type {mtype!r}")


def container_count(d: int) -> int:
    return 8 * d * d + 4 * d


def param_count(config: ModelConfig) -> dict[str, int]:
    """Closed-form parameter breakdown for a configuration.

    "encoder" excludes embeddings and the task head; "total" includes
    everything actually allocated.
    """
    d = config.hidden
    if config.variant == "seq-lstm":
        containers = 0
        modules = container_count(d)
    elif config.variant == "treelstm":
        containers = container_count(d)
        modules = 0
    else:
        n_containers = 1
        if config.variant == "mtn-b":
            n_containers += len(config.enabled_modules)
        containers = n_containers * container_count(d)
        modules = sum(table1_count(m, d) for m in config.enabled_modules)
    embeddings = config.vocab_rows() * d
    head = 0
    if config.n_classes is not None:
        head = config.n_classes * d + config.n_classes
    encoder = containers + modules
    return {
        "containers": containers,
        "modules": modules,
        "encoder": encoder,
        "embeddings": embeddings,
        "head": head,
        "total": encoder + embeddings + head,
    }


# --- model files ------------------------------------------------------------

def model_to_json(store: ParamStore) -> str:
    """Serialize config and parameters; byte-deterministic."""
    doc = {
        "format": MODEL_FORMAT,
        "config": store.config.to_json_dict(),
        "params": {name: t.data.reshape(-1).tolist()
                   for name, t in store.tensors.items()},
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"))


def save_model(store: ParamStore, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(model_to_json(store))
        fh.write("\n")


def model_from_json(text: str) -> ParamStore:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"invalid JSON: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFileError(f"expected format {MODEL_FORMAT!r}")
    config = ModelConfig.from_json_dict(doc["config"])
    params = doc["params"]
    tensors: dict[str, Tensor] = {}
    expected = _layout(config)
    for name, shape, _kind in expected:
        if name not in params:
            raise ModelFileError(f"missing parameter {name!r}")
        flat = params[name]
        if len(flat) != shape[0] * shape[1]:
            raise ModelFileError(
                f"parameter {name!r} has {len(flat)} values, "
                f"expected {shape[0] * shape[1]} for shape {shape}")
        arr = np.asarray(flat, dtype=np.float64).reshape(shape)
        tensors[name] = Tensor(arr, requires_grad=True)
    extra = set(params) - {name for name, _, _ in expected}
    if extra:
        raise ModelFileError(f"unexpected parameters {sorted(extra)}")
    return ParamStore(config, tensors)


def load_model(path) -> ParamStore:
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_json(fh.read())
