"""Versioned model files: canonical JSON plus a CRC-32 trailer.

The document is emitted by a deterministic writer (sorted keys, floats at
17 significant digits so every float64 round-trips exactly), followed by
one line ``crc32 <hex>`` over the JSON bytes. Loading verifies the
checksum before parsing, so a corrupt or truncated file never yields a
partial model. Both model variants share the schema: ``centroid`` for the
clustering forest and ``axis_split`` for the CART baseline.
"""

from __future__ import annotations

import json
import math
import zlib

import numpy as np

from .baseline import CartEnsemble, CartNode, CartTree
from .clustering import NoiseConfig
from .data import NormParams, SampleSet
from .errors import ModelFormatError
from .forest import Forest, ForestConfig, Tree, TreeNode
from .weights import EtaState, FeatureWeights, PearsonState

FORMAT_VERSION = 1


# ---------------------------------------------------------------------------
# canonical JSON writer
# ---------------------------------------------------------------------------


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise ModelFormatError("non-finite value in model")
    if x == 0.0:
        return "0"
    return format(x, ".17g")


def _emit(obj, out: list):
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _emit(item, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(key))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    else:
        raise ModelFormatError(f"cannot serialize {type(obj).__name__}")


def emit_json(obj) -> str:
    out: list = []
    _emit(obj, out)
    return "".join(out)


# ---------------------------------------------------------------------------
# document building
# ---------------------------------------------------------------------------


def _node_doc(node: TreeNode) -> dict:
    doc = {"centroid": node.centroid, "depth": node.depth}
    if node.is_leaf:
        doc["payload"] = node.payload
    else:
        doc["children"] = [_node_doc(c) for c in node.children]
    return doc


def _weights_doc(w: FeatureWeights) -> dict:
    return {"raw": w.raw, "normalized": w.normalized, "uniform_fallback": w.uniform_fallback}


def _state_doc(state) -> dict:
    if isinstance(state, PearsonState):
        return {
            "method": "pearson",
            "n": state.n,
            "mu_x": state.mu_x,
            "mu_y": state.mu_y,
            "sum_xy": state.sum_xy,
            "ss_x": state.ss_x,
            "ss_y": state.ss_y,
        }
    return {
        "method": "eta",
        "n": state.n,
        "mu_x": state.mu_x,
        "class_counts": state.class_counts,
        "mu_xc": [row for row in state.mu_xc],
        "ss_t": state.ss_t,
    }


def _noise_doc(noise: NoiseConfig) -> dict:
    return {
        "eps1": noise.eps1,
        "delta_fail": noise.delta_fail,
        "delta_tie": noise.delta_tie,
        "eps4": noise.eps4,
        "eps2": noise.eps2,
        "seed": noise.seed,
    }


def _config_doc(config: ForestConfig) -> dict:
    return {
        "n_trees": config.n_trees,
        "k": config.k,
        "max_depth": config.max_depth,
        "weight_method": config.weight_method,
        "draw_size": config.draw_size,
        "draw_size_new": config.draw_size_new,
        "noise": _noise_doc(config.noise),
        "seed": config.seed,
        "min_leaf": config.min_leaf,
        "max_iter": config.max_iter,
        "tol": config.tol,
    }


def _forest_doc(f: Forest) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "variant": "centroid",
        "task": f.task,
        "classes": list(f.classes),
        "feature_names": list(f.feature_names),
        "config": _config_doc(f.config),
        "norm": None
        if f.norm is None
        else {
            "mean": f.norm.mean,
            "std": f.norm.std,
            "zero_variance": [bool(z) for z in f.norm.zero_variance],
        },
        "weight_states": [_state_doc(s) for s in f.weight_states],
        "sample_indices": [s.indices for s in f.sample_sets],
        "trees": [
            {
                "k": t.k,
                "max_depth": t.max_depth,
                "weights": _weights_doc(t.weights),
                "root": _node_doc(t.root),
            }
            for t in f.trees
        ],
    }


def _cart_node_doc(node: CartNode) -> dict:
    if node.is_leaf:
        return {"depth": node.depth, "payload": node.payload}
    return {
        "depth": node.depth,
        "feature": node.feature,
        "threshold": node.threshold,
        "left": _cart_node_doc(node.left),
        "right": _cart_node_doc(node.right),
    }


def _cart_doc(e: CartEnsemble) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "variant": "axis_split",
        "task": e.task,
        "classes": list(e.classes),
        "feature_names": list(e.feature_names),
        "config": {
            "n_trees": e.n_trees_config,
            "max_depth": e.max_depth,
            "min_leaf": e.min_leaf,
            "draw_size": e.draw_size,
            "seed": e.seed,
        },
        "sample_indices": [s.indices for s in e.sample_sets],
        "trees": [{"max_depth": t.max_depth, "root": _cart_node_doc(t.root)} for t in e.trees],
    }


# ---------------------------------------------------------------------------
# document parsing
# ---------------------------------------------------------------------------


def _payload_from_doc(p):
    if isinstance(p, list):
        return np.asarray(p, dtype=np.float64)
    return float(p)


def _node_from_doc(doc) -> TreeNode:
    node = TreeNode(
        centroid=np.asarray(doc["centroid"], dtype=np.float64), depth=int(doc["depth"])
    )
    if "children" in doc:
        node.children = [_node_from_doc(c) for c in doc["children"]]
    else:
        node.payload = _payload_from_doc(doc["payload"])
    return node


def _weights_from_doc(doc) -> FeatureWeights:
    return FeatureWeights(
        raw=np.asarray(doc["raw"], dtype=np.float64),
        normalized=np.asarray(doc["normalized"], dtype=np.float64),
        uniform_fallback=bool(doc["uniform_fallback"]),
    )


def _state_from_doc(doc):
    if doc["method"] == "pearson":
        return PearsonState(
            n=int(doc["n"]),
            mu_x=np.asarray(doc["mu_x"], dtype=np.float64),
            mu_y=float(doc["mu_y"]),
            sum_xy=np.asarray(doc["sum_xy"], dtype=np.float64),
            ss_x=np.asarray(doc["ss_x"], dtype=np.float64),
            ss_y=float(doc["ss_y"]),
        )
    if doc["method"] == "eta":
        return EtaState(
            n=int(doc["n"]),
            mu_x=np.asarray(doc["mu_x"], dtype=np.float64),
            class_counts=np.asarray(doc["class_counts"], dtype=np.float64),
            mu_xc=np.asarray(doc["mu_xc"], dtype=np.float64),
            ss_t=np.asarray(doc["ss_t"], dtype=np.float64),
        )
    raise ModelFormatError(f"unknown weight state method {doc['method']!r}")


def _config_from_doc(doc) -> ForestConfig:
    nd = doc["noise"]
    return ForestConfig(
        n_trees=int(doc["n_trees"]),
        k=int(doc["k"]),
        max_depth=int(doc["max_depth"]),
        weight_method=doc["weight_method"],
        draw_size=None if doc["draw_size"] is None else int(doc["draw_size"]),
        draw_size_new=None if doc["draw_size_new"] is None else int(doc["draw_size_new"]),
        noise=NoiseConfig(
            eps1=float(nd["eps1"]),
            delta_fail=float(nd["delta_fail"]),
            delta_tie=float(nd["delta_tie"]),
            eps4=float(nd["eps4"]),
            eps2=float(nd["eps2"]),
            seed=int(nd["seed"]),
        ),
        seed=int(doc["seed"]),
        min_leaf=int(doc["min_leaf"]),
        max_iter=int(doc["max_iter"]),
        tol=float(doc["tol"]),
    )


def _forest_from_doc(doc) -> Forest:
    return Forest(
        trees=[
            Tree(
                root=_node_from_doc(t["root"]),
                weights=_weights_from_doc(t["weights"]),
                k=int(t["k"]),
                max_depth=int(t["max_depth"]),
            )
            for t in doc["trees"]
        ],
        task=doc["task"],
        classes=tuple(doc["classes"]),
        feature_names=tuple(doc["feature_names"]),
        sample_sets=[SampleSet(np.asarray(s, dtype=np.int64)) for s in doc["sample_indices"]],
        weight_states=[_state_from_doc(s) for s in doc["weight_states"]],
        config=_config_from_doc(doc["config"]),
        norm=None
        if doc["norm"] is None
        else NormParams(
            mean=np.asarray(doc["norm"]["mean"], dtype=np.float64),
            std=np.asarray(doc["norm"]["std"], dtype=np.float64),
            zero_variance=np.asarray(doc["norm"]["zero_variance"], dtype=bool),
        ),
    )


def _cart_node_from_doc(doc) -> CartNode:
    if "feature" not in doc:
        return CartNode(depth=int(doc["depth"]), payload=_payload_from_doc(doc["payload"]))
    return CartNode(
        depth=int(doc["depth"]),
        feature=int(doc["feature"]),
        threshold=float(doc["threshold"]),
        left=_cart_node_from_doc(doc["left"]),
        right=_cart_node_from_doc(doc["right"]),
    )


def _cart_from_doc(doc) -> CartEnsemble:
    cfg = doc["config"]
    return CartEnsemble(
        trees=[
            CartTree(root=_cart_node_from_doc(t["root"]), max_depth=int(t["max_depth"]))
            for t in doc["trees"]
        ],
        task=doc["task"],
        classes=tuple(doc["classes"]),
        feature_names=tuple(doc["feature_names"]),
        sample_sets=[SampleSet(np.asarray(s, dtype=np.int64)) for s in doc["sample_indices"]],
        n_trees_config=int(cfg["n_trees"]),
        max_depth=int(cfg["max_depth"]),
        min_leaf=int(cfg["min_leaf"]),
        draw_size=None if cfg["draw_size"] is None else int(cfg["draw_size"]),
        seed=int(cfg["seed"]),
    )


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------


def save_model(model, path) -> None:
    """Write a forest or baseline ensemble; identical models give identical bytes."""
    if isinstance(model, Forest):
        doc = _forest_doc(model)
    elif isinstance(model, CartEnsemble):
        doc = _cart_doc(model)
    else:
        raise ModelFormatError(f"cannot save a {type(model).__name__}")
    text = emit_json(doc) + "\n"
    crc = zlib.crc32(text.encode("utf-8")) & 0xFFFFFFFF
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
        fh.write(f"crc32 {crc:08x}\n")


def load_model(path):
    """Read a model file back; checksum and version are verified first."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        content = fh.read()
    body, sep, trailer = content.rstrip("\n").rpartition("\n")
    if not sep or not trailer.startswith("crc32 "):
        raise ModelFormatError(f"{path}: missing checksum trailer (truncated?)")
    try:
        expected = int(trailer.split(" ", 1)[1], 16)
    except ValueError:
        raise ModelFormatError(f"{path}: malformed checksum line") from None
    actual = zlib.crc32((body + "\n").encode("utf-8")) & 0xFFFFFFFF
    if actual != expected:
        raise ModelFormatError(f"{path}: checksum mismatch (file corrupt)")
    try:
        doc = json.loads(body)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"{path}: invalid JSON body: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(
            f"{path}: unsupported format version {doc.get('format_version')!r}"
        )
    variant = doc.get("variant")
    if variant == "centroid":
        return _forest_from_doc(doc)
    if variant == "axis_split":
        return _cart_from_doc(doc)
    raise ModelFormatError(f"{path}: unknown variant {variant!r}")
