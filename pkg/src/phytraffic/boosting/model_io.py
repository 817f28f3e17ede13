"""Versioned text persistence for trained models.

Layout: a version banner, `key value` header lines, then per-tree blocks.
Each tree is a preorder walk with one node per line: `n <feature>
<threshold>` for internal nodes, `l <value>` for leaves.  All floats are
written with repr, which round-trips float64 exactly, so a reloaded model
reproduces bit-identical predictions.
"""
from __future__ import annotations

from pathlib import Path

from ..errors import ValidationError
from .ensemble import BoostedModel, CartModel, ForestModel
from .linear import LogisticModel
from .tree import TreeNode, TreeParams

import numpy as np

FORMAT_VERSION = 1
_BANNER_PREFIX = "# phytraffic.model.v"


def _fmt(x) -> str:
    return repr(float(x))


def _write_tree(node: TreeNode, out: list[str]) -> int:
    if node.is_leaf:
        out.append(f"l {_fmt(node.value)}")
        return 1
    out.append(f"n {node.feature_index} {_fmt(node.threshold)}")
    n = 1
    n += _write_tree(node.left, out)
    n += _write_tree(node.right, out)
    return n


def _append_tree(tree: TreeNode, out: list[str]) -> None:
    body: list[str] = []
    count = _write_tree(tree, body)
    out.append(f"tree {count}")
    out.extend(body)


def _read_tree(lines, pos: int) -> tuple[TreeNode, int]:
    if pos >= len(lines):
        raise ValidationError("model file ends inside a tree block")
    parts = lines[pos].split()
    if parts[0] == "l" and len(parts) == 2:
        return TreeNode(value=float(parts[1])), pos + 1
    if parts[0] == "n" and len(parts) == 3:
        node = TreeNode(feature_index=int(parts[1]),
                        threshold=float(parts[2]))
        node.left, pos = _read_tree(lines, pos + 1)
        node.right, pos = _read_tree(lines, pos)
        return node, pos
    raise ValidationError(f"bad tree node line: {lines[pos]!r}")


def save_model(model, path) -> None:
    if not isinstance(model, (BoostedModel, ForestModel, CartModel,
                              LogisticModel)):
        raise ValidationError(f"cannot serialize {type(model).__name__}")
    out = [f"{_BANNER_PREFIX}{FORMAT_VERSION}"]
    fingerprint = model.schema_fingerprint or "-"
    if isinstance(model, BoostedModel):
        p = model.params
        out += [
            "kind gbdt",
            f"schema {fingerprint}",
            f"n_features {model.n_features}",
            f"learning_rate {_fmt(model.learning_rate)}",
            f"init_log_odds {_fmt(model.init_log_odds)}",
            f"max_leaves {p.max_leaves}",
            f"max_depth {p.max_depth}",
            f"bins {p.max_bins}",
            f"min_leaf {p.min_leaf}",
            f"n_trees {model.n_trees}",
        ]
        for tree in model.trees:
            _append_tree(tree, out)
    elif isinstance(model, ForestModel):
        out += [
            "kind rf",
            f"schema {fingerprint}",
            f"n_features {model.n_features}",
            f"bootstrap_seed {model.bootstrap_seed}",
            f"feature_subsample {_fmt(model.feature_subsample)}",
            f"max_depth {model.max_depth}",
            f"min_leaf {model.min_leaf}",
            f"n_trees {len(model.trees)}",
        ]
        for tree in model.trees:
            _append_tree(tree, out)
    elif isinstance(model, CartModel):
        out += [
            "kind cart",
            f"schema {fingerprint}",
            f"n_features {model.n_features}",
            f"max_depth {model.max_depth}",
            f"min_leaf {model.min_leaf}",
            "n_trees 1",
        ]
        _append_tree(model.tree, out)
    else:
        out += [
            "kind logistic",
            f"schema {fingerprint}",
            f"n_features {model.n_features}",
            f"bias {_fmt(model.bias)}",
            "weights " + " ".join(_fmt(v) for v in model.weights),
            "mean " + " ".join(_fmt(v) for v in model.mean),
            "scale " + " ".join(_fmt(v) for v in model.scale),
        ]
    Path(path).write_text("\n".join(out) + "\n")


def _parse_header(lines) -> tuple[dict[str, str], int]:
    header = {}
    pos = 1
    while pos < len(lines) and not lines[pos].startswith("tree "):
        key, _, value = lines[pos].partition(" ")
        header[key] = value
        pos += 1
    return header, pos


def _read_trees(lines, pos: int, expected: int) -> list[TreeNode]:
    trees = []
    for _ in range(expected):
        if pos >= len(lines) or not lines[pos].startswith("tree "):
            raise ValidationError("missing tree block")
        declared = int(lines[pos].split()[1])
        tree, new_pos = _read_tree(lines, pos + 1)
        if new_pos - (pos + 1) != declared:
            raise ValidationError("tree node count mismatch")
        trees.append(tree)
        pos = new_pos
    return trees


def load_model(path):
    text = Path(path).read_text()
    lines = [ln for ln in text.splitlines() if ln]
    if not lines or not lines[0].startswith(_BANNER_PREFIX):
        raise ValidationError(f"{path}: not a model file")
    version = int(lines[0][len(_BANNER_PREFIX):])
    if version > FORMAT_VERSION:
        raise ValidationError(
            f"{path}: format version {version} is newer than supported "
            f"{FORMAT_VERSION}")
    header, pos = _parse_header(lines)
    kind = header.get("kind")
    fingerprint = None if header.get("schema", "-") == "-" \
        else header["schema"]
    if kind == "gbdt":
        trees = _read_trees(lines, pos, int(header["n_trees"]))
        params = TreeParams(max_leaves=int(header["max_leaves"]),
                            max_depth=int(header["max_depth"]),
                            max_bins=int(header["bins"]),
                            min_leaf=int(header["min_leaf"]))
        return BoostedModel(init_log_odds=float(header["init_log_odds"]),
                            learning_rate=float(header["learning_rate"]),
                            trees=trees, n_features=int(header["n_features"]),
                            params=params, schema_fingerprint=fingerprint)
    if kind == "rf":
        trees = _read_trees(lines, pos, int(header["n_trees"]))
        return ForestModel(trees=trees,
                           bootstrap_seed=int(header["bootstrap_seed"]),
                           feature_subsample=float(header["feature_subsample"]),
                           n_features=int(header["n_features"]),
                           max_depth=int(header["max_depth"]),
                           min_leaf=int(header["min_leaf"]),
                           schema_fingerprint=fingerprint)
    if kind == "cart":
        trees = _read_trees(lines, pos, 1)
        return CartModel(tree=trees[0], n_features=int(header["n_features"]),
                         max_depth=int(header["max_depth"]),
                         min_leaf=int(header["min_leaf"]),
                         schema_fingerprint=fingerprint)
    if kind == "logistic":
        def vec(key):
            return np.array([float(tok) for tok in header[key].split()])
        return LogisticModel(weights=vec("weights"), bias=float(header["bias"]),
                             mean=vec("mean"), scale=vec("scale"),
                             n_features=int(header["n_features"]),
                             schema_fingerprint=fingerprint)
    raise ValidationError(f"{path}: unknown model kind {kind!r}")
