"""Self-describing text files for networks and their k-trees.

A network file is JSON with sorted keys, so serialization is canonical:
saving a freshly loaded file reproduces it byte for byte. The CPT cell
order is declared in the file (last parent varying fastest), variables
carry their state labels, and the companion k-tree section, when
present, stores the clique list and attachment links needed to rebuild
the junction tree without re-triangulating.
"""

from __future__ import annotations

import json
from typing import Dict, Optional, Tuple

from .inference import BayesNet
from .ktree import KTree

FORMAT_NAME = "ktbn-network"
FORMAT_VERSION = 1
CPT_ORDER = "last_parent_fastest"


def save_network(net: BayesNet, path: str, metadata: Optional[Dict] = None) -> None:
    """Write a network (and its k-tree, if any) as canonical JSON."""
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "cpt_order": CPT_ORDER,
        "variables": [
            {"name": name, "states": list(states)}
            for name, states in zip(net.variables, net.states)
        ],
        "parents": [list(net.parents[v]) for v in range(net.n_variables)],
        "cpts": [net.cpts[v].ravel().tolist() for v in range(net.n_variables)],
        "ktree": None,
        "metadata": metadata if metadata is not None else {},
    }
    if net.ktree is not None:
        doc["ktree"] = {
            "k": net.ktree.k,
            "cliques": [sorted(c) for c in net.ktree.cliques],
            "parent_links": list(net.ktree.parent_clique),
        }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")


def load_network(path: str) -> Tuple[BayesNet, Dict]:
    """Read a network file; returns the network and its metadata dict."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format") != FORMAT_NAME:
        raise ValueError(f"{path}: not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported version {doc.get('version')!r}")
    if doc.get("cpt_order") != CPT_ORDER:
        raise ValueError(f"{path}: unsupported cpt_order {doc.get('cpt_order')!r}")
    variables = tuple(v["name"] for v in doc["variables"])
    states = tuple(tuple(v["states"]) for v in doc["variables"])
    n = len(variables)
    parents = {v: tuple(doc["parents"][v]) for v in range(n)}
    import numpy as np

    cpts = []
    for v in range(n):
        space = 1
        for p in parents[v]:
            space *= len(states[p])
        cpts.append(np.array(doc["cpts"][v], dtype=np.float64).reshape(space, len(states[v])))
    kt = None
    if doc.get("ktree") is not None:
        sec = doc["ktree"]
        kt = KTree.from_cliques(sec["k"], sec["cliques"], sec.get("parent_links"))
    net = BayesNet(variables=variables, states=states, parents=parents, cpts=cpts, ktree=kt)
    return net, doc.get("metadata", {})
