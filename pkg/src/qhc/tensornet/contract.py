"""Labelled tensors and order-independent network contraction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass
class Tensor:
    legs: list  # [(label, dim), ...]
    data: np.ndarray

    def __post_init__(self):
        self.legs = [(str(l), int(d)) for l, d in self.legs]
        self.data = np.asarray(self.data, dtype=complex).reshape([d for _, d in self.legs])
        labels = [l for l, _ in self.legs]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate leg labels {labels}")

    @property
    def labels(self):
        return [l for l, _ in self.legs]

    def axis(self, label):
        return self.labels.index(label)

    def transpose(self, labels):
        perm = [self.axis(l) for l in labels]
        return Tensor([self.legs[p] for p in perm], self.data.transpose(perm))


class TensorNetwork:
    """Nodes are tensors; edges join ``(node, label)`` pairs."""

    def __init__(self, nodes, edges=()):
        self.nodes = list(nodes)
        self.edges = []
        used = set()
        for (a, la), (b, lb) in edges:
            for end in ((a, la), (b, lb)):
                if end in used:
                    raise ValueError(f"leg {end} used by more than one edge")
                used.add(end)
            da = self.nodes[a].data.shape[self.nodes[a].axis(la)]
            db = self.nodes[b].data.shape[self.nodes[b].axis(lb)]
            if da != db:
                raise ValueError(f"dimension mismatch on edge {(a, la)}-{(b, lb)}: {da} != {db}")
            self.edges.append(((a, la), (b, lb)))
        self.open = [(i, l) for i, t in enumerate(self.nodes) for l in t.labels if (i, l) not in used]
        labels = [l for _, l in self.open]
        if len(set(labels)) != len(labels):
            raise ValueError(f"open-leg label collision: {labels}")


def contract(net: TensorNetwork, order=None) -> Tensor:
    """Contract every edge of ``net``; result legs follow node order then leg order.

    ``order`` is an optional permutation of edge indices.
    """
    order = list(range(len(net.edges))) if order is None else list(order)
    if sorted(order) != list(range(len(net.edges))):
        raise ValueError("order must be a permutation of the edge indices")
    # groups: id -> (array, [(node, label) per axis])
    groups = {i: (t.data, [(i, l) for l in t.labels]) for i, t in enumerate(net.nodes)}
    owner = {i: i for i in range(len(net.nodes))}

    def find(i):
        while owner[i] != i:
            owner[i] = owner[owner[i]]
            i = owner[i]
        return i

    for e in order:
        (a, la), (b, lb) = net.edges[e]
        ga, gb = find(a), find(b)
        if ga == gb:
            arr, keys = groups[ga]
            ia, ib = keys.index((a, la)), keys.index((b, lb))
            arr = np.trace(arr, axis1=ia, axis2=ib)
            keys = [k for j, k in enumerate(keys) if j not in (ia, ib)]
            groups[ga] = (arr, keys)
        else:
            A, ka = groups.pop(ga)
            B, kb = groups.pop(gb)
            ia, ib = ka.index((a, la)), kb.index((b, lb))
            arr = np.tensordot(A, B, axes=([ia], [ib]))
            keys = [k for j, k in enumerate(ka) if j != ia] + [k for j, k in enumerate(kb) if j != ib]
            owner[gb] = ga
            groups[ga] = (arr, keys)
    # outer product of disconnected pieces
    arr, keys = np.ones(()), []
    for g in sorted(groups):
        A, ka = groups[g]
        arr = np.tensordot(arr, A, axes=0)
        keys += ka
    perm = [keys.index(k) for k in net.open]
    arr = np.transpose(arr, perm) if perm else arr
    legs = [(l, net.nodes[i].data.shape[net.nodes[i].axis(l)]) for i, l in net.open]
    return Tensor(legs, arr)


def matrix_tensor(m, rows="i", cols="j"):
    m = np.asarray(m)
    return Tensor([(rows, m.shape[0]), (cols, m.shape[1])], m)
