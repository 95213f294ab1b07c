"""Rooted binary phylogenetic trees and count aggregation.

Internal nodes are identified with the subset of OTU leaves below them.
Node ids live in a single integer space: ``0..K-1`` are leaves (in input
order), ``K..2K-2`` are internal nodes in deterministic post-order, so a
child's id is always smaller than its parent's and the root comes last.
"""

from __future__ import annotations

import numpy as np


class NewickError(ValueError):
    """Malformed Newick input; ``pos`` is the character offset."""

    def __init__(self, message, pos=None):
        if pos is not None:
            message = f"{message} (at position {pos})"
        super().__init__(message)
        self.pos = pos


class PhyloTree:
    """A strictly binary rooted tree over named OTU leaves.

    Parameters
    ----------
    leaves : sequence of str
        OTU labels in input order.
    first_child, second_child : sequence of int
        Per internal node (post-order), the node id of each child.
    """

    def __init__(self, leaves, first_child, second_child):
        self.leaves = tuple(leaves)
        self.first_child = tuple(first_child)
        self.second_child = tuple(second_child)
        k = len(self.leaves)
        n_int = len(self.first_child)
        if len(self.second_child) != n_int:
            raise ValueError("child maps must have equal length")
        if k >= 2 and n_int != k - 1:
            raise ValueError(f"binary tree with {k} leaves needs {k - 1} internal nodes, got {n_int}")
        self.n_leaves = k
        self.n_internal = n_int
        self.root = k + n_int - 1 if n_int else 0

        # Post-order guarantees children are resolved before their parent.
        sets = []
        for a in range(n_int):
            parts = []
            for child in (self.first_child[a], self.second_child[a]):
                if child < k:
                    parts.append(frozenset([self.leaves[child]]))
                else:
                    parts.append(sets[child - k])
            if parts[0] & parts[1]:
                raise ValueError(f"children of internal node {a} overlap")
            sets.append(parts[0] | parts[1])
        self._leafsets = tuple(sets)

    @property
    def internal_leafsets(self):
        """Leaf-label set for each internal node, post-order."""
        return self._leafsets

    def leafset(self, node_id):
        if node_id < self.n_leaves:
            return frozenset([self.leaves[node_id]])
        return self._leafsets[node_id - self.n_leaves]

    def node_label(self, node_id):
        """Stable display label: leaf name, or ``nI`` for internal index I."""
        if node_id < self.n_leaves:
            return self.leaves[node_id]
        return f"n{node_id - self.n_leaves}"

    def internal_label(self, internal_index):
        return f"n{internal_index}"

    def to_newick(self):
        """Canonical serialization (topology only, no branch lengths)."""
        if self.n_internal == 0:
            return f"{self.leaves[0]};" if self.n_leaves else ";"

        def render(node_id):
            if node_id < self.n_leaves:
                return self.leaves[node_id]
            a = node_id - self.n_leaves
            return f"({render(self.first_child[a])},{render(self.second_child[a])})"

        return render(self.root) + ";"

    def __repr__(self):
        return f"PhyloTree(n_leaves={self.n_leaves}, n_internal={self.n_internal})"


def _tokenize(text):
    """Yield (kind, value, pos) tokens for a Newick string."""
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "(),;":
            yield c, c, i
            i += 1
        elif c == ":":
            j = i + 1
            while j < n and (text[j].isdigit() or text[j] in ".+-eE"):
                j += 1
            if j == i + 1:
                raise NewickError("expected branch length after ':'", i)
            yield "length", text[i + 1 : j], i
            i = j
        elif c == "'":
            j = text.find("'", i + 1)
            if j < 0:
                raise NewickError("unterminated quoted label", i)
            yield "label", text[i + 1 : j], i
            i = j + 1
        else:
            j = i
            while j < n and text[j] not in "(),;:" and not text[j].isspace():
                j += 1
            yield "label", text[i:j], i
            i = j


def parse_newick(text):
    """Parse a Newick string into a binary :class:`PhyloTree`.

    Multifurcations are resolved into a left-comb binary expansion in input
    order; branch lengths and internal-node labels are parsed and discarded.
    """
    if not isinstance(text, str):
        raise TypeError("Newick input must be a string")

    tokens = list(_tokenize(text))
    if not tokens:
        raise NewickError("empty tree", 0)

    leaves = []
    leaf_index = {}

    # Nodes under construction: leaves as (id,), clades as list of node handles.
    stack = []
    current = None  # handle of the node just closed or named
    root = None
    depth = 0
    expects_item = True  # inside a clade, a ',' or '(' announces a new item

    def new_leaf(label, pos):
        if label == "":
            raise NewickError("empty leaf label", pos)
        if label in leaf_index:
            raise NewickError(f"duplicate leaf label {label!r}", pos)
        leaf_index[label] = len(leaves)
        leaves.append(label)
        return ("leaf", leaf_index[label])

    it = iter(tokens)
    for kind, value, pos in it:
        if kind == "(":
            stack.append([])
            depth += 1
            expects_item = True
            current = None
        elif kind == ",":
            if not stack:
                raise NewickError("',' outside parentheses", pos)
            if current is None:
                raise NewickError("missing item before ','", pos)
            stack[-1].append(current)
            current = None
            expects_item = True
        elif kind == ")":
            if not stack:
                raise NewickError("unbalanced ')'", pos)
            if current is None:
                raise NewickError("missing item before ')'", pos)
            stack[-1].append(current)
            children = stack.pop()
            depth -= 1
            if len(children) == 1:
                current = children[0]  # collapse unary node
            else:
                current = ("clade", children)
            expects_item = False
        elif kind == "label":
            if expects_item and current is None:
                current = new_leaf(value, pos)
                expects_item = False
            else:
                pass  # internal node label: discard
        elif kind == "length":
            if current is None:
                raise NewickError("branch length with no node", pos)
        elif kind == ";":
            break

    if stack:
        raise NewickError("unbalanced '(' — tree not closed", len(text))
    if current is None:
        raise NewickError("empty tree", 0)

    k = len(leaves)
    first_child, second_child = [], []

    def build(node):
        """Return the node id, appending internal nodes in post-order."""
        if node[0] == "leaf":
            return node[1]
        children = [build(c) for c in node[1]]
        # Left-comb expansion of multifurcations, in input order.
        left = children[0]
        for right in children[1:]:
            first_child.append(left)
            second_child.append(right)
            left = k + len(first_child) - 1
        return left

    build(current)
    return PhyloTree(leaves, first_child, second_child)


class NodeCountTable:
    """Per-sample counts on every node of a tree.

    ``counts[:, j]`` for ``j < K`` are the input OTU counts; columns
    ``K..K+n_internal-1`` are internal-node totals in post-order.
    """

    def __init__(self, tree, counts):
        self.tree = tree
        self.counts = counts  # (n_samples, K + n_internal) int64

    @property
    def n_samples(self):
        return self.counts.shape[0]

    def node_total(self, node_id):
        return self.counts[:, node_id]

    def internal_total(self, internal_index):
        return self.counts[:, self.tree.n_leaves + internal_index]

    def first_child_count(self, internal_index):
        return self.counts[:, self.tree.first_child[internal_index]]

    def depth(self):
        """Sequencing depth x_Omega per sample."""
        if self.tree.n_internal:
            return self.internal_total(self.tree.n_internal - 1)
        return self.counts[:, 0]


def aggregate_counts(tree, otu_counts):
    """Sum per-sample OTU counts up the tree.

    Parameters
    ----------
    tree : PhyloTree
    otu_counts : array-like, shape (n_samples, K) or (K,)
        Columns aligned with ``tree.leaves``.
    """
    x = np.asarray(otu_counts)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != tree.n_leaves:
        raise ValueError(f"count table must have {tree.n_leaves} columns, got shape {x.shape}")
    if not np.issubdtype(x.dtype, np.integer):
        rounded = np.rint(x)
        if not np.array_equal(rounded, x):
            raise ValueError("counts must be integers")
        x = rounded
    if (x < 0).any():
        raise ValueError("counts must be nonnegative")
    x = x.astype(np.int64)

    n = x.shape[0]
    full = np.empty((n, tree.n_leaves + tree.n_internal), dtype=np.int64)
    full[:, : tree.n_leaves] = x
    for a in range(tree.n_internal):
        c, d = tree.first_child[a], tree.second_child[a]
        full[:, tree.n_leaves + a] = full[:, c] + full[:, d]
    return NodeCountTable(tree, full)
