"""Parameterized partition trees: height cuts and recursive coalitional values.

A partition tree has leaves in bijection with players, heights in [0, 1]
(leaves at 0, root at the top), and every internal node with at least two
children.  Cutting at a height yields a partition; the family of cuts is
nested.  Recursive values generalize the two-step formulation: games flow
top-down through intermediate games, and per-node numbers flow back.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from ._backend import kernels
from .coalitions import CoalitionalValueSpec, _WTABLE
from .games import Game, GameError, Partition, center, full_mask, members

HEIGHT_EPS = 1e-9


@dataclass
class TreeNode:
    id: int
    height: float
    parent: int | None
    children: tuple[int, ...]
    leaf_player: int | None = None

    @property
    def is_leaf(self) -> bool:
        return self.leaf_player is not None


class PartitionTree:
    """Rooted tree over players 0..n-1 with heights encoding merge strength."""

    def __init__(self, nodes: Iterable[TreeNode], root: int,
                 metadata: dict | None = None):
        self.nodes: dict[int, TreeNode] = {node.id: node for node in nodes}
        self.root = root
        self.metadata = dict(metadata or {})
        self._repair_duplicate_heights()
        self._validate()
        self._leaf_masks: dict[int, int] = {}
        self._fill_masks(root)

    # -- construction ------------------------------------------------------

    @classmethod
    def from_merges(cls, n: int, merges: list[tuple[int, int, float]],
                    metadata: dict | None = None) -> "PartitionTree":
        """Build from an agglomerative merge sequence.

        ``merges[k] = (a, b, height)`` joins clusters ``a`` and ``b`` into
        cluster ``n + k`` (leaves are clusters ``0..n-1``), as in a linkage
        matrix.
        """
        if len(merges) != n - 1:
            raise GameError(f"{n} leaves need exactly {n - 1} merges")
        nodes = [TreeNode(i, 0.0, None, (), leaf_player=i) for i in range(n)]
        for k, (a, b, height) in enumerate(merges):
            nid = n + k
            nodes.append(TreeNode(nid, float(height), None, (int(a), int(b))))
        by_id = {node.id: node for node in nodes}
        for node in nodes:
            for child in node.children:
                by_id[child].parent = node.id
        return cls(nodes, root=2 * n - 2, metadata=metadata)

    @classmethod
    def from_nested(cls, structure, heights: dict[int, float] | None = None,
                    root_height: float = 1.0) -> "PartitionTree":
        """Build from nested lists of player indices, e.g. ``[[0, 1], [2]]``.

        Internal node heights default to a fraction of the parent height;
        pass ``heights`` keyed by node id to control them.
        """
        nodes: list[TreeNode] = []
        counter = [0]

        def build(spec, depth: int) -> int:
            nid = counter[0]
            counter[0] += 1
            if isinstance(spec, int):
                nodes.append(TreeNode(nid, 0.0, None, (), leaf_player=spec))
                return nid
            kids = tuple(build(s, depth + 1) for s in spec)
            # default heights: shrink with depth, tiny id-dependent offset
            # keeps same-depth internal nodes distinct
            h = root_height * (2.0 / 3.0) ** depth * (1.0 - 1e-4 * nid) \
                if depth else root_height
            nodes.append(TreeNode(nid, h, None, kids))
            return nid

        root = build(structure, 0)
        by_id = {node.id: node for node in nodes}
        if heights:
            for nid, h in heights.items():
                by_id[nid].height = float(h)
        for node in nodes:
            for child in node.children:
                by_id[child].parent = node.id
        return cls(nodes, root=root)

    # -- validation --------------------------------------------------------

    def _repair_duplicate_heights(self) -> None:
        seen: dict[float, int] = {}
        bumped = 0
        for node in self.nodes.values():
            if node.is_leaf:
                continue
            while node.height in seen:
                bumped += 1
                node.height += bumped * HEIGHT_EPS
            seen[node.height] = node.id
        if bumped:
            warnings.warn(f"adjusted {bumped} tied internal heights by multiples "
                          f"of {HEIGHT_EPS} to keep them distinct", stacklevel=3)

    def _validate(self) -> None:
        root = self.nodes.get(self.root)
        if root is None or root.parent is not None:
            raise GameError("root must exist and have no parent")
        if not 0.0 < root.height <= 1.0:
            raise GameError(f"root height must lie in (0, 1], got {root.height}")
        players = []
        for node in self.nodes.values():
            if node.is_leaf:
                if node.height != 0.0:
                    raise GameError(f"leaf {node.id} must sit at height 0")
                if node.children:
                    raise GameError(f"leaf {node.id} cannot have children")
                players.append(node.leaf_player)
            else:
                if len(node.children) < 2:
                    raise GameError(f"internal node {node.id} needs >= 2 children")
                for child in node.children:
                    ch = self.nodes[child]
                    if ch.parent != node.id:
                        raise GameError(f"child {child} does not point back to {node.id}")
                    if ch.height >= node.height:
                        raise GameError(f"child {child} at height {ch.height} is not "
                                        f"below parent {node.id} at {node.height}")
        if sorted(players) != list(range(len(players))):
            raise GameError("leaf players must be a bijection onto 0..n-1")
        self.n = len(players)

    def _fill_masks(self, nid: int) -> int:
        node = self.nodes[nid]
        if node.is_leaf:
            mask = 1 << node.leaf_player
        else:
            mask = 0
            for child in node.children:
                mask |= self._fill_masks(child)
        self._leaf_masks[nid] = mask
        return mask

    # -- queries -----------------------------------------------------------

    def player_set(self, nid: int) -> int:
        """Bitmask of the players at the leaves below node ``nid``."""
        return self._leaf_masks[nid]

    def leaves(self) -> list[int]:
        ordered = [nid for nid, node in self.nodes.items() if node.is_leaf]
        return sorted(ordered, key=lambda nid: self.nodes[nid].leaf_player)

    def internal_nodes(self) -> list[int]:
        return [nid for nid, node in self.nodes.items() if not node.is_leaf]

    def cut(self, alpha: float) -> Partition:
        """Partition at height ``alpha``: nodes just below the cross-section.

        ``alpha = 0`` yields singletons; above the root height the grand
        coalition.  Blocks are ordered by smallest player index.
        """
        if alpha < 0:
            raise GameError(f"cut height must be >= 0, got {alpha}")
        if alpha == 0:
            chosen = self.leaves()
        else:
            chosen = []
            for nid, node in self.nodes.items():
                parent_h = (np.inf if node.parent is None
                            else self.nodes[node.parent].height)
                if node.height < alpha <= parent_h:
                    chosen.append(nid)
        blocks = sorted((self.player_set(nid) for nid in chosen),
                        key=lambda mask: mask & -mask)
        return Partition(tuple(blocks), self.n)

    def cut_nodes(self, alpha: float) -> list[int]:
        """Node ids forming the cut at ``alpha``, ordered like ``cut(alpha)``."""
        if alpha < 0:
            raise GameError(f"cut height must be >= 0, got {alpha}")
        if alpha == 0:
            chosen = self.leaves()
        else:
            chosen = [nid for nid, node in self.nodes.items()
                      if node.height < alpha <=
                      (np.inf if node.parent is None
                       else self.nodes[node.parent].height)]
        return sorted(chosen, key=lambda nid: self.player_set(nid) & -self.player_set(nid))

    def merge_heights(self) -> list[float]:
        return sorted(self.nodes[nid].height for nid in self.internal_nodes())

    # -- serialization -----------------------------------------------------

    def to_json(self) -> str:
        nodes = [{"id": node.id, "height": node.height, "parent": node.parent,
                  "children": list(node.children), "leaf_player": node.leaf_player}
                 for node in sorted(self.nodes.values(), key=lambda nd: nd.id)]
        return json.dumps({"nodes": nodes, "root": self.root,
                           "metadata": self.metadata})

    @classmethod
    def from_json(cls, text: str) -> "PartitionTree":
        doc = json.loads(text)
        nodes = [TreeNode(d["id"], d["height"], d.get("parent"),
                          tuple(d.get("children", ())), d.get("leaf_player"))
                 for d in doc["nodes"]]
        return cls(nodes, root=doc["root"], metadata=doc.get("metadata"))

    def to_newick(self, labels: list[str] | None = None) -> str:
        def render(nid: int) -> str:
            node = self.nodes[nid]
            parent_h = (node.height if node.parent is None
                        else self.nodes[node.parent].height)
            length = parent_h - node.height
            if node.is_leaf:
                name = labels[node.leaf_player] if labels else f"x{node.leaf_player}"
                return f"{name}:{length:.6g}"
            inner = ",".join(render(c) for c in node.children)
            return f"({inner}):{length:.6g}"

        return render(self.root) + ";"

    def to_dot(self, labels: list[str] | None = None) -> str:
        lines = ["digraph dendrogram {", "  rankdir=BT;"]
        for node in sorted(self.nodes.values(), key=lambda nd: nd.id):
            if node.is_leaf:
                name = labels[node.leaf_player] if labels else f"x{node.leaf_player}"
                lines.append(f'  n{node.id} [label="{name}", shape=box];')
            else:
                lines.append(f'  n{node.id} [label="h={node.height:.4g}"];')
            if node.parent is not None:
                lines.append(f"  n{node.id} -> n{node.parent};")
        lines.append("}")
        return "\n".join(lines)


@dataclass
class RecursiveValues:
    """Per-node recursive values; leaf entries are the per-player values."""

    per_node: dict[int, float]
    leaf_values: np.ndarray
    tree: PartitionTree = field(repr=False)
    spec_name: str = ""

    def to_json(self) -> str:
        return json.dumps({"per_node": {str(k): val for k, val in self.per_node.items()},
                           "leaf_values": self.leaf_values.tolist(),
                           "spec_name": self.spec_name})


def _spec_h1_applier(spec: CoalitionalValueSpec):
    if spec.is_named:
        def apply(table: np.ndarray, m: int, j: int) -> float:
            return float(kernels.lin_value_dense(table, _WTABLE[spec.h1_kind](m), m)[j])
    else:
        h1 = spec.outer_value()

        def apply(table: np.ndarray, m: int, j: int) -> float:
            return float(np.asarray(h1(Game.from_dense(table)))[j])
    return apply


def _spec_h2_applier(spec: CoalitionalValueSpec):
    if spec.is_named:
        def apply(table: np.ndarray, size: int) -> np.ndarray:
            return kernels.lin_value_dense(table, _WTABLE[spec.h2_kind](size), size)
    else:
        h2 = spec.inner_value()

        def apply(table: np.ndarray, size: int) -> np.ndarray:
            return np.asarray(h2(Game.from_dense(table)), dtype=np.float64)
    return apply


def recursive_values(tree: PartitionTree, v: Game,
                     spec: CoalitionalValueSpec) -> RecursiveValues:
    """Recursive coalitional values over the tree (centered extension).

    The root carries ``v(N) - v(empty)``.  Each node's game is built from its
    parent's game through the spec's intermediate family and outer value;
    leaves whose siblings are all leaves (away from the root) receive inner
    values instead.
    """
    if tree.n != v.n:
        raise GameError(f"tree has {tree.n} leaves, game has {v.n} players")
    w = center(v)
    h1_apply = _spec_h1_applier(spec)
    h2_apply = _spec_h2_applier(spec)
    memo: dict[int, dict[int, float]] = {tree.root: {}}

    def node_game(nid: int, mask: int) -> float:
        cache = memo.setdefault(nid, {})
        got = cache.get(mask)
        if got is not None:
            return got
        if nid == tree.root:
            val = w.value(mask)
        else:
            node = tree.nodes[nid]
            parent = tree.nodes[node.parent]
            j = parent.children.index(nid)
            child_masks = [tree.player_set(c) for c in parent.children]
            m = len(child_masks)
            table = _intermediate_table(nid, mask, node.parent, j, child_masks)
            val = h1_apply(table, m, j)
        cache[mask] = val
        return val

    def _intermediate_table(nid: int, tmask: int, parent_id: int, j: int,
                            child_masks: list[int]) -> np.ndarray:
        m = len(child_masks)
        unions = np.zeros(1 << m, dtype=np.int64)
        for a in range(1, 1 << m):
            low = a & -a
            unions[a] = unions[a ^ low] | child_masks[low.bit_length() - 1]
        jbit = 1 << j
        out = np.empty(1 << m, dtype=np.float64)
        if spec.intermediate == "modified_quotient":
            for a in range(1 << m):
                if a & jbit:
                    out[a] = node_game(parent_id, int(unions[a ^ jbit]) | tmask)
                else:
                    out[a] = node_game(parent_id, int(unions[a]))
        else:
            sj = tree.player_set(nid).bit_count()
            ratio = tmask.bit_count() / sj
            shift = (node_game(parent_id, tmask)
                     - ratio * node_game(parent_id, tree.player_set(nid)))
            for a in range(1 << m):
                out[a] = ratio * node_game(parent_id, int(unions[a])) \
                    + a.bit_count() * shift
        return out

    per_node: dict[int, float] = {tree.root: w.value(full_mask(tree.n))}

    def visit(nid: int) -> None:
        node = tree.nodes[nid]
        if node.is_leaf:
            return
        all_leaf_children = all(tree.nodes[c].is_leaf for c in node.children)
        second_branch = all_leaf_children and nid != tree.root
        if second_branch:
            players = sorted(tree.nodes[c].leaf_player for c in node.children)
            size = len(players)
            local = np.zeros(1 << size, dtype=np.int64)
            for a in range(1, 1 << size):
                low = a & -a
                local[a] = local[a ^ low] | (1 << players[low.bit_length() - 1])
            table = np.array([node_game(nid, int(mask)) for mask in local])
            vals = h2_apply(table, size)
            for c in node.children:
                leaf = tree.nodes[c]
                per_node[c] = float(vals[players.index(leaf.leaf_player)])
        else:
            for c in node.children:
                per_node[c] = node_game(c, tree.player_set(c))
                visit(c)

    visit(tree.root)
    leaf_values = np.zeros(tree.n, dtype=np.float64)
    for nid in tree.leaves():
        leaf_values[tree.nodes[nid].leaf_player] = per_node[nid]
    return RecursiveValues(per_node=per_node, leaf_values=leaf_values, tree=tree,
                           spec_name=spec.name or spec.kind)


@dataclass
class TreeCutExplanations:
    """Group values at a height cut: leaf sums and node values per block."""

    alpha: float
    partition: Partition
    leaf_sums: np.ndarray
    node_values: np.ndarray
    spec_name: str

    def to_json(self) -> str:
        return json.dumps({"alpha": self.alpha,
                           "partition": self.partition.to_lists(),
                           "leaf_sums": self.leaf_sums.tolist(),
                           "node_values": self.node_values.tolist(),
                           "spec_name": self.spec_name})


def tree_group_explanations(tree: PartitionTree, v: Game,
                            spec: CoalitionalValueSpec,
                            alpha: float) -> TreeCutExplanations:
    """Both group-value variants at ``cut(alpha)``: within-block leaf sums and
    the recursive node values.  They agree for efficient specs."""
    rec = recursive_values(tree, v, spec)
    nids = tree.cut_nodes(alpha)
    partition = Partition(tuple(tree.player_set(nid) for nid in nids), tree.n)
    leaf_sums = np.array([rec.leaf_values[members(tree.player_set(nid))].sum()
                          for nid in nids])
    node_values = np.array([rec.per_node[nid] for nid in nids])
    return TreeCutExplanations(alpha=alpha, partition=partition,
                               leaf_sums=leaf_sums, node_values=node_values,
                               spec_name=spec.name or spec.kind)
