"""Explanation matrices from data, a model oracle, and a value specification.

The marginal game is built empirically from a background dataset; conditional
games come from a synthetic family's closed forms.  One explanation run emits,
per sample, the individual per-feature values together with per-block sums and
quotient(-like) block values whenever a partition or tree is supplied.
"""

from __future__ import annotations

import csv
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .coalitions import CoalitionalValueSpec, evaluate_with_blocks
from .games import Game, GameError, Partition, center, members, quotient_game
from .tree import PartitionTree, recursive_values, tree_group_explanations
from .values import NAMED_VALUES

EFFICIENCY_TOL = 1e-8


@dataclass
class Dataset:
    """Rectangular sample matrix with named columns."""

    rows: np.ndarray
    feature_names: list[str] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=np.float64))
        if not np.isfinite(self.rows).all():
            raise GameError("dataset contains non-finite entries")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.rows.shape[1])]
        if len(self.feature_names) != self.rows.shape[1]:
            raise GameError("feature_names length must match the column count")

    @property
    def n_samples(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return self.rows.shape[1]

    def content_hash(self) -> str:
        digest = hashlib.sha256()
        digest.update(",".join(self.feature_names).encode())
        digest.update(np.ascontiguousarray(self.rows).tobytes())
        return digest.hexdigest()[:16]

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.feature_names)
            for row in self.rows:
                writer.writerow([f"{v:.17g}" for v in row])

    @classmethod
    def from_csv(cls, path: str | Path) -> "Dataset":
        path = Path(path)
        if not path.exists():
            raise FileNotFoundError(f"no such data file: {path}")
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise GameError(f"{path}: empty CSV") from None
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    rows.append([float(v) for v in row])
                except ValueError as exc:
                    raise GameError(f"{path}:{lineno}: non-numeric value") from exc
        if not rows:
            raise GameError(f"{path}: no data rows")
        return cls(np.array(rows), [h.strip() for h in header])


def empirical_marginal_game(x: np.ndarray, f, bg: Dataset | np.ndarray,
                            batch_size: int = 4096) -> Game:
    """Marginal game averaging the model over background rows.

    ``v(S)`` replaces the S-coordinates of every background row with the
    explicand's and averages the scores; memoized per coalition, model calls
    batched.
    """
    rows = bg.rows if isinstance(bg, Dataset) else np.atleast_2d(np.asarray(bg))
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if rows.shape[0] == 0:
        raise GameError("background dataset is empty")
    if rows.shape[1] != x.size:
        raise GameError(f"explicand has {x.size} features, background has "
                        f"{rows.shape[1]}")
    n = x.size

    def val(s_mask: int) -> float:
        if s_mask == (1 << n) - 1:
            return float(np.asarray(f(x[None, :]))[0])
        mixed = rows.copy()
        idx = members(s_mask)
        if idx:
            mixed[:, idx] = x[idx][None, :]
        total = 0.0
        for start in range(0, mixed.shape[0], batch_size):
            total += float(np.sum(np.asarray(f(mixed[start:start + batch_size]))))
        return total / mixed.shape[0]

    return Game(n, fn=val)


def analytic_conditional_game(x: np.ndarray, family, f) -> Game:
    """Conditional game from a family's closed form (error when unsupported)."""
    game_fn = getattr(family, "conditional_game", None)
    if game_fn is None:
        raise GameError(f"family {family!r} has no closed-form conditional game; "
                        "use the Monte Carlo fallback on the family's sampler")
    return game_fn(x, f)


@dataclass
class ExplanationMatrix:
    """Per-sample, per-unit attribution values with provenance metadata.

    ``meta['columns']`` records which column indices hold individual feature
    values, block sums, and quotient block values.
    """

    values: np.ndarray
    unit_labels: list[str]
    meta: dict

    def __post_init__(self) -> None:
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if self.values.shape[1] != len(self.unit_labels):
            raise GameError("unit_labels must match the column count")

    def column(self, label: str) -> np.ndarray:
        return self.values[:, self.unit_labels.index(label)]

    def individual(self) -> np.ndarray:
        return self.values[:, self.meta["columns"]["individual"]]

    def block_sums(self) -> np.ndarray:
        return self.values[:, self.meta["columns"]["block_sums"]]

    def quotient(self) -> np.ndarray:
        return self.values[:, self.meta["columns"]["quotient"]]

    def to_json(self) -> str:
        return json.dumps({"values": self.values.tolist(),
                           "unit_labels": self.unit_labels, "meta": self.meta})

    @classmethod
    def from_json(cls, text: str) -> "ExplanationMatrix":
        doc = json.loads(text)
        return cls(np.array(doc["values"]), doc["unit_labels"], doc["meta"])

    def to_csv(self, path: str | Path) -> None:
        """Write values as CSV plus a JSON metadata sidecar ``<path>.meta.json``."""
        path = Path(path)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.unit_labels)
            for row in self.values:
                writer.writerow([f"{v:.17g}" for v in row])
        Path(str(path) + ".meta.json").write_text(json.dumps(self.meta, indent=2))

    @classmethod
    def from_csv(cls, path: str | Path) -> "ExplanationMatrix":
        path = Path(path)
        meta = json.loads(Path(str(path) + ".meta.json").read_text())
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            labels = next(reader)
            values = np.array([[float(v) for v in row] for row in reader if row])
        return cls(values, labels, meta)


def _game_builder(game: str, model, bg: Dataset | None, family,
                  batch_size: int):
    game = game.lower()
    if game == "me":
        if bg is not None:
            return lambda x: empirical_marginal_game(x, model, bg, batch_size)
        if family is not None and hasattr(family, "marginal_game"):
            inner = getattr(model, "fn", model)
            return lambda x: family.marginal_game(x, inner)
        raise GameError("marginal game needs a background dataset (or a family "
                        "with a closed-form marginal)")
    if game == "ce":
        if family is None:
            raise GameError("conditional game needs a synthetic family")
        inner = getattr(model, "fn", model)
        return lambda x: analytic_conditional_game(x, family, inner)
    raise GameError(f"unknown game kind {game!r}; use 'me' or 'ce'")


def explain(data: Dataset, model, value, *, bg: Dataset | None = None,
            structure=None, game: str = "me", family=None, workers: int = 1,
            batch_size: int = 4096) -> ExplanationMatrix:
    """Explain every sample row; returns one matrix with all requested units.

    ``value`` is a plain value name ('shapley' / 'banzhaf') or a
    CoalitionalValueSpec.  ``structure`` is None, a Partition, or a
    ``(PartitionTree, alpha)`` pair.  ``game`` is 'me' (empirical marginal
    over ``bg``, or the family's population marginal when no background is
    given) or 'ce' (family closed form).
    """
    n = data.n_features
    build_game = _game_builder(game, model, bg, family, batch_size)
    partition: Partition | None = None
    tree_alpha: tuple[PartitionTree, float] | None = None
    if isinstance(structure, Partition):
        partition = structure
    elif isinstance(structure, tuple) and isinstance(structure[0], PartitionTree):
        tree_alpha = (structure[0], float(structure[1]))
        partition = structure[0].cut(tree_alpha[1])
    elif structure is not None:
        raise GameError("structure must be None, a Partition, or (tree, alpha)")
    if partition is not None and partition.n != n:
        raise GameError(f"structure is over {partition.n} players, data has {n}")

    spec: CoalitionalValueSpec | None = None
    if isinstance(value, CoalitionalValueSpec):
        spec = value
        if partition is None:
            raise GameError("coalitional values need a partition or tree structure")
        value_name = spec.name or spec.kind
    else:
        value_name = str(value).lower()
        if value_name not in NAMED_VALUES:
            raise GameError(f"unknown value {value!r}; choose from "
                            f"{sorted(NAMED_VALUES)} or pass a CoalitionalValueSpec")

    labels = list(data.feature_names)
    columns = {"individual": list(range(n)), "block_sums": [], "quotient": []}
    if partition is not None:
        block_names = ["+".join(data.feature_names[i] for i in members(b))
                       for b in partition.blocks]
        labels += [f"sum({name})" for name in block_names]
        labels += [f"quot({name})" for name in block_names]
        m = partition.m
        columns["block_sums"] = list(range(n, n + m))
        columns["quotient"] = list(range(n + m, n + 2 * m))

    out = np.empty((data.n_samples, len(labels)), dtype=np.float64)
    residuals = np.zeros(data.n_samples)
    fx = np.asarray(model(data.rows), dtype=np.float64)

    def run_one(k: int) -> None:
        g = build_game(data.rows[k])
        if tree_alpha is not None and spec is not None:
            rec = recursive_values(tree_alpha[0], g, spec)
            cut = tree_group_explanations(tree_alpha[0], g, spec, tree_alpha[1])
            individual = rec.leaf_values
            sums, quots = cut.leaf_sums, cut.node_values
        elif partition is not None:
            if spec is not None:
                result = evaluate_with_blocks(spec, g, partition)
                individual = result.per_player
                sums, quots = result.per_block, result.quotient
            else:
                individual = NAMED_VALUES[value_name](g.to_dense())
                sums = np.array([individual[members(b)].sum()
                                 for b in partition.blocks])
                quots = NAMED_VALUES[value_name](
                    center(quotient_game(g, partition)).to_dense())
        else:
            individual = NAMED_VALUES[value_name](g.to_dense())
            sums = quots = np.empty(0)
        out[k] = np.concatenate([individual, sums, quots])
        residuals[k] = abs(individual.sum() - (fx[k] - g.empty_value))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_one, range(data.n_samples)))
    else:
        for k in range(data.n_samples):
            run_one(k)

    efficient = spec.is_efficient if spec is not None else value_name == "shapley"
    meta = {
        "game": game.upper(),
        "value": value_name,
        "partition": partition.to_lists() if partition is not None else None,
        "alpha": tree_alpha[1] if tree_alpha else None,
        "background": (bg.content_hash() if bg is not None else None),
        "dataset": data.content_hash(),
        "model": getattr(model, "name", repr(model)),
        "feature_names": list(data.feature_names),
        "columns": columns,
        "efficient_value": efficient,
        "max_efficiency_residual": float(residuals.max()) if efficient else None,
    }
    if efficient and residuals.max() > EFFICIENCY_TOL * max(1.0, np.abs(fx).max()):
        meta["efficiency_warning"] = (f"row-sum residual {residuals.max():.3g} "
                                      f"exceeds {EFFICIENCY_TOL}")
    return ExplanationMatrix(out, labels, meta)
