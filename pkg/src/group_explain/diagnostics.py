"""Stability and energy diagnostics for explanations.

Empirical norms here are root-mean-squares over the supplied sample, matching
the explanation matrices they are computed from.  The module also carries the
exact desk-scale constructions that exhibit marginal-explanation instability:
the zero-norm rectangle witness, the blow-up ratio curve, and energy ratios.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .explain import ExplanationMatrix
from .games import GameError
from .synthetic import DiscreteFamily
from .values import shapley


def empirical_l2(values: np.ndarray) -> float:
    """Root-mean-square over samples."""
    values = np.asarray(values, dtype=np.float64)
    return float(np.sqrt(np.mean(np.square(values), axis=0)).max()) \
        if values.ndim > 1 else float(np.sqrt(np.mean(np.square(values))))


def _column_norms(values: np.ndarray) -> np.ndarray:
    return np.sqrt(np.mean(np.square(values), axis=0))


@dataclass
class StabilityReport:
    """Norm comparison of two explanation runs of two models on shared data."""

    unit_labels: list[str]
    individual_diff_norms: list[float]
    block_labels: list[str]
    block_aggregated_diff_norms: list[float]
    quotient_diff_norms: list[float]
    model_diff_norm: float
    individual_ratios: list[float]
    quotient_ratios: list[float]
    energy_a: float
    energy_b: float
    model_energy_a: float
    model_energy_b: float

    def to_json(self) -> str:
        doc = {k: getattr(self, k) for k in self.__dataclass_fields__}
        doc["energy_ratio_a"] = (self.energy_a / self.model_energy_a
                                 if self.model_energy_a > 0 else None)
        doc["energy_ratio_b"] = (self.energy_b / self.model_energy_b
                                 if self.model_energy_b > 0 else None)
        return json.dumps(doc, indent=2)


def stability_report(expl_a: ExplanationMatrix, expl_b: ExplanationMatrix,
                     fx_a: np.ndarray, fx_b: np.ndarray) -> StabilityReport:
    """Explanation-difference norms against the model-difference norm.

    Uses the linearity of explanations in the model: per-unit norms of the
    difference matrix, per-block root-sum-squares of the individual feature
    differences, and quotient-column differences, plus explanation energies
    relative to each centered model's energy.
    """
    if expl_a.unit_labels != expl_b.unit_labels:
        raise GameError("explanation matrices have different unit structure")
    if expl_a.values.shape != expl_b.values.shape:
        raise GameError("explanation matrices have different shapes")
    for key in ("dataset", "background", "partition"):
        if expl_a.meta.get(key) != expl_b.meta.get(key):
            raise GameError(f"explanation matrices disagree on {key}; diagnostics "
                            "need a shared dataset, background, and structure")
    fx_a = np.asarray(fx_a, dtype=np.float64)
    fx_b = np.asarray(fx_b, dtype=np.float64)
    diff = expl_a.values - expl_b.values
    cols = expl_a.meta["columns"]
    ind_idx = cols["individual"]
    ind_norms = _column_norms(diff[:, ind_idx])
    model_diff = float(np.sqrt(np.mean((fx_a - fx_b) ** 2)))

    block_labels: list[str] = []
    block_norms: list[float] = []
    quot_norms: list[float] = []
    partition = expl_a.meta.get("partition")
    if partition:
        names = expl_a.meta["feature_names"]
        for block in partition:
            block_labels.append("+".join(names[i] for i in block))
            block_norms.append(float(np.sqrt(
                np.sum(ind_norms[np.asarray(block)] ** 2))))
        quot_idx = cols["quotient"]
        quot_norms = _column_norms(diff[:, quot_idx]).tolist()

    def energy(matrix: ExplanationMatrix) -> float:
        return float(np.sum(_column_norms(matrix.individual()) ** 2))

    def model_energy(fx: np.ndarray) -> float:
        return float(np.mean((fx - fx.mean()) ** 2))

    ratios = [float(v / model_diff) if model_diff > 0 else float("inf")
              for v in ind_norms]
    qratios = [float(v / model_diff) if model_diff > 0 else float("inf")
               for v in quot_norms]
    return StabilityReport(
        unit_labels=[expl_a.unit_labels[i] for i in ind_idx],
        individual_diff_norms=ind_norms.tolist(),
        block_labels=block_labels,
        block_aggregated_diff_norms=block_norms,
        quotient_diff_norms=quot_norms,
        model_diff_norm=model_diff,
        individual_ratios=ratios,
        quotient_ratios=qratios,
        energy_a=energy(expl_a),
        energy_b=energy(expl_b),
        model_energy_a=model_energy(fx_a),
        model_energy_b=model_energy(fx_b),
    )


def two_point_witness() -> dict:
    """Ill-posedness witness: a model that is 0 almost surely on the data but
    has marginal Shapley explanations of norm 1/4 per coordinate."""
    family = DiscreteFamily.two_point()

    def f(X: np.ndarray) -> np.ndarray:
        return ((X[:, 0] == 1.0) & (X[:, 1] == 0.0)).astype(np.float64)

    fx = f(family.atoms)
    expl = np.array([shapley(family.marginal_game(atom, f).to_dense())
                     for atom in family.atoms])
    coord_norms = np.sqrt(family.probs @ np.square(expl))
    return {"model_l2_norm_sq": family.l2_norm_sq(fx),
            "per_coordinate_norms": coord_norms.tolist()}


def rectangle_blowup_curve(ps: list[float]) -> list[dict]:
    """Exact blow-up ratios ||E_1[f_R]||^2 / ||f_R||^2 over a family of
    shrinking-probability rectangles."""
    out = []
    for p in ps:
        family = DiscreteFamily.rectangle(p)

        def f(X: np.ndarray) -> np.ndarray:
            return ((X[:, 0] == 1.0) & (X[:, 1] == 0.0)).astype(np.float64)

        fx = f(family.atoms)
        model_norm_sq = family.l2_norm_sq(fx)
        expl = np.array([shapley(family.marginal_game(atom, f).to_dense())
                         for atom in family.atoms])
        expl_norm_sq = float(family.probs @ np.square(expl[:, 0]))
        out.append({"p": p, "ratio": expl_norm_sq / model_norm_sq})
    return out


def product_model_energy_ratio(n: int = 2) -> float:
    """Explanation energy over model energy for the full product model on
    independent symmetric +-1 features (equals 1/n)."""
    family = DiscreteFamily.pm_one(n)

    def f(X: np.ndarray) -> np.ndarray:
        return np.prod(X, axis=1)

    fx = f(family.atoms)
    model_energy = family.l2_norm_sq(fx) - family.expectation(fx) ** 2
    expl = np.array([shapley(family.marginal_game(atom, f).to_dense())
                     for atom in family.atoms])
    expl_energy = float(sum(family.probs @ np.square(expl[:, i]) for i in range(n)))
    return expl_energy / model_energy
