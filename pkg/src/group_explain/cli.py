"""Command-line front end.

Subcommands: ``generate`` (synthetic data), ``cluster`` (MIC dissimilarity +
dendrogram + partition), ``explain`` (explanation matrices), ``diagnose``
(stability report from two explanation runs), and ``gamecheck`` (axiom and
oracle checks for a game value).

A JSON config may supply any option; explicit flags win.  Every run writes a
manifest JSON recording the resolved config, its hash, and the seed.
Exit codes: 0 success, 2 input error, 3 scoring-oracle protocol error,
4 internal invariant violation.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from ._backend import backend_name
from .clustering import average_linkage_cluster, dissimilarity_matrix
from .coalitions import CoalitionalValueSpec
from .explain import Dataset, ExplanationMatrix, explain
from .games import GameError, Partition
from .mic import MicConfig
from .models import OracleProtocolError, SubprocessModel, parse_analytic_model
from .reference import crosscheck
from .synthetic import GaussianFamily, generate_mic_test, generate_pedagogical
from .tree import PartitionTree
from .values import NAMED_VALUES, WeightedValueSpec, axiom_check, weighted_value
from .diagnostics import stability_report

EXIT_INPUT = 2
EXIT_ORACLE = 3
EXIT_INTERNAL = 4


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    p = Path(path)
    if not p.exists():
        _fail(EXIT_INPUT, f"config file not found: {p}")
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        _fail(EXIT_INPUT, f"{p}: invalid JSON ({exc})")
    if not isinstance(doc, dict):
        _fail(EXIT_INPUT, f"{p}: config must be a JSON object")
    return doc


def _resolve(cfg: dict, key: str, flag_value, default=None):
    if flag_value is not None:
        return flag_value
    return cfg.get(key, default)


def _write_manifest(out_dir: Path, command: str, config: dict, seed: int,
                    outputs: list[str]) -> None:
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    manifest = {
        "command": command,
        "config": config,
        "config_hash": hashlib.sha256(blob).hexdigest()[:16],
        "seed": seed,
        "outputs": outputs,
        "version": __version__,
        "backend": backend_name(),
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2,
                                                      default=str))


def _load_model(spec: str, arity: int, feature_names, workers_batch: int):
    if spec is None:
        _fail(EXIT_INPUT, "a --model is required")
    if spec.startswith("subprocess:"):
        return SubprocessModel(spec[len("subprocess:"):], arity,
                               batch_size=workers_batch)
    return parse_analytic_model(spec, arity, feature_names)


def _parse_family(text: str | None, arity: int):
    if text is None:
        return None
    parts = text.split(":")
    if parts[0] == "pair_chain":
        rho = float(parts[1]) if len(parts) > 1 else 0.5
        return GaussianFamily.pair_chain(rho, n=arity)
    if parts[0] == "block":
        blocks = json.loads(parts[1])
        rho = float(parts[2]) if len(parts) > 2 else 0.8
        return GaussianFamily.block_independent(blocks, rho=rho, n=arity)
    _fail(EXIT_INPUT, f"unknown family {text!r}; use pair_chain:<rho> or "
          "block:<json-blocks>[:rho]")


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Game-theoretic group explainers: clustering, explanation, diagnostics."""


@main.command()
@click.option("--family", "family_name", default="mic-test",
              type=click.Choice(["mic-test", "pedagogical"]))
@click.option("--samples", type=int, default=10000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--delta", type=float, default=0.05, show_default=True,
              help="noise level of the pedagogical family")
@click.option("--out", "out_dir", default="out", show_default=True)
def generate(family_name: str, samples: int, seed: int, delta: float,
             out_dir: str) -> None:
    """Write a seeded synthetic dataset as CSV."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if family_name == "mic-test":
        data, names = generate_mic_test(samples, seed)
        ds = Dataset(data, names)
        path = out / "data.csv"
        ds.to_csv(path)
        outputs = [str(path)]
    else:
        ped = generate_pedagogical(samples, seed, delta)
        ds = Dataset(np.column_stack([ped.X, ped.y]),
                     ped.feature_names + ["y"])
        path = out / "data.csv"
        ds.to_csv(path)
        outputs = [str(path)]
    _write_manifest(out, "generate", {"family": family_name, "samples": samples,
                                      "delta": delta}, seed, outputs)
    click.echo(f"wrote {outputs[0]}")


@main.command()
@click.option("--config", "config_path", default=None, help="JSON config file")
@click.option("--data", "data_path", default=None)
@click.option("--threshold", type=float, default=None,
              help="dissimilarity threshold for the emitted partition")
@click.option("--mic-b-exponent", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--out", "out_dir", default=None)
def cluster(config_path, data_path, threshold, mic_b_exponent, seed, out_dir):
    """MIC dissimilarities, average-linkage dendrogram, and a partition."""
    cfg = _load_config(config_path)
    data_path = _resolve(cfg, "data", data_path)
    threshold = _resolve(cfg, "threshold", threshold, 0.7)
    b_exp = _resolve(cfg, "mic_b_exponent", mic_b_exponent, 0.6)
    seed = int(_resolve(cfg, "seed", seed, 0))
    out_dir = Path(_resolve(cfg, "out", out_dir, "out"))
    if data_path is None:
        _fail(EXIT_INPUT, "cluster needs --data")
    try:
        ds = Dataset.from_csv(data_path)
        out_dir.mkdir(parents=True, exist_ok=True)
        dis = dissimilarity_matrix(ds.rows, MicConfig(b_exponent=b_exp),
                                   ds.feature_names)
        tree = average_linkage_cluster(dis)
        partition = tree.cut(threshold)
    except FileNotFoundError as exc:
        _fail(EXIT_INPUT, str(exc))
    except GameError as exc:
        _fail(EXIT_INPUT, str(exc))
    outputs = []
    for name, text in [("dissimilarity.csv", None), ("tree.json", tree.to_json()),
                       ("tree.newick", tree.to_newick(ds.feature_names)),
                       ("tree.dot", tree.to_dot(ds.feature_names)),
                       ("partition.json", json.dumps(partition.to_lists()))]:
        path = out_dir / name
        if text is None:
            dis.to_csv(path)
        else:
            path.write_text(text)
        outputs.append(str(path))
    _write_manifest(out_dir, "cluster", {"data": str(data_path),
                                         "threshold": threshold,
                                         "mic_b_exponent": b_exp}, seed, outputs)
    click.echo(f"partition at {threshold}: {partition.to_lists()}")


@main.command(name="explain")
@click.option("--config", "config_path", default=None)
@click.option("--data", "data_path", default=None)
@click.option("--background", "background_path", default=None)
@click.option("--model", "model_spec", default=None)
@click.option("--value", "value_name", default=None,
              help="shapley | banzhaf | owen | banzhaf-owen | two-step-shapley "
                   "| symmetric-banzhaf")
@click.option("--game", "game_spec", default=None, help="me | ce:<family>")
@click.option("--partition", "partition_path", default=None)
@click.option("--tree", "tree_path", default=None)
@click.option("--alpha", "alphas", default=None,
              help="tree cut height(s), comma separated")
@click.option("--threshold", type=float, default=None,
              help="cluster the data at this MIC threshold for the partition")
@click.option("--mic-b-exponent", type=float, default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None,
              envvar="GROUP_EXPLAIN_WORKERS")
@click.option("--out", "out_dir", default=None)
def explain_cmd(config_path, data_path, background_path, model_spec, value_name,
                game_spec, partition_path, tree_path, alphas, threshold,
                mic_b_exponent, seed, workers, out_dir):
    """Explanation matrices for every data row."""
    cfg = _load_config(config_path)
    data_path = _resolve(cfg, "data", data_path)
    background_path = _resolve(cfg, "background", background_path)
    model_spec = _resolve(cfg, "model", model_spec)
    value_name = _resolve(cfg, "value", value_name, "shapley")
    game_spec = _resolve(cfg, "game", game_spec, "me")
    partition_path = _resolve(cfg, "partition", partition_path)
    tree_path = _resolve(cfg, "tree", tree_path)
    alphas = _resolve(cfg, "alpha", alphas)
    threshold = _resolve(cfg, "threshold", threshold)
    b_exp = _resolve(cfg, "mic_b_exponent", mic_b_exponent, 0.6)
    seed = int(_resolve(cfg, "seed", seed, 0))
    workers = int(_resolve(cfg, "workers", workers, 1))
    out_dir = Path(_resolve(cfg, "out", out_dir, "out"))
    if data_path is None:
        _fail(EXIT_INPUT, "explain needs --data")
    sources = [p is not None for p in (partition_path, tree_path, threshold)]
    if sum(sources) > 1:
        _fail(EXIT_INPUT, "choose one partition source: --partition, "
              "--tree (+--alpha), or --threshold")
    try:
        ds = Dataset.from_csv(data_path)
        bg = Dataset.from_csv(background_path) if background_path else None
        model = _load_model(model_spec, ds.n_features, ds.feature_names, 4096)
        game_kind, _, family_text = str(game_spec).partition(":")
        family = _parse_family(family_text or None, ds.n_features)

        structures: list[tuple[str, object]] = []
        if partition_path:
            blocks = json.loads(Path(partition_path).read_text())
            structures.append(("partition",
                               Partition.from_lists(blocks, ds.n_features)))
        elif tree_path:
            tree = PartitionTree.from_json(Path(tree_path).read_text())
            cuts = [float(a) for a in str(alphas).split(",")] if alphas else [0.0]
            for a in cuts:
                structures.append((f"alpha{a:g}", (tree, a)))
        elif threshold is not None:
            dis = dissimilarity_matrix(ds.rows, MicConfig(b_exponent=b_exp),
                                       ds.feature_names)
            tree = average_linkage_cluster(dis)
            structures.append(("partition", tree.cut(threshold)))
        else:
            structures.append(("flat", None))

        key = str(value_name).lower().replace("_", "-")
        if key in NAMED_VALUES:
            value = key
        else:
            value = CoalitionalValueSpec.from_name(key)
            if all(s is None for _, s in structures):
                _fail(EXIT_INPUT, f"value {key!r} needs a partition source")

        out_dir.mkdir(parents=True, exist_ok=True)
        outputs = []
        for tag, structure in structures:
            matrix = explain(ds, model, value, bg=bg, structure=structure,
                             game=game_kind, family=family, workers=workers)
            matrix.meta["predictions"] = np.asarray(model(ds.rows)).tolist()
            name = "explanations.csv" if len(structures) == 1 \
                else f"explanations_{tag}.csv"
            matrix.to_csv(out_dir / name)
            outputs += [str(out_dir / name), str(out_dir / name) + ".meta.json"]
            resid = matrix.meta.get("max_efficiency_residual")
            if resid is not None:
                click.echo(f"{name}: max row-sum residual {resid:.3g}")
            if "efficiency_warning" in matrix.meta:
                click.echo(f"{name}: WARNING {matrix.meta['efficiency_warning']}")
    except FileNotFoundError as exc:
        _fail(EXIT_INPUT, str(exc))
    except OracleProtocolError as exc:
        _fail(EXIT_ORACLE, str(exc))
    except (GameError, json.JSONDecodeError, ValueError) as exc:
        _fail(EXIT_INPUT, str(exc))
    except Exception as exc:  # internal invariant violation
        _fail(EXIT_INTERNAL, f"internal error: {exc!r}")
    finally:
        closer = getattr(locals().get("model"), "close", None)
        if closer:
            closer()
    _write_manifest(out_dir, "explain",
                    {"data": str(data_path), "background": background_path,
                     "model": model_spec, "value": str(value_name),
                     "game": game_spec, "partition": partition_path,
                     "tree": tree_path, "alpha": alphas,
                     "threshold": threshold, "workers": workers},
                    seed, outputs)
    click.echo(f"wrote {len(outputs)} files to {out_dir}")


@main.command()
@click.argument("explanations_a")
@click.argument("explanations_b")
@click.option("--out", "out_dir", default="out", show_default=True)
def diagnose(explanations_a: str, explanations_b: str, out_dir: str) -> None:
    """Stability report comparing two explanation runs on shared data."""
    try:
        ea = ExplanationMatrix.from_csv(explanations_a)
        eb = ExplanationMatrix.from_csv(explanations_b)
        fa = np.asarray(ea.meta.get("predictions"))
        fb = np.asarray(eb.meta.get("predictions"))
        if fa.ndim != 1 or fb.ndim != 1:
            _fail(EXIT_INPUT, "explanation metadata lacks model predictions")
        report = stability_report(ea, eb, fa, fb)
    except FileNotFoundError as exc:
        _fail(EXIT_INPUT, str(exc))
    except GameError as exc:
        _fail(EXIT_INPUT, str(exc))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "stability.json"
    path.write_text(report.to_json())
    _write_manifest(out, "diagnose", {"a": explanations_a, "b": explanations_b},
                    0, [str(path)])
    click.echo(report.to_json())


EXPECTED_PROPERTIES = {
    "shapley": {"pass": ["LP", "EP", "SP", "NPP", "CDP", "SEP"], "fail": []},
    "banzhaf": {"pass": ["LP", "SP", "TPP", "NPP", "CDP", "SEP"], "fail": ["EP"]},
    "owen": {"qp": True, "efficient": True},
    "banzhaf-owen": {"qp": False, "efficient": False},
    "two-step-shapley": {"qp": True, "efficient": True},
    "symmetric-banzhaf": {"qp": True, "efficient": False},
}


@main.command()
@click.argument("value_name")
@click.option("--trials", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--weights-file", default=None,
              help="JSON {name, weights: {n: [w by coalition size]}} for a "
                   "custom weighted value")
def gamecheck(value_name: str, trials: int, seed: int, weights_file) -> None:
    """Axiom checks and oracle crosschecks for a named or custom value."""
    key = value_name.lower().replace("_", "-")
    rows = []
    status = 0
    try:
        if weights_file:
            doc = json.loads(Path(weights_file).read_text())
            by_n = {int(k): list(map(float, v)) for k, v in doc["weights"].items()}

            def weight(s_mask: int, n: int) -> float:
                return by_n[n][s_mask.bit_count()]

            spec = WeightedValueSpec(doc.get("name", "custom"), weight)
            fn = lambda game: weighted_value(spec, game)  # noqa: E731
            for axiom in ("LP", "EP", "SP", "TPP", "NPP", "CDP", "SEP"):
                report = axiom_check(fn, axiom, trials=trials, seed=seed,
                                     n_range=(2, max(2, max(by_n) - 1)))
                rows.append((axiom, "pass" if report.passed else "fail", ""))
        elif key in ("shapley", "banzhaf"):
            fn = NAMED_VALUES[key]
            expected = EXPECTED_PROPERTIES[key]
            for axiom in ("LP", "EP", "SP", "TPP", "NPP", "CDP", "SEP"):
                report = axiom_check(fn, axiom, trials=trials, seed=seed)
                want_pass = axiom in expected["pass"]
                want_fail = axiom in expected["fail"]
                if (want_pass and not report.passed) or (want_fail and report.passed):
                    status = 1
                note = "expected failure" if (want_fail and not report.passed) else ""
                if not want_pass and not want_fail:
                    note = "informational"
                rows.append((axiom, "pass" if report.passed else "fail", note))
        else:
            from .coalitions import coalitional_value, quotient_property_check
            from .reference import random_game, random_partition

            spec = CoalitionalValueSpec.from_name(key)
            expected = EXPECTED_PROPERTIES[key]
            oracle = crosscheck(spec, trials=min(trials, 200), seed=seed)
            rows.append(("two-step-equivalence",
                         "pass" if oracle.max_abs_deviation <= 1e-10 else "fail",
                         f"max dev {oracle.max_abs_deviation:.2e}"))
            if oracle.max_abs_deviation > 1e-10:
                status = 1
            rng = np.random.default_rng(seed)
            qp_fail = None
            eff_fail = None
            for _ in range(min(trials, 500)):
                n = int(rng.integers(3, 7))
                game = random_game(n, rng, cooperative=False)
                part = random_partition(n, 3, rng)
                rep = quotient_property_check(spec, game, part)
                if not rep.passed and qp_fail is None:
                    qp_fail = {"n": n, "partition": part.to_lists(),
                               "deviation": rep.max_abs_deviation}
                total = float(coalitional_value(spec, game, part).sum())
                target = game.value((1 << n) - 1) - game.empty_value
                if abs(total - target) > 1e-9 and eff_fail is None:
                    eff_fail = {"n": n, "deviation": abs(total - target)}
            for prop, failure, want in (("efficiency", eff_fail, expected["efficient"]),
                                        ("quotient-game-property", qp_fail,
                                         expected["qp"])):
                holds = failure is None
                note = "expected" if holds == want else "UNEXPECTED"
                rows.append((prop, "pass" if holds else "fail", note))
                if holds != want:
                    status = 1
                if not holds and not want:
                    rows.append((f"{prop}-witness", "found",
                                 json.dumps(failure)[:80]))
    except (GameError, FileNotFoundError, KeyError) as exc:
        _fail(EXIT_INPUT, str(exc))
    width = max(len(r[0]) for r in rows) + 2
    click.echo(f"value: {key}  trials: {trials}  seed: {seed}")
    for name, verdict, note in rows:
        click.echo(f"  {name:<{width}} {verdict:<6} {note}")
    sys.exit(status)


if __name__ == "__main__":
    main()
