"""Command-line entry points.

Five commands share one config style: per-command defaults, optionally
overlaid by a JSON config file, then by --set key=value flags. Unknown
keys fail fast with the offending key path. Every run writes a
deterministic JSON record (hash-stable across re-runs with the same
config and seed, whatever the worker count) plus flat CSV sidecars.

  hypopt        tune initialization hyperparameters for one score function
  vqe           compare initialization methods on a Hamiltonian file
  qml           compare initialization methods on a CSV classification task
  grad-profile  per-layer gradient-magnitude histograms for one setting
  bp-scan       gradient variance versus qubit count per method
"""
from __future__ import annotations

import argparse
import copy
import json
import math
import pathlib
import time

import numpy as np

from . import __version__
from .data import (Dataset, fit_pca, fit_scaler, load_csv, load_hamiltonian,
                   pca_transform, scale_features, split_80_20,
                   stratified_subsample)
from .differentiation import SHIFT, gradient
from .distributions import (BETA, HyperParams, child_rng, init_guess,
                            manual_baseline, sample_params, to_unconstrained)
from .es import EsConfig, es_optimize
from .records import (bp_rows, curve_rows, es_trace_rows, hyperparam_names,
                      histogram_rows, record_hash, write_csv, write_record)
from .scoring import S2, S3, ScoreSpec, initialization_objective
from .simulator import (Observable, apply_circuit, build_hea,
                        build_strongly_entangling, build_two_design,
                        embed_angles, expectation)
from .tasks import QmlTask, make_vqe_task, qml_cost_batch, train

COMMANDS = ("hypopt", "vqe", "qml", "grad-profile", "bp-scan")

# run plumbing, excluded from the hashable record
_VOLATILE_KEYS = ("out", "workers")

_TRAIN_METHODS = ("s1", "s2", "s3", "manual")
_BP_METHODS = ("s1", "s2", "s3", "manual", "uniform")


def _score_defaults(with_kind: bool) -> dict:
    base = {"omega": "trace", "t": 2, "w": 0.9, "eps": 1e-6,
            "k_eigs": 5, "big_k": 1.0}
    if with_kind:
        base = {"kind": "s1", **base}
    return base


def _es_defaults() -> dict:
    return {"eta": 0.05, "sigma_es": 0.1, "n_samples": 16, "n_iters": 50,
            "eps_converge": 1e-3, "antithetic": True, "use_utility": True}


def default_config(command: str) -> dict:
    """Full default config for one command; every legal key appears here."""
    common = {"seed": 0, "out": f"runs/{command}", "workers": 1}
    if command == "hypopt":
        return {**common,
                "family": "beta",
                "initial": None,
                "ansatz": {"kind": "strongly_entangling", "layers": 8,
                           "qubits": 4, "structure_seed": 0},
                "hamiltonian": None,
                "score": _score_defaults(with_kind=True),
                "es": _es_defaults(),
                "theta_draws": 1}
    if command == "vqe":
        return {**common,
                "hamiltonian": None,
                "family": "beta",
                "methods": ["s1", "s2", "s3", "manual"],
                "ansatz": {"kind": "strongly_entangling", "layers": 8,
                           "qubits": None, "structure_seed": 0},
                "score": _score_defaults(with_kind=False),
                "es": _es_defaults(),
                "theta_draws": 1,
                "train": {"lr": 0.01, "iters": 100}}
    if command == "qml":
        return {**common,
                "dataset": None,
                "pca_components": 4,
                "subsample": 200,
                "score_batch": 32,
                "family": "beta",
                "methods": ["s1", "s2", "s3", "manual"],
                "ansatz": {"kind": "strongly_entangling", "layers": 3,
                           "qubits": None, "structure_seed": 0},
                "score": _score_defaults(with_kind=False),
                "es": _es_defaults(),
                "theta_draws": 1,
                "train": {"lr": 0.01, "iters": 100}}
    if command == "grad-profile":
        return {**common,
                "family": "beta",
                "values": [0.1, 1.5],
                "delta": 0.0,
                "m_samples": 200,
                "bins": 30,
                "ansatz": {"kind": "hea", "layers": 5, "qubits": 4,
                           "structure_seed": 0},
                "hamiltonian": None}
    if command == "bp-scan":
        return {**common,
                "qubit_range": [2, 4, 6, 8],
                "layers": 5,
                "structure_seed": 0,
                "m_samples": 200,
                "family": "beta",
                "methods": ["uniform", "s1", "s2", "s3"],
                "score": _score_defaults(with_kind=False),
                "es": _es_defaults(),
                "theta_draws": 1}
    raise ValueError(f"unknown command '{command}'")


def _merge(base: dict, incoming: dict, path: str) -> None:
    for key, value in incoming.items():
        here = f"{path}{key}"
        if key not in base:
            raise ValueError(f"unknown config key '{here}'")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise ValueError(f"config key '{here}' expects a table")
            _merge(base[key], value, f"{here}.")
        else:
            base[key] = value


def _parse_override(text: str):
    key, sep, raw = text.partition("=")
    if not sep or not key:
        raise ValueError(f"override '{text}' must look like key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip(), value


def _apply_override(cfg: dict, key: str, value) -> None:
    parts = key.split(".")
    node = cfg
    for depth, part in enumerate(parts[:-1]):
        if not isinstance(node.get(part), dict):
            raise ValueError(
                f"unknown config key '{'.'.join(parts[:depth + 1])}'")
        node = node[part]
    leaf = parts[-1]
    if leaf not in node:
        raise ValueError(f"unknown config key '{key}'")
    if isinstance(node[leaf], dict):
        raise ValueError(f"config key '{key}' expects a table")
    node[leaf] = value


def resolve_config(command: str, config_path=None, overrides=(),
                   seed=None, out=None, workers=None) -> dict:
    """Defaults, then config file, then --set overrides, then flags."""
    cfg = copy.deepcopy(default_config(command))
    if config_path is not None:
        loaded = json.loads(pathlib.Path(config_path).read_text())
        if not isinstance(loaded, dict):
            raise ValueError("config file must hold a JSON object")
        _merge(cfg, loaded, "")
    for item in overrides:
        key, value = _parse_override(item)
        _apply_override(cfg, key, value)
    if seed is not None:
        cfg["seed"] = seed
    if out is not None:
        cfg["out"] = str(out)
    if workers is not None:
        cfg["workers"] = workers
    return cfg


def _score_spec(score_cfg: dict, kind: str) -> ScoreSpec:
    return ScoreSpec(kind=kind, omega=score_cfg["omega"], t=score_cfg["t"],
                     w=score_cfg["w"], eps=score_cfg["eps"],
                     k_eigs=score_cfg["k_eigs"], big_k=score_cfg["big_k"])


def _es_config(es_cfg: dict) -> EsConfig:
    return EsConfig(eta=es_cfg["eta"], sigma_es=es_cfg["sigma_es"],
                    n_samples=es_cfg["n_samples"], n_iters=es_cfg["n_iters"],
                    eps_converge=es_cfg["eps_converge"],
                    antithetic=es_cfg["antithetic"],
                    use_utility=es_cfg["use_utility"])


def _build_ansatz(ansatz_cfg: dict, qubits: int | None = None):
    kind = ansatz_cfg["kind"]
    layers = ansatz_cfg["layers"]
    if qubits is None:
        qubits = ansatz_cfg["qubits"]
    if qubits is None:
        raise ValueError("ansatz.qubits must be set for this command")
    if kind == "strongly_entangling":
        return build_strongly_entangling(layers, qubits)
    if kind == "two_design":
        return build_two_design(layers, qubits, ansatz_cfg["structure_seed"])
    if kind == "hea":
        return build_hea(layers, qubits)
    raise ValueError(f"unknown ansatz kind '{kind}'")


def _default_observable(qubits: int) -> Observable:
    """All-qubit Z parity: a global cost, so its gradient variance shows the
    barren-plateau decay even at fixed circuit depth."""
    return Observable(((1.0, "Z" * qubits),))


def _derived_seed(master: int, *labels) -> int:
    return int(child_rng(master, *labels).integers(1 << 32))


def _check_methods(methods, allowed):
    if not methods:
        raise ValueError("methods list is empty")
    seen = []
    for method in methods:
        if method not in allowed:
            raise ValueError(f"unknown method '{method}'; choose from "
                             + ", ".join(allowed))
        if method in seen:
            raise ValueError(f"method '{method}' appears twice")
        seen.append(method)
    return tuple(seen)


def _trace_dict(trace) -> dict:
    return {"hyperparams": [list(v) for v in trace.hyperparams],
            "unconstrained": [list(v) for v in trace.unconstrained],
            "mean_score": list(trace.mean_score),
            "best_score": list(trace.best_score),
            "update_l1": list(trace.update_l1),
            "converged": bool(trace.converged),
            "iterations": trace.n_iterations}


def _method_hyperparams(method: str, cfg: dict, circuit, task_cost,
                        features, context=()):
    """Initialization hyperparameters for one method.

    Score methods run the ES search; 'manual' uses the fixed baseline and
    'uniform' spreads angles evenly over the full period. Returns
    (HyperParams, trace-or-None). `context` extends the seed labels so
    repeated searches inside one run stay independent.
    """
    if method == "manual":
        return manual_baseline(cfg["family"]), None
    if method == "uniform":
        return HyperParams(BETA, (1.0, 1.0)), None
    spec = _score_spec(cfg["score"], method)
    if spec.kind in (S2, S3) and task_cost is None:
        raise ValueError(f"score '{spec.kind}' needs a task cost")
    objective = initialization_objective(circuit, spec, task_cost=task_cost,
                                         features=features,
                                         theta_draws=cfg["theta_draws"])
    seed = cfg["seed"]
    if cfg.get("initial") is not None:
        hp0 = HyperParams(cfg["family"], tuple(cfg["initial"]))
    else:
        hp0 = init_guess(cfg["family"], child_rng(seed, "guess", method,
                                                  *context))
    hp, trace = es_optimize(objective, hp0, _es_config(cfg["es"]),
                            _derived_seed(seed, "es", method, *context),
                            workers=cfg["workers"])
    return hp, trace


def _record_for(command: str, cfg: dict, results: dict) -> dict:
    hashable_cfg = {k: v for k, v in cfg.items() if k not in _VOLATILE_KEYS}
    return {"command": command, "version": __version__,
            "config": hashable_cfg, "results": results}


def cmd_hypopt(cfg: dict) -> dict:
    """Tune the initialization distribution for the configured score."""
    circuit = _build_ansatz(cfg["ansatz"])
    kind = cfg["score"]["kind"]
    task_cost = None
    if cfg["hamiltonian"] is not None:
        task = make_vqe_task(load_hamiltonian(cfg["hamiltonian"]), circuit)
        task_cost = task.cost_batch
    hp, trace = _method_hyperparams(kind, cfg, circuit, task_cost, None)
    results = {"family": cfg["family"],
               "score_kind": kind,
               "lambda_star": [float(v) for v in hp.values],
               "unconstrained_star": [float(v) for v in to_unconstrained(hp)],
               "converged": bool(trace.converged),
               "iterations": trace.n_iterations,
               "trace": _trace_dict(trace)}
    return _record_for("hypopt", cfg, results)


def cmd_vqe(cfg: dict) -> dict:
    """Train one VQE per initialization method and record energy curves."""
    if cfg["hamiltonian"] is None:
        raise ValueError("vqe needs config key 'hamiltonian'")
    hamiltonian = load_hamiltonian(cfg["hamiltonian"])
    circuit = _build_ansatz(cfg["ansatz"],
                            qubits=cfg["ansatz"]["qubits"]
                            or hamiltonian.num_qubits)
    task = make_vqe_task(hamiltonian, circuit)
    methods = _check_methods(cfg["methods"], _TRAIN_METHODS)
    seed = cfg["seed"]
    per_method = {}
    for method in methods:
        hp, trace = _method_hyperparams(method, cfg, circuit,
                                        task.cost_batch, None)
        theta0 = sample_params(hp, circuit.num_params,
                               child_rng(seed, "theta0", method))
        _, curve = train(task, theta0, iters=cfg["train"]["iters"],
                         lr=cfg["train"]["lr"])
        entry = {"hyperparams": [float(v) for v in hp.values],
                 "curve": [float(c) for c in curve],
                 "final_energy": float(curve[-1]),
                 "gap": float(curve[-1] - task.exact_ground_energy)}
        if trace is not None:
            entry["es_iterations"] = trace.n_iterations
            entry["es_converged"] = bool(trace.converged)
        per_method[method] = entry
    results = {"exact_ground_energy": float(task.exact_ground_energy),
               "family": cfg["family"],
               "methods": per_method}
    return _record_for("vqe", cfg, results)


def cmd_qml(cfg: dict) -> dict:
    """Train one classifier per initialization method on a CSV dataset."""
    if cfg["dataset"] is None:
        raise ValueError("qml needs config key 'dataset'")
    full = load_csv(cfg["dataset"])
    seed = cfg["seed"]
    train_ds, test_ds = split_80_20(full, seed)
    train_ds = stratified_subsample(train_ds, cfg["subsample"], seed)
    k = cfg["pca_components"]
    pca = fit_pca(train_ds.features, k)
    scaler = fit_scaler(pca_transform(pca, train_ds.features))
    train_x = scale_features(pca_transform(pca, train_ds.features), scaler)
    test_x = scale_features(pca_transform(pca, test_ds.features), scaler)
    classes = full.num_classes
    measured = max(1, math.ceil(math.log2(classes)))
    qubits = cfg["ansatz"]["qubits"] or max(k, measured)
    circuit = embed_angles(_build_ansatz(cfg["ansatz"], qubits=qubits), k)
    task = QmlTask(circuit, train_x, train_ds.labels, classes,
                   test_x, test_ds.labels)
    # score on a small stratified slice; training uses the full subsample
    score_ds = stratified_subsample(Dataset("score", train_x, train_ds.labels),
                                    cfg["score_batch"], seed)
    score_task = QmlTask(circuit, score_ds.features, score_ds.labels, classes)
    score_cost = lambda rows: qml_cost_batch(score_task, rows)
    representative = train_x.mean(axis=0)
    methods = _check_methods(cfg["methods"], _TRAIN_METHODS)
    per_method = {}
    for method in methods:
        hp, trace = _method_hyperparams(method, cfg, circuit, score_cost,
                                        representative)
        theta0 = sample_params(hp, circuit.num_params,
                               child_rng(seed, "theta0", method))
        theta, curve = train(task, theta0, iters=cfg["train"]["iters"],
                             lr=cfg["train"]["lr"])
        entry = {"hyperparams": [float(v) for v in hp.values],
                 "loss_curve": [float(c) for c in curve],
                 "final_loss": float(curve[-1]),
                 "test_accuracy": task.accuracy(theta, test_x, test_ds.labels),
                 "train_accuracy": task.accuracy(theta, train_x,
                                                 train_ds.labels)}
        if trace is not None:
            entry["es_iterations"] = trace.n_iterations
            entry["es_converged"] = bool(trace.converged)
        per_method[method] = entry
    results = {"dataset": full.name,
               "num_classes": classes,
               "n_train": int(len(train_x)),
               "n_test": int(len(test_x)),
               "family": cfg["family"],
               "methods": per_method}
    return _record_for("qml", cfg, results)


def cmd_grad_profile(cfg: dict) -> dict:
    """Per-layer histograms of |dC/dtheta| under one initialization."""
    circuit = _build_ansatz(cfg["ansatz"])
    if cfg["hamiltonian"] is not None:
        obs = load_hamiltonian(cfg["hamiltonian"])
    else:
        obs = _default_observable(circuit.num_qubits)
    cost = lambda rows: expectation(apply_circuit(circuit, rows), obs)
    values = tuple(float(v) + cfg["delta"] for v in cfg["values"])
    hp = HyperParams(cfg["family"], values)
    rng = child_rng(cfg["seed"], "profile")
    m = cfg["m_samples"]
    if m < 1:
        raise ValueError("m_samples must be at least 1")
    grads = np.empty((m, circuit.num_params))
    for i in range(m):
        grads[i] = gradient(circuit, sample_params(hp, circuit.num_params,
                                                   rng), cost)
    histogram = []
    layer_mean_abs = []
    for index, tag in enumerate(circuit.layers):
        block = np.abs(grads[:, tag.param_start:tag.param_stop]).ravel()
        layer_mean_abs.append(float(block.mean()))
        density, edges = np.histogram(block, bins=cfg["bins"], density=True)
        for b, d in enumerate(density):
            histogram.append({"layer": index + 1,
                              "bin_left": float(edges[b]),
                              "bin_right": float(edges[b + 1]),
                              "density": float(d)})
    results = {"family": cfg["family"],
               "values": [float(v) for v in values],
               "delta": float(cfg["delta"]),
               "m_samples": int(m),
               "bins": int(cfg["bins"]),
               "num_layers": len(circuit.layers),
               "layer_mean_abs_gradient": layer_mean_abs,
               "histogram": histogram}
    return _record_for("grad-profile", cfg, results)


def cmd_bp_scan(cfg: dict) -> dict:
    """Gradient variance of the first parameter versus qubit count."""
    methods = _check_methods(cfg["methods"], _BP_METHODS)
    seed = cfg["seed"]
    m = cfg["m_samples"]
    if m < 2:
        raise ValueError("m_samples must be at least 2 for a variance")
    qubit_range = [int(n) for n in cfg["qubit_range"]]
    table = []
    variances = {method: [] for method in methods}
    for n in qubit_range:
        circuit = build_two_design(cfg["layers"], n, cfg["structure_seed"])
        obs = _default_observable(n)
        cost = (lambda rows, c=circuit, o=obs:
                expectation(apply_circuit(c, rows), o))
        for method in methods:
            hp, _ = _method_hyperparams(method, cfg, circuit, cost, None,
                                        context=(n,))
            rng = child_rng(seed, "bp-init", method, n)
            thetas = np.stack([sample_params(hp, circuit.num_params, rng)
                               for _ in range(m)])
            shifted = np.vstack([thetas, thetas])
            shifted[:m, 0] += SHIFT
            shifted[m:, 0] -= SHIFT
            vals = cost(shifted)
            derivs = (vals[:m] - vals[m:]) / 2.0
            variance = float(np.var(derivs))
            table.append({"qubits": n, "method": method,
                          "variance": variance,
                          "hyperparams": [float(v) for v in hp.values]})
            variances[method].append(variance)
    slopes = {}
    for method in methods:
        var = np.array(variances[method])
        if len(var) > 1 and np.all(var > 0):
            slopes[method] = float(np.polyfit(qubit_range, np.log(var), 1)[0])
        else:
            slopes[method] = None
    results = {"qubit_range": qubit_range,
               "layers": int(cfg["layers"]),
               "m_samples": int(m),
               "rows": table,
               "slopes": slopes}
    return _record_for("bp-scan", cfg, results)


_RUNNERS = {"hypopt": cmd_hypopt, "vqe": cmd_vqe, "qml": cmd_qml,
            "grad-profile": cmd_grad_profile, "bp-scan": cmd_bp_scan}


def write_outputs(command: str, cfg: dict, record: dict,
                  wall_clock: float) -> list:
    """JSON record + meta + the command's CSV sidecars; returns the paths."""
    out = pathlib.Path(cfg["out"])
    extra = {"wall_clock_seconds": round(wall_clock, 6),
             "workers": cfg["workers"], "out": str(out)}
    record_path, meta_path = write_record(out, command, record, extra)
    written = [record_path, meta_path]
    results = record["results"]
    if command == "hypopt":
        header, rows = es_trace_rows(results["trace"],
                                     hyperparam_names(cfg["family"]))
        written.append(write_csv(out / f"{command}_trace.csv", header, rows))
    elif command == "vqe":
        curves = {m: results["methods"][m]["curve"] for m in cfg["methods"]}
        header, rows = curve_rows(curves)
        written.append(write_csv(out / f"{command}_curves.csv", header, rows))
    elif command == "qml":
        curves = {m: results["methods"][m]["loss_curve"]
                  for m in cfg["methods"]}
        header, rows = curve_rows(curves)
        written.append(write_csv(out / f"{command}_curves.csv", header, rows))
    elif command == "grad-profile":
        header, rows = histogram_rows(results["histogram"])
        written.append(write_csv(out / f"{command}_histogram.csv",
                                 header, rows))
    elif command == "bp-scan":
        header, rows = bp_rows(results["rows"])
        written.append(write_csv(out / f"{command}_bp.csv", header, rows))
    return written


def _summary_lines(command: str, record: dict) -> list[str]:
    results = record["results"]
    if command == "hypopt":
        pairs = ", ".join(f"{n}={v:.6g}" for n, v in
                          zip(hyperparam_names(results["family"]),
                              results["lambda_star"]))
        state = "converged" if results["converged"] else "stopped"
        return [f"lambda*: {pairs} ({state} after "
                f"{results['iterations']} iterations)"]
    if command == "vqe":
        lines = [f"exact ground energy: {results['exact_ground_energy']:.8f}"]
        for method, entry in results["methods"].items():
            lines.append(f"{method}: final energy {entry['final_energy']:.8f}"
                         f" (gap {entry['gap']:.3e})")
        return lines
    if command == "qml":
        lines = [f"dataset {results['dataset']}: {results['num_classes']} "
                 f"classes, {results['n_train']} train / "
                 f"{results['n_test']} test"]
        for method, entry in results["methods"].items():
            lines.append(f"{method}: final loss {entry['final_loss']:.4f}, "
                         f"test accuracy {entry['test_accuracy']:.4f}")
        return lines
    if command == "grad-profile":
        means = ", ".join(f"{v:.3e}"
                          for v in results["layer_mean_abs_gradient"])
        return [f"mean |dC/dtheta| per layer: {means}"]
    lines = []
    for method, slope in results["slopes"].items():
        shown = "n/a" if slope is None else f"{slope:.4f}"
        lines.append(f"{method}: log-variance slope {shown}")
    return lines


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qinitopt",
        description="Initialization-distribution search for parameterized "
                    "quantum circuits.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "hypopt": "tune initialization hyperparameters for one score",
        "vqe": "compare initialization methods on a Hamiltonian file",
        "qml": "compare initialization methods on a CSV dataset",
        "grad-profile": "per-layer gradient-magnitude histograms",
        "bp-scan": "gradient variance versus qubit count",
    }
    for command in COMMANDS:
        p = sub.add_parser(command, help=helps[command])
        p.add_argument("--config", type=pathlib.Path, default=None,
                       help="JSON config file overlaying the defaults")
        p.add_argument("--set", dest="overrides", action="append",
                       default=[], metavar="KEY=VALUE",
                       help="config override, dotted keys allowed")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (overrides the config)")
        p.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
        p.add_argument("--workers", type=int, default=None,
                       help="max concurrent score evaluations")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args.config, args.overrides,
                             args.seed, args.out, args.workers)
        started = time.perf_counter()
        record = _RUNNERS[args.command](cfg)
        wall_clock = time.perf_counter() - started
        written = write_outputs(args.command, cfg, record, wall_clock)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}")
        return 2
    for line in _summary_lines(args.command, record):
        print(line)
    for path in written:
        print(f"wrote {path}")
    print(f"record sha256: {record_hash(record)}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
