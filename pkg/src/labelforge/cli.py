"""Command-line pipeline: apply -> fit -> label -> diagnose, plus extras.

Every command reads a JSON config (``--config`` flag, else the
``LABELFORGE_CONFIG`` environment variable) with optional per-field
overrides. Artifacts embed the LF-set version and a hash of the resolved
config so stale combinations are refused instead of silently mixed, and all
writers are deterministic: re-running a command with unchanged inputs
produces byte-identical files.

Commands:

* ``demo``     -- generate a synthetic corpus, LF file, features, and config
* ``apply``    -- evaluate LFs over the corpus, write the label matrix
* ``fit``      -- fit the generative model on the matrix
* ``label``    -- emit probabilistic labels from the fitted model
* ``diagnose`` -- write the per-LF diagnostic report
* ``scale``    -- run the recovery-vs-sample-size experiment
* ``train``    -- train the noise-aware end model on features + labels
* ``eval``     -- compare two score files with AUC and DeLong's test
* ``serve``    -- start the HTTP workbench backend
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import diagnostics, end_model, lf_dsl, matrix as matrix_mod, model, synth
from .corpus import CorpusError, load_corpus, load_dev_labels, segment_sections
from .prob_labels import ProbLabels

ENV_CONFIG = "LABELFORGE_CONFIG"


class CLIError(Exception):
    """User-facing command failure; message goes to stderr, exit code 2."""


_DEFAULT_CONFIG: dict = {
    "corpus": "corpus.jsonl",
    "id_field": "id",
    "text_field": "text",
    "section_headers": ["FINDINGS:", "IMPRESSION:"],
    "lfs": "lfs.json",
    "dev_labels": None,
    "features": None,
    "truth": None,
    "out_dir": "artifacts",
    "seed": 0,
    "structure": {"mode": "independent", "threshold": 0.05},
    "fit": {
        "max_iter": 500,
        "tol": 1e-7,
        "step": 0.1,
        "init_accuracy": 0.7,
        # null means "dev-set positive rate when dev labels exist, else 0.5"
        "init_beta": None,
        "pin_beta": None,
    },
    "train": {"max_iter": 500, "tol": 1e-10, "step": 1.0, "l2": 1e-4},
    "scale": {
        "m": 10,
        "n_grid": [100, 316, 1000, 3162],
        "seeds": 5,
        "beta": 0.5,
        "acc_range": [0.6, 0.95],
        "prop_range": [0.3, 0.8],
    },
    "serve": {"host": "127.0.0.1", "port": 8000, "static_dir": None},
}


@dataclass
class RunConfig:
    """Resolved configuration plus the directory paths are relative to."""

    values: dict
    base_dir: Path
    config_hash: str = field(init=False)

    def __post_init__(self) -> None:
        blob = json.dumps(self.values, sort_keys=True, separators=(",", ":"))
        self.config_hash = hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def path(self, key: str, required: bool = True) -> Optional[Path]:
        raw = self.values.get(key)
        if raw is None:
            if required:
                raise CLIError(f"config is missing the {key!r} path")
            return None
        p = Path(raw)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        p = Path(self.values["out_dir"])
        return p if p.is_absolute() else self.base_dir / p

    def fit_config(self, dev_rate: Optional[float] = None) -> model.FitConfig:
        f = self.values["fit"]
        init_beta = f.get("init_beta")
        if init_beta is None:
            init_beta = 0.5 if dev_rate is None else dev_rate
        return model.FitConfig(
            max_iter=int(f["max_iter"]),
            tol=float(f["tol"]),
            step=float(f["step"]),
            init_accuracy=float(f["init_accuracy"]),
            init_beta=float(init_beta),
            pin_beta=None if f.get("pin_beta") is None else float(f["pin_beta"]),
            seed=int(self.values["seed"]),
        )

    def train_config(self) -> end_model.TrainConfig:
        t = self.values["train"]
        return end_model.TrainConfig(
            max_iter=int(t["max_iter"]),
            tol=float(t["tol"]),
            step=float(t["step"]),
            l2=float(t["l2"]),
        )


def _deep_merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def load_config(path: Optional[str], overrides: dict) -> RunConfig:
    """Merge defaults <- config file <- command-line overrides."""
    values = dict(_DEFAULT_CONFIG)
    base_dir = Path.cwd()
    resolved = path or os.environ.get(ENV_CONFIG)
    if resolved:
        cfg_path = Path(resolved)
        try:
            loaded = json.loads(cfg_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise CLIError(f"config file not found: {resolved} ({exc})") from exc
        except json.JSONDecodeError as exc:
            raise CLIError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise CLIError("config file must contain a JSON object")
        unknown = set(loaded) - set(_DEFAULT_CONFIG)
        if unknown:
            raise CLIError(f"unknown config keys: {sorted(unknown)}")
        values = _deep_merge(values, loaded)
        base_dir = cfg_path.parent.resolve()
    values = _deep_merge(values, overrides)
    return RunConfig(values=values, base_dir=base_dir)


def _overrides_from_args(args: argparse.Namespace) -> dict:
    out: dict = {}
    direct = {
        "corpus": "corpus",
        "lfs": "lfs",
        "dev": "dev_labels",
        "features": "features",
        "truth": "truth",
        "out": "out_dir",
        "seed": "seed",
    }
    for attr, key in direct.items():
        value = getattr(args, attr, None)
        if value is not None:
            out[key] = value
    if getattr(args, "structure_mode", None) is not None:
        out.setdefault("structure", {})["mode"] = args.structure_mode
    if getattr(args, "structure_threshold", None) is not None:
        out.setdefault("structure", {})["threshold"] = args.structure_threshold
    if getattr(args, "max_iter", None) is not None:
        out.setdefault("fit", {})["max_iter"] = args.max_iter
    if getattr(args, "tol", None) is not None:
        out.setdefault("fit", {})["tol"] = args.tol
    if getattr(args, "pin_beta", None) is not None:
        out.setdefault("fit", {})["pin_beta"] = args.pin_beta
    if getattr(args, "host", None) is not None:
        out.setdefault("serve", {})["host"] = args.host
    if getattr(args, "port", None) is not None:
        out.setdefault("serve", {})["port"] = args.port
    if getattr(args, "static_dir", None) is not None:
        out.setdefault("serve", {})["static_dir"] = args.static_dir
    return out


def _write_json(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _read_json(path: Path, what: str) -> dict:
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise CLIError(f"{what} not found: {path} ({exc})") from exc
    except json.JSONDecodeError as exc:
        raise CLIError(f"{what} is not valid JSON: {exc}") from exc


def _load_pipeline_corpus(cfg: RunConfig):
    corpus_path = cfg.path("corpus")
    try:
        corpus = load_corpus(
            corpus_path, id_field=cfg.values["id_field"], text_field=cfg.values["text_field"]
        )
    except OSError as exc:
        raise CLIError(f"corpus file not found: {corpus_path} ({exc})") from exc
    headers = list(cfg.values["section_headers"])
    if headers:
        corpus = corpus.map_documents(lambda d: segment_sections(d, headers))
    dev = []
    dev_path = cfg.path("dev_labels", required=False)
    if dev_path is not None:
        try:
            dev = load_dev_labels(dev_path, corpus)
        except OSError as exc:
            raise CLIError(f"dev labels file not found: {dev_path} ({exc})") from exc
    return corpus, dev


def _load_lfset(cfg: RunConfig) -> lf_dsl.LFSet:
    lf_path = cfg.path("lfs")
    if not lf_path.exists():
        raise CLIError(f"LF file not found: {lf_path}")
    return lf_dsl.load_lf_file(lf_path)


def _load_matrix_artifacts(cfg: RunConfig):
    out = cfg.out_dir
    csv_path = out / "matrix.csv"
    meta_path = out / "matrix.meta.json"
    if not csv_path.exists() or not meta_path.exists():
        raise CLIError(f"matrix artifacts missing under {out}; run `apply` first")
    return matrix_mod.load_matrix(csv_path, meta_path)


def _dev_positive_rate(cfg: RunConfig) -> Optional[float]:
    """Positive rate of the dev set, if one is configured and non-empty."""
    if cfg.values.get("dev_labels") is None:
        return None
    _, dev = _load_pipeline_corpus(cfg)
    if not dev:
        return None
    return sum(1 for d in dev if d.y > 0) / len(dev)


def _structure_for(
    cfg: RunConfig, mat, dev_rate: Optional[float] = None
) -> Optional[model.DependencyStructure]:
    mode = cfg.values["structure"]["mode"]
    if mode == "independent":
        return None
    if mode == "learned":
        return model.learn_structure(
            mat, threshold=float(cfg.values["structure"]["threshold"]),
            config=cfg.fit_config(dev_rate),
        )
    raise CLIError(f"unknown structure mode {mode!r} (use 'independent' or 'learned')")


# ---------------------------------------------------------------------------
# Commands


def cmd_demo(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus, dev, truth = synth.gen_text_corpus(args.n, args.seed)

    lines = [json.dumps({"id": d.id, "text": d.text}, sort_keys=True) for d in corpus]
    (out / "corpus.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")

    with open(out / "dev_labels.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["doc_id", "y"])
        for d in dev:
            writer.writerow([d.doc_id, d.y])
    with open(out / "truth.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["doc_id", "y"])
        for doc_id in corpus.ids:
            writer.writerow([doc_id, truth[doc_id]])

    (out / "terms_abnormal.txt").write_text(
        "\n".join(synth.ABNORMAL_TERMS) + "\n", encoding="utf-8"
    )
    lf_file = {
        "lfs": [
            {"name": "lf_pneumo", "emit": 1, "rule": {"prefix_word": "pneumo"}},
            {
                "name": "lf_abnormal_guarded",
                "emit": 1,
                "rule": {
                    "negation_guard": {
                        "window": 2,
                        "rule": {"term_list": "terms_abnormal.txt"},
                    }
                },
            },
            {
                "name": "lf_no_acute",
                "emit": -1,
                "rule": {
                    "in_section": {"name": "IMPRESSION", "rule": {"contains": "no acute"}}
                },
            },
            {
                "name": "lf_normal_words",
                "emit": -1,
                "rule": {
                    "any": [{"contains": "normal"}, {"contains": "unremarkable"}]
                },
            },
            {"name": "lf_short_report", "emit": -1, "rule": {"length_below": 22}},
        ]
    }
    _write_json(out / "lfs.json", lf_file)

    ids = corpus.ids
    y = np.array([truth[i] for i in ids])
    features = synth.gen_features(y, d=20, noise_sigma=1.0, seed=args.seed + 1, doc_ids=ids)
    end_model.save_features(features, out / "features.csv")

    config = _deep_merge(
        _DEFAULT_CONFIG,
        {
            "corpus": "corpus.jsonl",
            "lfs": "lfs.json",
            "dev_labels": "dev_labels.csv",
            "features": "features.csv",
            "truth": "truth.csv",
            "out_dir": "artifacts",
            "seed": args.seed,
            # single-polarity rules carry their class signal partly in
            # whether they fire at all; pairing correlated LFs lets the
            # model express that, so the demo learns the structure
            "structure": {"mode": "learned", "threshold": 0.05},
            "fit": {**_DEFAULT_CONFIG["fit"], "max_iter": 2000, "tol": 1e-9},
        },
    )
    _write_json(out / "config.json", config)
    print(f"demo assets written to {out}")
    print(f"next: labelforge apply --config {out / 'config.json'}")
    return 0


def cmd_apply(cfg: RunConfig) -> int:
    corpus, dev = _load_pipeline_corpus(cfg)
    lfset = _load_lfset(cfg)
    warnings = lf_dsl.EvalWarnings()
    mat = lf_dsl.apply_all(lfset, corpus, warnings)
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    matrix_mod.save_matrix(
        mat,
        out / "matrix.csv",
        out / "matrix.meta.json",
        extra_meta={"config_hash": cfg.config_hash, "warnings": warnings.to_dict()},
    )
    stats = matrix_mod.compute_stats(mat, dev)
    payload = stats.to_dict()
    payload.update({"lfset_version": lfset.version, "config_hash": cfg.config_hash})
    _write_json(out / "stats.json", payload)
    print(f"applied {len(lfset)} LFs to {len(corpus)} documents -> {out / 'matrix.csv'}")
    return 0


def cmd_fit(cfg: RunConfig) -> int:
    mat, meta = _load_matrix_artifacts(cfg)
    lfset = _load_lfset(cfg)
    if lfset.version != meta.get("lfset_version"):
        raise CLIError(
            "version mismatch: LF file does not match the stored matrix "
            f"({lfset.version[:12]} vs {meta.get('lfset_version', '')[:12]}); re-run `apply`"
        )
    dev_rate = _dev_positive_rate(cfg)
    structure = _structure_for(cfg, mat, dev_rate)
    params = model.fit(mat, structure, cfg.fit_config(dev_rate))
    payload = params.to_dict()
    payload.update(
        {
            "model_version": params.version(),
            "lfset_version": meta.get("lfset_version", ""),
            "config_hash": cfg.config_hash,
            "structure": {
                "mode": cfg.values["structure"]["mode"],
                "edges": [list(e) for e in (structure.edges if structure else ())],
            },
        }
    )
    _write_json(cfg.out_dir / "model.json", payload)
    print(
        f"fitted model on {mat.n} x {mat.m} matrix "
        f"(beta={params.beta:.4f}, {payload['structure']['mode']} structure)"
    )
    return 0


def _load_model_artifact(cfg: RunConfig) -> tuple[model.GenerativeParams, dict]:
    path = cfg.out_dir / "model.json"
    obj = _read_json(path, "model artifact")
    return model.GenerativeParams.from_dict(obj), obj


def cmd_label(cfg: RunConfig) -> int:
    mat, meta = _load_matrix_artifacts(cfg)
    params, model_obj = _load_model_artifact(cfg)
    if model_obj.get("lfset_version") != meta.get("lfset_version"):
        raise CLIError(
            "version mismatch: model was fitted on a different LF set; "
            "re-run `apply` and `fit`"
        )
    _, dev = _load_pipeline_corpus(cfg)
    labels = model.emit_labels(mat, params, dev)
    out = cfg.out_dir
    (out / "labels.jsonl").write_text(labels.to_jsonl(), encoding="utf-8")
    _write_json(
        out / "labels.meta.json",
        {
            "model_version": params.version(),
            "lfset_version": meta.get("lfset_version", ""),
            "config_hash": cfg.config_hash,
            "n": len(labels),
            "n_excluded": len(labels.excluded_ids),
        },
    )
    print(f"wrote {len(labels)} probabilistic labels ({len(labels.excluded_ids)} excluded)")
    return 0


def cmd_diagnose(cfg: RunConfig) -> int:
    mat, meta = _load_matrix_artifacts(cfg)
    params, model_obj = _load_model_artifact(cfg)
    if model_obj.get("lfset_version") != meta.get("lfset_version"):
        raise CLIError(
            "version mismatch: model was fitted on a different LF set; "
            "re-run `apply` and `fit`"
        )
    _, dev = _load_pipeline_corpus(cfg)
    report = diagnostics.lf_report(mat, dev, params)
    report["config_hash"] = cfg.config_hash
    _write_json(cfg.out_dir / "report.json", report)
    (cfg.out_dir / "report.md").write_text(
        diagnostics.render_report_markdown(report), encoding="utf-8"
    )
    flagged = [lf["name"] for lf in report["lfs"] if lf["flags"]]
    print(
        f"report written for {report['m']} LFs"
        + (f"; flagged: {', '.join(flagged)}" if flagged else "")
    )
    return 0


def cmd_scale(cfg: RunConfig, args: argparse.Namespace) -> int:
    sc = dict(cfg.values["scale"])
    if args.n_grid:
        sc["n_grid"] = [int(v) for v in args.n_grid.split(",")]
    if args.seeds is not None:
        sc["seeds"] = args.seeds
    template = synth.SynthSpec(
        m=int(sc["m"]),
        n=2,
        seed=0,
        beta=float(sc["beta"]),
        acc_range=tuple(sc["acc_range"]),
        prop_range=tuple(sc["prop_range"]),
    )
    result = diagnostics.scaling_experiment(
        template, sc["n_grid"], seeds=range(int(sc["seeds"])), fit_config=cfg.fit_config()
    )
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    payload = result.to_dict()
    payload["config_hash"] = cfg.config_hash
    _write_json(out / "scaling.json", payload)
    (out / "scaling.csv").write_text(result.to_csv(), encoding="utf-8")
    print(f"scaling slope {result.slope:.3f} over n={sc['n_grid']}")
    return 0


def cmd_train(cfg: RunConfig) -> int:
    features_path = cfg.path("features")
    if not features_path.exists():
        raise CLIError(f"features file not found: {features_path}")
    features = end_model.load_features(features_path)
    labels_path = cfg.out_dir / "labels.jsonl"
    if not labels_path.exists():
        raise CLIError(f"labels artifact missing: {labels_path}; run `label` first")
    labels_meta = _read_json(cfg.out_dir / "labels.meta.json", "labels metadata")
    labels = ProbLabels.from_jsonl(
        labels_path.read_text(encoding="utf-8"),
        model_version=labels_meta.get("model_version", ""),
    )
    trained = end_model.train_noise_aware(features, labels, cfg.train_config())
    payload = trained.to_dict()
    payload.update(
        {
            "model_version": labels_meta.get("model_version", ""),
            "lfset_version": labels_meta.get("lfset_version", ""),
            "config_hash": cfg.config_hash,
        }
    )
    _write_json(cfg.out_dir / "end_model.json", payload)
    scores = trained.predict_scores(features)
    end_model.save_scores(features.doc_ids, scores, cfg.out_dir / "scores.csv")
    print(
        f"trained end model on {trained.meta['n']} rows "
        f"({trained.meta['iterations']} iterations); scores -> scores.csv"
    )
    return 0


def _load_truth(path: Path) -> dict[str, int]:
    labels: dict[str, int] = {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["doc_id", "y"]:
            raise CLIError(f"unexpected truth header in {path}: {header}")
        for row in reader:
            if not row:
                continue
            if row[1] not in ("-1", "1"):
                raise CLIError(f"truth labels must be -1 or 1, got {row[1]!r}")
            labels[row[0]] = int(row[1])
    return labels


def cmd_eval(cfg: RunConfig, args: argparse.Namespace) -> int:
    truth_path = Path(args.truth) if args.truth else cfg.path("truth")
    if truth_path is None or not truth_path.exists():
        raise CLIError("eval needs a truth CSV (--truth or config 'truth')")
    truth = _load_truth(truth_path)

    def scored(path_str: str):
        ids, scores = end_model.load_scores(Path(path_str))
        missing = [i for i in ids if i not in truth]
        if missing:
            raise CLIError(f"no truth label for scored document {missing[0]!r}")
        y = np.array([truth[i] for i in ids])
        return ids, scores, y

    ids_a, scores_a, y_a = scored(args.scores_a)
    payload: dict = {"config_hash": cfg.config_hash, "n": len(ids_a)}
    if args.scores_b:
        ids_b, scores_b, y_b = scored(args.scores_b)
        if ids_a != ids_b:
            raise CLIError("score files must cover the same documents in the same order")
        res = end_model.delong_test(scores_a, scores_b, y_a)
        payload.update(res.to_dict())
        print(
            f"AUC a={res.auc_a:.4f} b={res.auc_b:.4f} z={res.z:.3f} p={res.p:.4f}"
        )
    else:
        auc = end_model.roc_auc(scores_a, y_a)
        payload.update({"auc_a": auc})
        print(f"AUC {auc:.4f} over {len(ids_a)} documents")
    _write_json(cfg.out_dir / "eval.json", payload)
    return 0


def cmd_serve(cfg: RunConfig) -> int:
    import uvicorn

    from .server import build_state, create_app

    holder = build_state(cfg)
    serve = cfg.values["serve"]
    static_dir = serve.get("static_dir")
    if static_dir is not None:
        static_path = Path(static_dir)
        if not static_path.is_absolute():
            static_path = cfg.base_dir / static_path
        if not static_path.is_dir():
            raise CLIError(f"static directory not found: {static_path}")
        static_dir = str(static_path)
    app = create_app(holder, static_dir=static_dir)
    uvicorn.run(app, host=serve["host"], port=int(serve["port"]), log_level="info")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="labelforge",
        description="Weak-supervision pipeline: labeling functions, "
        "generative vote aggregation, and noise-aware training.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    demo = sub.add_parser("demo", help="generate synthetic demo assets")
    demo.add_argument("--out", default="demo", help="output directory")
    demo.add_argument("--n", type=int, default=1000, help="number of documents")
    demo.add_argument("--seed", type=int, default=0)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", default=None, help="path to JSON config")
        p.add_argument("--corpus", default=None, help="override corpus path")
        p.add_argument("--lfs", default=None, help="override LF file path")
        p.add_argument("--dev", default=None, help="override dev labels path")
        p.add_argument("--features", default=None, help="override features path")
        p.add_argument("--truth", default=None, help="override truth labels path")
        p.add_argument("--out", default=None, help="override artifact directory")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--structure-mode", choices=["independent", "learned"], default=None)
        p.add_argument("--structure-threshold", type=float, default=None)
        p.add_argument("--max-iter", type=int, default=None, help="fit iteration cap")
        p.add_argument("--tol", type=float, default=None, help="fit convergence tolerance")
        p.add_argument("--pin-beta", type=float, default=None, help="freeze class balance")

    for name, help_text in [
        ("apply", "evaluate LFs over the corpus"),
        ("fit", "fit the generative model"),
        ("label", "emit probabilistic labels"),
        ("diagnose", "write the LF diagnostic report"),
        ("train", "train the noise-aware end model"),
    ]:
        common(sub.add_parser(name, help=help_text))

    scale = sub.add_parser("scale", help="recovery error vs. sample size")
    common(scale)
    scale.add_argument("--n-grid", default=None, help="comma-separated sample sizes")
    scale.add_argument("--seeds", type=int, default=None, help="number of seeds")

    ev = sub.add_parser("eval", help="AUC / DeLong comparison of score files")
    common(ev)
    ev.add_argument("--scores-a", required=True, help="first scores CSV")
    ev.add_argument("--scores-b", default=None, help="second scores CSV (optional)")

    serve = sub.add_parser("serve", help="start the workbench HTTP server")
    common(serve)
    serve.add_argument("--host", default=None)
    serve.add_argument("--port", type=int, default=None)
    serve.add_argument("--static-dir", default=None, help="frontend build to serve")

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "demo":
            return cmd_demo(args)
        cfg = load_config(args.config, _overrides_from_args(args))
        if args.command == "apply":
            return cmd_apply(cfg)
        if args.command == "fit":
            return cmd_fit(cfg)
        if args.command == "label":
            return cmd_label(cfg)
        if args.command == "diagnose":
            return cmd_diagnose(cfg)
        if args.command == "scale":
            return cmd_scale(cfg, args)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "eval":
            return cmd_eval(cfg, args)
        if args.command == "serve":
            return cmd_serve(cfg)
        raise CLIError(f"unknown command {args.command!r}")
    except (CLIError, CorpusError, lf_dsl.LFParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
