"""habitmotion command line: corpus synthesis, training, transfer,
evaluation, ablations, and embedding plots.

Exit codes: 0 success, 1 config/validation error, 2 domain error
(unknown category, invariant violation), 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from habitmotion import __version__
from habitmotion.config import RunConfig, dump_config, load_config, make_config
from habitmotion.embeddings import load_embeddings
from habitmotion.errors import ConfigError, DomainError, UnknownCategoryError
from habitmotion.extractor import FeatureExtractor, train_feature_extractor
from habitmotion.habit import HabitModel, train_habit
from habitmotion.metrics import FeatureSet, diversity, downstream_score, fid, intra_fid, mpjpe, one_nna
from habitmotion.motion import build_corpus, load_corpus, load_motion, save_motion
from habitmotion.motion.synth import PROFILES
from habitmotion.plots import embedding_scatter_svg
from habitmotion.transfer import (
    TransferRequest,
    batch_transfer,
    eligible_targets,
    transfer,
    write_manifest_csv,
)
from habitmotion.vqvae import VqvaeModel, train_vqvae

METRIC_NAMES = ("fid", "intra_fid", "downstream", "diversity", "one_nna", "mpjpe")
_METRIC_ALIASES = {"nna": "one_nna", "intra": "intra_fid"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="habitmotion", description=__doc__)
    p.add_argument("--version", action="version", version=f"habitmotion {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("synth", help="generate a synthetic quadruped corpus")
    s.add_argument("--profile", required=True, choices=sorted(PROFILES),
                   help="corpus profile")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int, default=0, help="generation seed")

    t = sub.add_parser("train", help="train a model component")
    t.add_argument("what", choices=("vqvae", "habit", "extractor"),
                   help="component to train")
    t.add_argument("--config", required=True, help="run config file (YAML or JSON)")
    t.add_argument("--category", default=None,
                   help="habit training: single category (default: all in corpus)")
    t.add_argument("--profile", default=None, help="override the config profile")
    t.add_argument("--seed", type=int, default=None, help="override the config seed")

    tr = sub.add_parser("transfer", help="habit-preserved motion transfer")
    tr.add_argument("--src", required=True, help="source motion JSON")
    tr.add_argument("--target", required=True, help="target category label")
    tr.add_argument("--mode", choices=("det", "stoch"), default="det",
                    help="habit latent mode")
    tr.add_argument("--seed", type=int, default=0, help="stochastic habit seed")
    tr.add_argument("--out", required=True, help="output motion JSON")
    tr.add_argument("--run", required=True, help="run directory with checkpoints")
    tr.add_argument("--embeddings", default=None,
                    help="embedding store (default: <run>/embeddings.json)")

    e = sub.add_parser("evaluate", help="compute the metric suite")
    e.add_argument("--real", required=True, help="real corpus directory")
    e.add_argument("--generated", required=True, help="generated motions directory")
    e.add_argument("--metrics", default="all",
                   help="all or comma list of " + ",".join(METRIC_NAMES))
    e.add_argument("--out", required=True, help="output prefix (writes .json and .csv)")
    e.add_argument("--run", default=None,
                   help="run directory (enables the downstream transfer score)")
    e.add_argument("--embeddings", default=None, help="embedding store for downstream")
    e.add_argument("--diversity-pairs", type=int, default=300)
    e.add_argument("--min-samples", type=int, default=5)
    e.add_argument("--seed", type=int, default=0)

    a = sub.add_parser("ablate", help="run an ablation study")
    a.add_argument("--study", required=True, choices=("habit-components", "alpha"))
    a.add_argument("--config", required=True, help="run config file")
    a.add_argument("--out", required=True, help="output directory")
    a.add_argument("--profile", default=None, help="override the config profile")
    a.add_argument("--seed", type=int, default=None, help="override the config seed")

    pe = sub.add_parser("plot-embeddings", help="PCA scatter of the embedding store")
    pe.add_argument("--embeddings", required=True, help="embedding JSON file")
    pe.add_argument("--out", required=True, help="output SVG path")
    return p


# -- run directory helpers -----------------------------------------------


def _vqvae_path(run: Path) -> Path:
    return run / "vqvae.hmck"


def _load_run(run_dir, embeddings_path=None):
    run = Path(run_dir)
    model = VqvaeModel.load(_vqvae_path(run))
    habit_models = {}
    for path in sorted(run.glob("habit_*.hmck")):
        m = HabitModel.load(path)
        habit_models[m.category] = m
    store_path = embeddings_path or (run / "embeddings.json")
    store = load_embeddings(store_path)
    store.attach_projection(model.project_raw)
    return model, habit_models, store


def _load_motion_set(path):
    """A corpus directory (with corpus.json) or a flat directory of
    motion JSON files."""
    from habitmotion.motion.synth import Corpus, CorpusItem

    root = Path(path)
    if (root / "corpus.json").exists():
        return load_corpus(root)
    files = sorted(root.glob("*.json"))
    files = [f for f in files if not f.name.endswith(".manifest.json")]
    if not files:
        raise ConfigError(f"{path}: no motion JSON files found")
    items = [CorpusItem(f.name, load_motion(f), "val") for f in files]
    return Corpus(items)


# -- commands --------------------------------------------------------------


def cmd_synth(args) -> int:
    build_corpus(args.profile, args.out, seed=args.seed)
    n = len(PROFILES[args.profile]["categories"])
    print(f"wrote {args.profile} corpus ({n} categories) to {args.out}")
    return 0


def _prepare_run(cfg: RunConfig):
    out = Path(cfg.paths.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "run_config.json", "w", encoding="utf-8") as f:
        f.write(dump_config(cfg))
        f.write("\n")
    corpus = load_corpus(cfg.paths.corpus)
    store = load_embeddings(cfg.embeddings_path())
    return out, corpus, store


def cmd_train(args) -> int:
    cfg = load_config(args.config, profile=args.profile, seed=args.seed)
    if not cfg.paths.corpus:
        raise ConfigError("config is missing paths.corpus")
    out, corpus, store = _prepare_run(cfg)

    if args.what == "habit":
        cats = [args.category] if args.category else corpus.categories
        by_cat = corpus.by_category("train")
        for cat in cats:
            if cat not in by_cat:
                raise UnknownCategoryError(cat)
            model = train_habit([it.motion for it in by_cat[cat]], cfg.habit, seed=cfg.seed)
            model.save(out / f"habit_{cat}.hmck")
            print(f"habit model for {cat}: final NLL {model.final_nll:.4f}")
        return 0

    if args.what == "extractor":
        model = train_feature_extractor(corpus, seed=cfg.seed, cfg=cfg.extractor)
        model.save(out / "extractor.hmck")
        val = corpus.split("val")
        acc = model.accuracy([it.motion for it in val], [it.motion.category for it in val])
        print(f"extractor trained: validation accuracy {acc:.2%}")
        return 0

    # vqvae: needs per-category habit checkpoints when the habit channel is on
    habit_models = {}
    if cfg.vqvae_model.use_habit_encoder:
        for cat in corpus.categories:
            path = out / f"habit_{cat}.hmck"
            if not path.exists():
                raise ConfigError(
                    f"missing habit checkpoint {path}; run `habitmotion train habit` first"
                )
            habit_models[cat] = HabitModel.load(path)
    model_cfg = replace(cfg.vqvae_model, raw_embed_dim=store.dim)
    result = train_vqvae(
        model_cfg,
        cfg.vqvae_train,
        corpus,
        habit_models,
        store,
        log_path=out / "vqvae_train_log.csv",
        checkpoint_path=_vqvae_path(out),
    )
    last = result.log[-1]
    print(
        f"vqvae trained {last.iteration} iterations: total {last.total:.5f}, "
        f"perplexity {last.perplexity:.1f}"
    )
    return 0


def cmd_transfer(args) -> int:
    model, habit_models, store = _load_run(args.run, args.embeddings)
    source = load_motion(args.src)
    mode = {"det": "deterministic", "stoch": "stochastic"}[args.mode]
    request = TransferRequest(source, args.target, habit_mode=mode, seed=args.seed,
                              source_id=str(args.src))
    result = batch_transfer([request], model, habit_models, store)
    if result.errors:
        raise result.errors[0][1]
    save_motion(result.motions[0], args.out)
    write_manifest_csv(str(args.out) + ".manifest.csv", result.manifest)
    row = result.manifest[0]
    print(
        f"transferred {source.category} -> {args.target} "
        f"(habit source: {row.habit_source_category}) to {args.out}"
    )
    return 0


def _parse_metric_list(spec: str):
    if spec == "all":
        return set(METRIC_NAMES)
    out = set()
    for token in spec.split(","):
        token = token.strip()
        name = _METRIC_ALIASES.get(token, token)
        if name not in METRIC_NAMES:
            raise ConfigError(f"unknown metric {token!r} (have {', '.join(METRIC_NAMES)})")
        out.add(name)
    return out


def cmd_evaluate(args) -> int:
    wanted = _parse_metric_list(args.metrics)
    real = _load_motion_set(args.real)
    generated = _load_motion_set(args.generated)
    run = Path(args.run) if args.run else None
    extractor_path = (run / "extractor.hmck") if run else None
    need_features = wanted & {"fid", "intra_fid", "downstream", "diversity", "one_nna"}
    if need_features and (extractor_path is None or not extractor_path.exists()):
        raise ConfigError(
            "feature-based metrics need --run pointing at a directory with "
            "extractor.hmck"
        )

    report = {name: None for name in METRIC_NAMES}
    per_category_rows = {}

    if need_features:
        extractor = FeatureExtractor.load(extractor_path)
        real_feats = FeatureSet(
            extractor.features([it.motion for it in real.items]),
            labels=[it.motion.category for it in real.items],
            source="real",
        )
        gen_feats = FeatureSet(
            extractor.features([it.motion for it in generated.items]),
            labels=[it.motion.category for it in generated.items],
            source="generated",
        )
        if "fid" in wanted:
            report["fid"] = fid(gen_feats, real_feats)
        if "intra_fid" in wanted:
            intra = intra_fid(real_feats, gen_feats)
            report["intra_fid"] = {**intra["per_category"], "mean": intra["mean"]}
            for cat, value in intra["per_category"].items():
                per_category_rows.setdefault(cat, {})["intra_fid"] = value
        if "diversity" in wanted:
            report["diversity"] = diversity(gen_feats, pairs=args.diversity_pairs,
                                            seed=args.seed)
            report["diversity_real"] = diversity(real_feats, pairs=args.diversity_pairs,
                                                 seed=args.seed)
        if "one_nna" in wanted:
            report["one_nna"] = one_nna(gen_feats, real_feats)
        if "downstream" in wanted and run is not None and _vqvae_path(run).exists():
            model, habit_models, store = _load_run(run, args.embeddings)
            ds = downstream_score(
                real.split("val"), model, habit_models, store, extractor,
                min_samples=args.min_samples, real_items=real.items,
            )
            report["downstream"] = ds["mean"]
            for cat, value in ds["per_target"].items():
                per_category_rows.setdefault(cat, {})["downstream"] = value

    if "mpjpe" in wanted:
        by_name = {Path(it.name).name: it.motion for it in real.items}
        pairs = [
            (by_name[Path(it.name).name], it.motion)
            for it in generated.items
            if Path(it.name).name in by_name
        ]
        if pairs:
            report["mpjpe"] = float(np.mean([mpjpe(a, b) for a, b in pairs]))

    for it in real.items:
        per_category_rows.setdefault(it.motion.category, {})
    for cat in per_category_rows:
        per_category_rows[cat]["n_real"] = sum(
            1 for it in real.items if it.motion.category == cat
        )
        per_category_rows[cat]["n_generated"] = sum(
            1 for it in generated.items if it.motion.category == cat
        )

    json_path = Path(str(args.out) + ".json")
    json_path.parent.mkdir(parents=True, exist_ok=True)
    with open(json_path, "w", encoding="utf-8") as f:
        json.dump(report, f, indent=1, sort_keys=True)
        f.write("\n")
    with open(str(args.out) + ".csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(["category", "n_real", "n_generated", "intra_fid", "downstream"])
        for cat in sorted(per_category_rows):
            row = per_category_rows[cat]
            writer.writerow(
                [cat, row.get("n_real", 0), row.get("n_generated", 0),
                 _fmt(row.get("intra_fid")), _fmt(row.get("downstream"))]
            )
    shown = {k: report[k] for k in sorted(wanted) if report.get(k) is not None}
    print(json.dumps(shown, indent=1, sort_keys=True, default=str))
    print(f"wrote {json_path} and {args.out}.csv")
    return 0


def _fmt(value):
    return "" if value is None else repr(float(value))


def _ablation_variants(study):
    if study == "habit-components":
        # Table layout: components off first, full model last.
        return [
            {"id": "none", "use_habit_encoder": False, "use_text_encoder": False},
            {"id": "habit-only", "use_habit_encoder": True, "use_text_encoder": False},
            {"id": "text-only", "use_habit_encoder": False, "use_text_encoder": True},
            {"id": "full", "use_habit_encoder": True, "use_text_encoder": True},
        ]
    return [{"id": f"alpha={a}", "alpha": a} for a in (0.0, 0.25, 0.5, 0.75, 1.0)]


def evaluate_transfer_quality(corpus, model, habit_models, store, extractor,
                              min_samples=5, diversity_pairs=300, seed=0):
    """Transfer every validation motion to each eligible other category
    and score against the real corpus."""
    val = corpus.split("val")
    targets = eligible_targets(val, min_samples)
    requests = [
        TransferRequest(it.motion, tgt, source_id=it.name)
        for it in val
        for tgt in targets
        if tgt != it.motion.category
    ]
    result = batch_transfer(requests, model, habit_models, store)
    if result.errors:
        req, err = result.errors[0]
        raise DomainError(f"transfer failed for {req.source_id} -> {req.target}: {err}")
    real_feats = FeatureSet(
        extractor.features([it.motion for it in corpus.items]),
        labels=[it.motion.category for it in corpus.items],
        source="real",
    )
    gen_feats = FeatureSet(
        extractor.features(result.motions),
        labels=[m.category for m in result.motions],
        source="generated",
    )
    intra = intra_fid(
        FeatureSet(
            real_feats.rows[[i for i, l in enumerate(real_feats.labels) if l in set(gen_feats.labels)]],
            labels=[l for l in real_feats.labels if l in set(gen_feats.labels)],
        ),
        gen_feats,
    )
    ds = downstream_score(val, model, habit_models, store, extractor,
                          min_samples=min_samples, real_items=corpus.items)
    return {
        "fid": fid(gen_feats, real_feats),
        "intra_fid": intra["mean"],
        "downstream": ds["mean"],
        "diversity": diversity(gen_feats, pairs=diversity_pairs, seed=seed),
        "one_nna": one_nna(gen_feats, real_feats),
    }


def cmd_ablate(args) -> int:
    cfg = load_config(args.config, profile=args.profile, seed=args.seed)
    if not cfg.paths.corpus:
        raise ConfigError("config is missing paths.corpus")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(cfg.paths.corpus)

    by_cat = corpus.by_category("train")
    habit_models = {
        cat: train_habit([it.motion for it in items], cfg.habit, seed=cfg.seed)
        for cat, items in by_cat.items()
    }
    extractor = train_feature_extractor(corpus, seed=cfg.seed, cfg=cfg.extractor)

    rows = []
    for variant in _ablation_variants(args.study):
        model_cfg = cfg.vqvae_model
        train_cfg = cfg.vqvae_train
        if "alpha" in variant:
            train_cfg = replace(train_cfg, alpha=variant["alpha"])
        else:
            model_cfg = replace(
                model_cfg,
                use_habit_encoder=variant["use_habit_encoder"],
                use_text_encoder=variant["use_text_encoder"],
            )
        store = load_embeddings(cfg.embeddings_path())
        model_cfg = replace(model_cfg, raw_embed_dim=store.dim)
        result = train_vqvae(model_cfg, train_cfg, corpus, habit_models, store)
        store.attach_projection(result.model.project_raw)
        scores = evaluate_transfer_quality(
            corpus, result.model, habit_models, store, extractor,
            min_samples=cfg.metrics.min_samples,
            diversity_pairs=cfg.metrics.diversity_pairs, seed=cfg.seed,
        )
        row = {"variant": variant["id"], **{k: v for k, v in variant.items() if k != "id"},
               **scores}
        rows.append(row)
        print(json.dumps(row, sort_keys=True))

    with open(out / f"ablation_{args.study}.json", "w", encoding="utf-8") as f:
        json.dump(rows, f, indent=1, sort_keys=True)
        f.write("\n")
    keys = list(rows[0].keys())
    with open(out / f"ablation_{args.study}.csv", "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(keys)
        for row in rows:
            writer.writerow([row[k] for k in keys])
    print(f"wrote ablation_{args.study}.json/.csv to {out}")
    return 0


def cmd_plot_embeddings(args) -> int:
    store = load_embeddings(args.embeddings)
    svg = embedding_scatter_svg(store)
    with open(args.out, "w", encoding="utf-8") as f:
        f.write(svg)
    print(f"wrote {args.out} ({len(store.labels())} categories)")
    return 0


_DISPATCH = {
    "synth": cmd_synth,
    "train": cmd_train,
    "transfer": cmd_transfer,
    "evaluate": cmd_evaluate,
    "ablate": cmd_ablate,
    "plot-embeddings": cmd_plot_embeddings,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _DISPATCH[args.command](args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except DomainError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
