"""Command-line interface: reproducible batch stages and a one-shot pipeline.

Stages mirror the library layers and exchange plain CSV/JSON artifacts::

    aliasmine extract   events.csv meta.csv --tau 90 --out features.csv
    aliasmine classify  features.csv --classifier knn --folds 10 --seed 7 \
                        --theta 20 --out confusion.json
    aliasmine mine      confusion.json --lambda 0.9 --min-score 0.5 \
                        --top-k 100 --out pairs.csv
    aliasmine evaluate  pairs.csv meta.csv --surrogates surrogates.json \
                        --tier SUG --out report.json
    aliasmine pipeline  config.toml

Every stage is deterministic given its inputs and seeds; rerunning a command
rewrites byte-identical artifacts.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import classify as _classify
from . import dataset as _dataset
from . import evaluation as _evaluation
from . import lattice as _lattice
from . import mining as _mining


def _cmd_extract(args) -> int:
    metas = _dataset.read_meta_csv(args.meta)
    events = _dataset.read_events_csv(args.events)
    features = _dataset.extract_features(events, args.tau, metas)
    _dataset.write_features_csv(args.out, features)
    print(f"wrote {len(features)} feature vectors to {args.out}")
    return 0


def _cmd_classify(args) -> int:
    dataset = _dataset.read_features_csv(args.features)
    if args.theta > 1:
        dataset = _dataset.filter_min_traces(dataset, args.theta)
    config = _classify.ClassifierConfig(
        kind=args.classifier,
        k=args.k,
        variance_floor=args.variance_floor,
        folds=args.folds,
        seed=args.seed,
    )
    cm = _classify.cross_validate(dataset, config)
    _classify.write_confusion_json(args.out, cm)
    print(f"wrote {cm.n}x{cm.n} confusion matrix to {args.out}")
    return 0


def _load_matrix(path) -> "_classify.NormalizedConfusionMatrix":
    # accept either interchange schema: raw counts or already-normalized rows
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if isinstance(payload, dict) and "rows" in payload:
        return _classify.read_normalized_json(path)
    return _classify.normalize(_classify.read_confusion_json(path))


def _cmd_mine(args) -> int:
    m = _load_matrix(args.confusion)
    config = _mining.MiningConfig(
        lambda_=args.lambda_, min_score=args.min_score, top_k=args.top_k
    )
    pairs = _mining.mine(m, config)
    _mining.write_pairs_csv(args.out, pairs)
    if args.json_out:
        _mining.write_pairs_json(args.json_out, pairs)
    if args.concepts:
        _lattice.write_concepts_json(
            args.concepts, _lattice.enumerate_concepts(m, config.min_score)
        )
    print(f"wrote {len(pairs)} candidate pairs to {args.out}")
    return 0


def _read_surrogates_json(path) -> tuple[list[tuple[str, str]], list[str]]:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    pairs = [tuple(p) for p in payload.get("pairs", [])]
    labels = list(payload.get("labels", []))
    return pairs, labels


def _write_surrogates_json(path, pairs, labels) -> None:
    payload = {"pairs": [list(p) for p in pairs], "labels": sorted(labels)}
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _cmd_evaluate(args) -> int:
    pairs = _mining.read_pairs_csv(args.pairs)
    metas = _dataset.read_meta_csv(args.meta)
    surrogate_pairs: list[tuple[str, str]] = []
    universe: list[str] = []
    if args.surrogates:
        surrogate_pairs, universe = _read_surrogates_json(args.surrogates)
    if not universe:
        universe = sorted({m.avatar.label for m in metas.values()})
    gt = _evaluation.GroundTruth(
        surrogate_pairs=frozenset(frozenset(p) for p in surrogate_pairs),
        identity_index={m.avatar.label: m.avatar for m in metas.values()},
        tier=args.tier,
    )
    report, labeled = _evaluation.evaluate_ranking(pairs, gt, universe)
    _evaluation.write_report_json(args.out, report, labeled)
    if args.ranking_csv:
        _evaluation.write_labeled_csv(args.ranking_csv, labeled)
    print(
        f"tier {report.tier}: precision={report.precision:.3f} "
        f"recall={report.recall:.3f} f1={report.f1:.3f} "
        f"p@10={report.p_at_10:.3f} map={report.map:.3f} auc={report.auc:.3f}"
    )
    return 0


# ---------------------------------------------------------------------------
# pipeline
# ---------------------------------------------------------------------------


def _require(table: dict, section: str, key: str):
    try:
        return table[section][key]
    except KeyError:
        raise ValueError(f"pipeline config is missing [{section}] {key}") from None


def run_pipeline(config_path, outdir_override=None) -> dict[str, Path]:
    """Run extract -> inject -> classify -> mine -> evaluate from one config.

    Returns the paths of every written artifact.  All randomness flows from
    the seeds in the config, so reruns are byte-identical.
    """
    config_path = Path(config_path)
    with open(config_path, "rb") as fh:
        conf = tomllib.load(fh)
    base = config_path.parent

    def _resolve(p) -> Path:
        p = Path(p)
        return p if p.is_absolute() else base / p

    outdir = Path(
        outdir_override
        if outdir_override is not None
        else _resolve(_require(conf, "output", "dir"))
    )
    outdir.mkdir(parents=True, exist_ok=True)

    spec = _dataset.DatasetSpec(
        tau=float(_require(conf, "dataset", "tau")),
        theta=int(_require(conf, "dataset", "theta")),
    )
    data = conf.get("data", {})
    if "meta" not in data:
        raise ValueError("pipeline config is missing [data] meta")
    metas = _dataset.read_meta_csv(_resolve(data["meta"]))
    if "features" in data:
        features = _dataset.read_features_csv(_resolve(data["features"]))
        by_trace = {m.trace_id: m for m in metas.values()}
        resolved = []
        for fv in features:
            m = by_trace.get(fv.trace_id)
            if m is None:
                raise ValueError(
                    f"feature table references unknown trace_id {fv.trace_id!r}"
                )
            if m.avatar.label != fv.avatar.label:
                raise ValueError(
                    f"trace {fv.trace_id!r}: feature label {fv.avatar.label!r} "
                    f"does not match metadata label {m.avatar.label!r}"
                )
            resolved.append(
                _dataset.FeatureVector(fv.trace_id, m.avatar, fv.values)
            )
        features = resolved
    elif "events" in data:
        events = _dataset.read_events_csv(_resolve(data["events"]))
        features = _dataset.extract_features(events, spec.tau, metas)
    else:
        raise ValueError("pipeline config needs [data] events or [data] features")

    features = _dataset.filter_min_traces(features, spec.theta)

    surrogate_pairs: list[tuple[str, str]] = []
    if "surrogates" in conf:
        sspec = _dataset.SurrogateSpec(
            gamma=float(_require(conf, "surrogates", "gamma")),
            beta=float(_require(conf, "surrogates", "beta")),
            seed=int(_require(conf, "surrogates", "seed")),
        )
        features, surrogate_pairs = _dataset.inject_surrogates(
            features, sspec, spec.theta
        )

    cls = conf.get("classifier", {})
    config = _classify.ClassifierConfig(
        kind=cls.get("kind", "knn"),
        k=int(cls.get("k", 1)),
        variance_floor=float(cls.get("variance_floor", 1e-9)),
        folds=int(cls.get("folds", 10)),
        seed=int(cls.get("seed", 0)),
    )
    mcfg = conf.get("mining", {})
    mining_config = _mining.MiningConfig(
        lambda_=float(mcfg.get("lambda", 0.9)),
        min_score=float(mcfg.get("min_score", 0.0)),
        top_k=int(mcfg.get("top_k", 100)),
    )
    tier = conf.get("evaluation", {}).get("tier", "SUG")

    paths = {
        "features": outdir / "features.csv",
        "meta": outdir / "meta.csv",
        "surrogates": outdir / "surrogates.json",
        "confusion": outdir / "confusion.json",
        "pairs": outdir / "pairs.csv",
        "report": outdir / "report.json",
        "ranking": outdir / "ranking.csv",
    }

    _dataset.write_features_csv(paths["features"], features)
    label_of = {fv.trace_id: fv.avatar for fv in features}
    resolved_metas = [
        _dataset.TraceMeta(
            trace_id=m.trace_id,
            avatar=label_of[m.trace_id],
            faction=m.faction,
            outcome=m.outcome,
            duration_s=m.duration_s,
        )
        for m in metas.values()
        if m.trace_id in label_of
    ]
    _dataset.write_meta_csv(paths["meta"], resolved_metas)

    labels = sorted({fv.avatar.label for fv in features})
    _write_surrogates_json(paths["surrogates"], surrogate_pairs, labels)

    cm = _classify.cross_validate(features, config)
    _classify.write_confusion_json(paths["confusion"], cm)

    m = _classify.normalize(cm)
    pairs = _mining.mine(m, mining_config)
    _mining.write_pairs_csv(paths["pairs"], pairs)

    gt = _evaluation.GroundTruth(
        surrogate_pairs=frozenset(frozenset(p) for p in surrogate_pairs),
        identity_index={fv.avatar.label: fv.avatar for fv in features},
        tier=tier,
    )
    report, labeled = _evaluation.evaluate_ranking(pairs, gt, list(cm.labels))
    _evaluation.write_report_json(paths["report"], report, labeled)
    _evaluation.write_labeled_csv(paths["ranking"], labeled)
    return paths


def _cmd_pipeline(args) -> int:
    paths = run_pipeline(args.config, args.outdir)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aliasmine",
        description="Identify avatar aliases by mining classifier confusion.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="events + metadata -> feature table")
    p.add_argument("events", help="event CSV (trace_id,timestamp,action_type,key)")
    p.add_argument("meta", help="per-trace metadata CSV")
    p.add_argument(
        "--tau", type=float, required=True, help="truncation horizon in seconds"
    )
    p.add_argument("--out", default="features.csv", help="output feature CSV")
    p.set_defaults(func=_cmd_extract)

    p = sub.add_parser("classify", help="feature table -> confusion matrix")
    p.add_argument("features", help="feature CSV")
    p.add_argument(
        "--classifier",
        choices=("knn", "naive_bayes"),
        default="knn",
        help="built-in classifier to cross-validate",
    )
    p.add_argument("--k", type=int, default=1, help="neighbours for knn")
    p.add_argument(
        "--variance-floor",
        type=float,
        default=1e-9,
        help="variance clamp for naive_bayes",
    )
    p.add_argument("--folds", type=int, default=10, help="cross-validation folds")
    p.add_argument("--seed", type=int, default=0, help="fold assignment seed")
    p.add_argument(
        "--theta",
        type=int,
        default=1,
        help="drop avatars with fewer traces before training",
    )
    p.add_argument("--out", default="confusion.json", help="output counts JSON")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("mine", help="confusion matrix -> ranked alias pairs")
    p.add_argument("confusion", help="confusion counts JSON")
    p.add_argument(
        "--lambda",
        dest="lambda_",
        type=float,
        default=0.9,
        help="minimum cluster score a pair must reach",
    )
    p.add_argument(
        "--min-score",
        type=float,
        default=0.0,
        help="prune concepts below this intent score",
    )
    p.add_argument("--top-k", type=int, default=100, help="report length cap")
    p.add_argument("--out", default="pairs.csv", help="output ranked pair CSV")
    p.add_argument(
        "--json-out", default=None, help="also write the ranked pairs as JSON"
    )
    p.add_argument("--concepts", default=None, help="also dump the concept JSON")
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("evaluate", help="ranked pairs + ground truth -> metrics")
    p.add_argument("pairs", help="ranked pair CSV")
    p.add_argument("meta", help="per-trace metadata CSV (post-injection)")
    p.add_argument(
        "--surrogates", default=None, help="surrogates JSON written by the pipeline"
    )
    p.add_argument(
        "--tier",
        choices=_evaluation.TIERS,
        default="SUG",
        help="which evidence counts as positive",
    )
    p.add_argument("--out", default="report.json", help="output metrics JSON")
    p.add_argument(
        "--ranking-csv", default=None, help="also dump the labeled ranking CSV"
    )
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("pipeline", help="run every stage from one TOML config")
    p.add_argument("config", help="pipeline TOML")
    p.add_argument("--outdir", default=None, help="override [output] dir")
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
