"""Command-line entry point: synth, ingest, compare, baseline, transfer and report."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path

import numpy as np

from . import __version__
from .adversarial import HealthConfig, TrainConfig
from .coral import coral_fit
from .errors import DosTriageError, InputError, InsufficientAcceptedReplicates
from .experiments import (
    BASELINE_METHODS,
    TRANSFER_METHODS,
    no_information_f,
    run_baseline,
    run_transfer,
    scale_domain,
    standard_shifted_pair,
    strong_shift_pair,
    train_rows,
)
from .flows import FEATURES, N_FEATURES, Dataset, Schema, SynthSpec, ingest_csv, synth_generate, write_canonical
from .stats import density_summary, kuiper_feature_report
from .textio import fmt, read_csv_rows, read_kv, write_csv, write_kv
from .triage import aggregate_replicates, top100_accuracy

log = logging.getLogger("dostriage")

EXIT_OK, EXIT_SHORTFALL, EXIT_INPUT = 0, 1, 2

PAIRS = {"standard": standard_shifted_pair, "strong": strong_shift_pair}


def _floats(text: str) -> tuple:
    try:
        vals = tuple(float(v) for v in text.replace(",", " ").split())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers, got {text!r}") from None
    if len(vals) != N_FEATURES:
        raise argparse.ArgumentTypeError(f"expected {N_FEATURES} values, got {len(vals)}")
    return vals


def _load(path) -> Dataset:
    ds = ingest_csv(path, Schema.CANONICAL)
    if ds.dropped:
        log.warning("%s: %d rows dropped", path, ds.dropped)
    return ds


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# --- subcommands ------------------------------------------------------------


def cmd_synth(args) -> int:
    out = _out_dir(args)
    if args.pair:
        for ds in PAIRS[args.pair]():
            write_canonical(ds, out / f"{ds.domain}.csv")
            print(f"{ds.domain}: {len(ds)} rows, {ds.n_dos} DoS")
        return EXIT_OK
    spec = SynthSpec(
        args.n,
        args.dos_fraction,
        scale=args.scale,
        offset=args.offset,
        class_separation=args.class_separation,
        rng_seed=args.seed,
        domain=args.domain,
        dos_profile=args.dos_profile,
    )
    ds = synth_generate(spec)
    write_canonical(ds, out / f"{ds.domain}.csv")
    print(f"{ds.domain}: {len(ds)} rows, {ds.n_dos} DoS")
    return EXIT_OK


def cmd_ingest(args) -> int:
    ds = ingest_csv(args.input, Schema(args.schema), args.domain)
    out = _out_dir(args)
    write_canonical(ds, out / f"{ds.domain}.csv")
    print(f"{ds.domain}: {len(ds)} rows, {ds.n_dos} DoS, {ds.dropped} dropped")
    return EXIT_OK


def cmd_compare(args) -> int:
    a, b = _load(args.a), _load(args.b)
    if args.scaled:
        xa = scale_domain(a, train_rows(a, args.n_train)).all_x
        xb = scale_domain(b, train_rows(b, args.n_train)).all_x
    else:
        xa, xb = a.features, b.features
    out = _out_dir(args)
    report = kuiper_feature_report(xa, xb)
    write_csv(
        out / "kuiper.csv",
        ("feature", "v_statistic", "p_value", "n_effective", "n1", "n2"),
        [(name, r.v_statistic, r.p_value, r.n_effective, r.n1, r.n2) for name, r in report],
    )
    rows = []
    for j, name in enumerate(FEATURES):
        for tag, x in (("a", xa), ("b", xb)):
            grid, dens = density_summary(x[:, j], bins=args.bins)
            rows.extend((name, tag, g, d) for g, d in zip(grid, dens))
    write_csv(out / "density.csv", ("feature", "domain", "x", "density"), rows)
    for name, r in report:
        print(f"{name:8s} V={r.v_statistic:.4f} p={r.p_value:.3g}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    lab, unl = _load(args.labeled), _load(args.unlabeled)
    a = scale_domain(lab, train_rows(lab, args.n_train))
    b = scale_domain(unl, train_rows(unl, args.n_train))
    out = _out_dir(args)
    methods = BASELINE_METHODS if args.method == "all" else (args.method,)
    print(f"no-information F (test): {no_information_f(b.test_y):.4f}")
    for method in methods:
        res = run_baseline(a, b, method, args.k)
        write_csv(out / f"baseline_{method}.csv", ("split", "f_measure"), res.items())
        print(f"{method:8s} train F={res['train']:.4f} test F={res['test']:.4f}")
    return EXIT_OK


def train_config_from(args) -> TrainConfig:
    health = HealthConfig(
        cm_window=args.cm_window,
        cm_slope_max=args.cm_slope_max,
        loss_spike_ratio=args.loss_spike_ratio,
        loss_tail_window=args.loss_tail_window,
        onset_drop=args.onset_drop,
    )
    return TrainConfig(
        learning_rate=args.learning_rate,
        iterations=args.iterations,
        rank_batch=args.rank_batch,
        pair_batch=args.pair_batch,
        margin=args.margin,
        top_k=args.top_k,
        adv_weight=args.adv_weight,
        health=health,
        cm_sample=args.cm_sample,
        listmle_strict=args.listmle_strict,
    )


def _config_items(cfg: TrainConfig) -> dict:
    items = {}
    for f in fields(cfg):
        if f.name in ("rng_seed", "health"):
            continue
        v = getattr(cfg, f.name)
        items[f.name] = " ".join(fmt(c) for c in v) if isinstance(v, tuple) else fmt(v)
    for f in fields(cfg.health):
        items[f"health.{f.name}"] = fmt(getattr(cfg.health, f.name))
    return items


def _write_replicate(out: Path, outcome, kept: bool) -> None:
    res = outcome.result
    seed = outcome.seed
    trace = res.cm_trace
    rows = [
        (it, c, v)
        for it, vals in zip(trace.iterations, trace.values)
        for c, v in zip(trace.levels, vals)
    ]
    write_csv(out / f"cm_trace_{seed}.csv", ("iteration", "c", "cm"), rows)
    write_csv(
        out / f"loss_trace_{seed}.csv",
        ("iteration", "listmle", "contrastive"),
        ((i + 1, l, d) for i, (l, d) in enumerate(zip(res.listmle_trace, res.contrastive_trace))),
    )
    if kept:
        res.model.save(out / f"model_{seed}.txt")


def cmd_transfer(args) -> int:
    if args.max_attempts < args.replicates:
        raise InputError("--max-attempts must be >= --replicates")
    cfg = train_config_from(args)
    lab, unl = _load(args.labeled), _load(args.unlabeled)
    a = scale_domain(lab, train_rows(lab, args.n_train))
    b = scale_domain(unl, train_rows(unl, args.n_train))
    kept, attempted = run_transfer(
        a, b, args.method, cfg, args.replicates, args.max_attempts, args.seed_base, args.jobs
    )
    out = _out_dir(args)
    method = args.method
    a.params.save(out / f"preprocess_{a.name}.txt")
    b.params.save(out / f"preprocess_{b.name}.txt")
    if method == "coral":
        coral_fit(a.train_x, b.train_x).save(out / "coral.txt")

    # single writer: every file is written here, in seed order
    kept_seeds = {o.seed for o in kept}
    for o in attempted:
        _write_replicate(out, o, o.seed in kept_seeds)
    if kept:
        write_csv(
            out / f"curves_{method}.csv",
            ("n", "value", "replicate_id"),
            ((n, v, o.seed) for o in kept for n, v in enumerate(o.curve.values, 1)),
        )
        band = aggregate_replicates([o.curve for o in kept])
        write_csv(
            out / f"band_{method}.csv",
            ("n", "mean", "sigma", "upper", "lower"),
            zip(range(1, len(band.mean) + 1), band.mean, band.sigma, band.upper, band.lower),
        )

    short = len(kept) < args.replicates
    meta = {
        "version": __version__,
        "command": "transfer",
        "method": method,
        "labeled": args.labeled,
        "unlabeled": args.unlabeled,
        "labeled_domain": a.name,
        "unlabeled_domain": b.name,
        "n_train_labeled": len(a.train_y),
        "n_train_unlabeled": len(b.train_y),
        "seed_base": args.seed_base,
        "replicates": args.replicates,
        "max_attempts": args.max_attempts,
        **_config_items(cfg),
        "attempted": len(attempted),
        "kept": len(kept),
        "kept_seeds": " ".join(str(o.seed) for o in kept),
        "status": "shortfall" if short else "ok",
    }
    for o in attempted:
        v = o.result.verdict
        meta[f"verdict.{o.seed}"] = "accepted" if v.accepted else "rejected: " + "; ".join(v.reasons)
    for o in kept:
        meta[f"top100.{o.seed}"] = fmt(top100_accuracy(o.curve))
    write_kv(out / "run.meta", meta)

    if kept:
        scores = [top100_accuracy(o.curve) for o in kept]
        print(f"{method}: {len(kept)} kept of {len(attempted)} attempted, mean Top100 {np.mean(scores):.4f}")
    if short:
        raise InsufficientAcceptedReplicates(len(kept), args.replicates, len(attempted))
    return EXIT_OK


def cmd_report(args) -> int:
    rows = []
    for run_dir in args.runs:
        for band_path in sorted(Path(run_dir).glob("band_*.csv")):
            method = band_path.stem[len("band_") :]
            band = read_csv_rows(band_path)
            meta_path = Path(run_dir) / "run.meta"
            meta = read_kv(meta_path) if meta_path.exists() else {}
            at = min(100, len(band)) - 1
            rec = band[at]
            rows.append(
                (
                    method,
                    str(run_dir),
                    meta.get("kept", ""),
                    meta.get("attempted", ""),
                    float(rec["mean"]),
                    float(rec["sigma"]),
                    float(rec["lower"]),
                    float(rec["upper"]),
                )
            )
    if not rows:
        raise InputError("no band_<method>.csv files found")
    out = _out_dir(args)
    header = ("method", "run", "kept", "attempted", "top100_mean", "top100_sigma", "lower_100", "upper_100")
    write_csv(out / "summary.csv", header, rows)
    for r in rows:
        print(f"{r[0]:12s} Top100 {r[4]:.4f} +/- {r[5]:.4f}  (bounds {r[6]:.2f}..{r[7]:.2f})  {r[1]}")
    return EXIT_OK


# --- parser -----------------------------------------------------------------


def _add_data_args(p):
    p.add_argument("--n-train", type=int, default=80000, help="training rows per domain (80%% if fewer)")


def _add_train_args(p):
    d = TrainConfig()
    h = d.health
    g = p.add_argument_group("training")
    g.add_argument("--learning-rate", type=float, default=d.learning_rate)
    g.add_argument("--iterations", type=int, default=d.iterations)
    g.add_argument("--rank-batch", type=int, default=d.rank_batch)
    g.add_argument("--pair-batch", type=int, default=d.pair_batch)
    g.add_argument("--margin", type=float, default=d.margin)
    g.add_argument("--top-k", type=int, default=d.top_k)
    g.add_argument("--adv-weight", type=float, default=d.adv_weight)
    g.add_argument("--cm-sample", type=int, default=d.cm_sample)
    g.add_argument("--listmle-strict", action="store_true", default=d.listmle_strict)
    g = p.add_argument_group("health")
    g.add_argument("--cm-window", type=int, default=h.cm_window)
    g.add_argument("--cm-slope-max", type=float, default=h.cm_slope_max)
    g.add_argument("--loss-spike-ratio", type=float, default=h.loss_spike_ratio)
    g.add_argument("--loss-tail-window", type=int, default=h.loss_tail_window)
    g.add_argument("--onset-drop", type=float, default=h.onset_drop)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dostriage", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="flat 'key = value' file; flags given here override it")
        p.add_argument("--out", required=True, help="output directory")
        p.set_defaults(func=func)
        return p

    p = add("synth", cmd_synth, "generate a synthetic canonical CSV")
    p.add_argument("--n", type=int, default=10000)
    p.add_argument("--dos-fraction", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scale", type=_floats, default=(1.0,) * N_FEATURES)
    p.add_argument("--offset", type=_floats, default=(0.0,) * N_FEATURES)
    p.add_argument("--class-separation", type=float, default=2.0)
    p.add_argument("--dos-profile", type=_floats, default=(1.0,) * N_FEATURES)
    p.add_argument("--domain", default="synth")
    p.add_argument("--pair", choices=sorted(PAIRS), help="write a reference domain pair instead")

    p = add("ingest", cmd_ingest, "convert a raw flow CSV to canonical form")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--schema", choices=[s.value for s in Schema], default=Schema.CANONICAL.value)
    p.add_argument("--domain")

    p = add("compare", cmd_compare, "per-feature Kuiper tests and density summaries")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--bins", type=int, default=1000)
    p.add_argument("--scaled", action="store_true", help="compare features after per-domain scaling")
    _add_data_args(p)

    p = add("baseline", cmd_baseline, "1-NN transfer baselines")
    p.add_argument("--labeled", required=True)
    p.add_argument("--unlabeled", required=True)
    p.add_argument("--method", choices=BASELINE_METHODS + ("all",), default="all")
    p.add_argument("--k", type=int, default=1)
    _add_data_args(p)

    p = add("transfer", cmd_transfer, "replicated triage transfer")
    p.add_argument("--labeled", required=True)
    p.add_argument("--unlabeled", required=True)
    p.add_argument("--method", choices=TRANSFER_METHODS, required=True)
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--max-attempts", type=int, default=60)
    p.add_argument("--seed-base", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    _add_data_args(p)
    _add_train_args(p)

    p = add("report", cmd_report, "summarise Top100 from transfer output directories")
    p.add_argument("--runs", nargs="+", required=True, help="transfer output directories")

    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    """Load ``--config`` values as defaults of the chosen subcommand."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    pre.add_argument("command", nargs="?")
    known, _ = pre.parse_known_args(argv)
    if not known.config or not known.command:
        return
    sub = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
    subparser = sub.choices.get(known.command)
    if subparser is None:
        return
    dests = {a.dest: a for a in subparser._actions}
    values = {}
    for key, raw in read_kv(known.config).items():
        dest = key.replace("-", "_")
        if dest not in dests or dest in ("config", "help", "func"):
            raise InputError(f"{known.config}: unknown key {key!r} for {known.command}")
        action = dests[dest]
        if action.nargs == 0:  # store_true flags
            values[dest] = raw.lower() in ("1", "true", "yes", "on")
        else:
            values[dest] = raw
    subparser.set_defaults(**values)
    # required options satisfied by the file are no longer required
    for dest in values:
        dests[dest].required = False


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except InsufficientAcceptedReplicates as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHORTFALL
    except (DosTriageError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
