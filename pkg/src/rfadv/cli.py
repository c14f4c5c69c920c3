"""Command-line front end: gen-data, train, attack, sweep, bench.

Every command is reproducible: the same config and seeds produce identical
CSV bytes, except for wall-clock timing columns. On validation or I/O
errors the exit status is nonzero and partially written outputs are
removed.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys
from collections import Counter

import numpy as np

from . import dataset as ds
from . import evaluate as ev
from .attacks import craft_adversarial_bisection, model_input
from .config import (
    AttackConfig,
    BenchConfig,
    GenDataConfig,
    SweepConfig,
    TrainConfig,
    check_positive,
    check_seeds,
    load_config_file,
    merge_config,
    parse_grid,
    require,
)
from .errors import RfAdvError, ValidationError
from .models import ModelKind, build_model, load_model, save_weights
from .svgplot import LinePlot
from .training import fit


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.6f}"
    return str(value)


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _select_examples(dataset, snr, n_examples, seed, split="test"):
    pool = dataset.test_examples() if split == "test" else dataset.train_examples()
    if snr is not None:
        pool = [ex for ex in pool if ex.snr_db == snr]
    if not pool:
        raise ValidationError(
            f"no {split} examples left after SNR filter {snr}"
        )
    if n_examples and len(pool) > n_examples:
        rng = np.random.default_rng(seed)
        pick = rng.choice(len(pool), size=n_examples, replace=False)
        pool = [pool[i] for i in sorted(pick)]
    return pool


def cmd_gen_data(cfg: GenDataConfig) -> list[str]:
    require(cfg, "out")
    check_seeds(cfg)
    check_positive(cfg, "n")
    dataset = ds.generate_dataset(cfg.n, cfg.seed)
    ds.write_dataset(dataset, cfg.out)
    print(f"wrote {len(dataset.examples)} examples to {cfg.out}")
    hist = Counter(ex.mod_id for ex in dataset.examples)
    for mod in ds.Modulation:
        print(f"  {mod.name:6s} {hist[int(mod)]}")
    return [cfg.out]


def cmd_train(cfg: TrainConfig) -> list[str]:
    require(cfg, "data", "out")
    check_seeds(cfg)
    check_positive(cfg, "epochs", "lr", "batch_size")
    if cfg.model not in (k.value for k in ModelKind):
        raise ValidationError(f"--model must be vtcnn2 or mlp, got {cfg.model!r}")
    dataset = ds.read_dataset(cfg.data, split_seed=cfg.split_seed)
    model = build_model(cfg.model, cfg.seed)
    log_rows = []

    def log(stats):
        log_rows.append((stats.epoch, stats.train_loss, stats.test_accuracy))
        print(f"epoch {stats.epoch}: train_loss={stats.train_loss:.4f} "
              f"test_accuracy={stats.test_accuracy:.4f} "
              f"({stats.seconds:.1f}s)")

    fit(model, dataset, epochs=cfg.epochs, lr=cfg.lr,
        batch_size=cfg.batch_size, seed=cfg.seed, eval_limit=cfg.eval_limit,
        eval_min_snr=cfg.eval_min_snr, target_accuracy=cfg.target_accuracy,
        log=log)
    save_weights(model, cfg.out)
    outputs = [cfg.out]
    if cfg.log:
        _write_csv(cfg.log, ["epoch", "train_loss", "test_accuracy"], log_rows)
        outputs.append(cfg.log)
    print(f"saved weights to {cfg.out}")
    return outputs


def _attack_budget(cfg, examples) -> float:
    mean_power = float(np.mean([ds.measure_power(ex.frame) for ex in examples]))
    if cfg.psr_db is not None:
        return ev.budget_from_psr(cfg.psr_db, mean_power)
    if cfg.pnr_db is not None:
        snrs = {ex.snr_db for ex in examples}
        if len(snrs) != 1:
            raise ValidationError(
                "--pnr-db needs a single-SNR selection; pass --snr"
            )
        return ev.budget_from_pnr(cfg.pnr_db, snrs.pop(), mean_power)
    raise ValidationError("provide --psr-db or --pnr-db")


def cmd_attack(cfg: AttackConfig) -> list[str]:
    require(cfg, "weights", "data", "out")
    check_seeds(cfg)
    check_positive(cfg, "n_examples", "uap_n", "eps_acc_rel", "max_epochs")
    dataset = ds.read_dataset(cfg.data, split_seed=cfg.split_seed)
    model = load_model(cfg.weights)
    examples = _select_examples(dataset, cfg.snr, cfg.n_examples, cfg.seed)
    if cfg.alg == "bisection":
        if cfg.pnr_db is None and cfg.psr_db is None:
            raise ValidationError("provide --psr-db or --pnr-db")
        rows = []
        fooled_count = 0
        for i, ex in enumerate(examples):
            x = model_input(model, ex.frame)
            pnr = (cfg.pnr_db if cfg.pnr_db is not None
                   else cfg.psr_db + ex.snr_db)
            p_max = ev.budget_from_pnr(pnr, ex.snr_db,
                                       ds.measure_power(ex.frame))
            clean_pred = model.predict_label(x)
            outcome = craft_adversarial_bisection(
                model, x, ex.mod_id, eps_acc=p_max * cfg.eps_acc_rel,
                p_max=p_max)
            adv_pred = model.predict_label(outcome.perturbation.apply_to(x))
            fooled_count += outcome.fooled
            rows.append((i, ex.mod_id, clean_pred, adv_pred,
                         outcome.epsilon_star,
                         outcome.target_class, int(outcome.fooled)))
        _write_csv(cfg.out,
                   ["index", "true_label", "clean_pred", "adv_pred",
                    "epsilon_star", "target_class", "fooled"], rows)
        print(f"bisection: fooled {fooled_count}/{len(examples)}")
        return [cfg.out]

    alg_map = {"uap-pca": "uap_pca", "uap-iter": "uap_iterative",
               "jam": "jamming"}
    if cfg.alg not in alg_map:
        raise ValidationError(
            f"--alg must be bisection, uap-pca, uap-iter or jam, got {cfg.alg!r}"
        )
    p_max = _attack_budget(cfg, examples)
    craft = _select_examples(dataset, cfg.snr, cfg.uap_n, cfg.seed + 1)
    r, spec = ev.craft_universal(model, alg_map[cfg.alg], craft, p_max,
                                 seed=cfg.seed, max_epochs=cfg.max_epochs,
                                 target_fool_rate=cfg.target_fool_rate)
    rows = []
    fooled_count = 0
    for i, ex in enumerate(examples):
        x = model_input(model, ex.frame)
        clean_pred = model.predict_label(x)
        adv_pred = model.predict_label(r.apply_to(x))
        fooled_count += adv_pred != clean_pred
        rows.append((i, ex.mod_id, clean_pred, adv_pred, int(adv_pred != clean_pred)))
    _write_csv(cfg.out,
               ["index", "true_label", "clean_pred", "adv_pred", "fooled"],
               rows)
    fooling = fooled_count / len(examples)
    crafting = spec.crafting_time_seconds if spec is not None else 0.0
    print(f"{cfg.alg}: norm={r.norm:.4f} p_max={p_max:.4f} "
          f"crafting_time={crafting:.3f}s fooling_rate={fooling:.4f}")
    return [cfg.out]


SWEEP_HEADER = ["x_db", "attack", "snr_db", "accuracy_all",
                "accuracy_clean_correct", "fooling_rate", "n"]


def _sweep_csv_rows(table: ev.SweepTable):
    return [(row.x_db, row.attack, row.snr_db, row.accuracy_all,
             row.accuracy_clean_correct, row.fooling_rate, row.n)
            for row in table.rows]


def _sweep_svg(table: ev.SweepTable, xlabel: str, title: str) -> str:
    plot = LinePlot(title=title, xlabel=xlabel, ylabel="accuracy")
    grid = sorted({row.x_db for row in table.rows if not math.isnan(row.x_db)})
    attacks = []
    for row in table.rows:
        if row.attack != "none" and row.attack not in attacks:
            attacks.append(row.attack)
    for name in attacks:
        rows = table.by_attack(name)
        plot.add(name, [r.x_db for r in rows], [r.accuracy_all for r in rows])
    reference = table.by_attack("none")
    if reference and grid:
        clean = reference[0].accuracy_clean
        plot.add("no attack", [grid[0], grid[-1]], [clean, clean], dashed=True)
    return plot.render()


def cmd_sweep(cfg: SweepConfig) -> list[str]:
    require(cfg, "weights", "data", "out_csv", "out_svg")
    check_seeds(cfg)
    check_positive(cfg, "n_examples", "uap_n", "eps_acc_rel", "max_epochs")
    grid = parse_grid(cfg.grid)
    dataset = ds.read_dataset(cfg.data, split_seed=cfg.split_seed)
    model = load_model(cfg.weights)
    examples = _select_examples(dataset, cfg.snr, cfg.n_examples, cfg.seed)
    if cfg.mode == "pnr":
        table = ev.sweep_pnr(model, examples, grid, eps_acc_rel=cfg.eps_acc_rel)
        xlabel = "PNR (dB)"
    elif cfg.mode == "psr":
        craft = _select_examples(dataset, cfg.snr, cfg.uap_n, cfg.seed + 1)
        rows = []
        for i, attack in enumerate(ev.UAP_ATTACKS):
            table = ev.sweep_psr(model, examples, grid, attack,
                                 craft_samples=craft, seed=cfg.seed,
                                 max_epochs=cfg.max_epochs,
                                 target_fool_rate=cfg.target_fool_rate,
                                 include_reference=(i == 0))
            rows.extend(table.rows)
        table = ev.SweepTable(rows)
        xlabel = "PSR (dB)"
    elif cfg.mode == "transfer":
        if not cfg.source_weights:
            raise ValidationError("--source-weights is required for transfer mode")
        source = load_model(cfg.source_weights)
        craft = _select_examples(dataset, cfg.snr, cfg.uap_n, cfg.seed + 1)
        mean_power = float(np.mean([ds.measure_power(ex.frame)
                                    for ex in examples]))
        rows = []
        for i, psr in enumerate(sorted(grid)):
            p_max = ev.budget_from_psr(psr, mean_power)
            shift = cfg.shift_seed if cfg.shift_seed is not None else cfg.seed
            table = ev.transfer_eval(source, model, examples, p_max,
                                     shift_seed=shift, craft_samples=craft)
            rows.extend(table.rows if i == 0 else
                        [r for r in table.rows if r.attack != "none"])
        table = ev.SweepTable(rows)
        xlabel = "PSR (dB)"
    else:
        raise ValidationError(f"--mode must be pnr, psr or transfer, got {cfg.mode!r}")
    _write_csv(cfg.out_csv, SWEEP_HEADER, _sweep_csv_rows(table))
    with open(cfg.out_svg, "w") as f:
        f.write(_sweep_svg(table, xlabel, f"accuracy vs {xlabel}"))
    print(f"wrote {cfg.out_csv} and {cfg.out_svg} ({len(table.rows)} rows)")
    return [cfg.out_csv, cfg.out_svg]


def cmd_bench(cfg: BenchConfig) -> list[str]:
    require(cfg, "weights", "data", "out")
    check_seeds(cfg)
    check_positive(cfg, "n", "repeats", "max_epochs")
    grid = parse_grid(cfg.psr_grid)
    dataset = ds.read_dataset(cfg.data, split_seed=cfg.split_seed)
    model = load_model(cfg.weights)
    samples = _select_examples(dataset, cfg.snr, cfg.n, cfg.seed)
    rows = ev.runtime_benchmark(model, samples, grid, n_repeats=cfg.repeats,
                                max_epochs=cfg.max_epochs,
                                target_fool_rate=cfg.target_fool_rate)
    _write_csv(cfg.out,
               ["psr_db", "seconds_pca", "seconds_iterative", "ratio"],
               [(r.psr_db, r.seconds_pca, r.seconds_iterative, r.ratio)
                for r in rows])
    for r in rows:
        print(f"psr={r.psr_db:+.1f} dB pca={r.seconds_pca:.3f}s "
              f"iterative={r.seconds_iterative:.3f}s ratio={r.ratio:.1f}")
    return [cfg.out]


def _add_common(parser):
    parser.add_argument("--config", help="flat JSON config file; flags override")
    parser.add_argument("--seed", type=int)


COMMANDS = {
    "gen-data": (GenDataConfig, cmd_gen_data),
    "train": (TrainConfig, cmd_train),
    "attack": (AttackConfig, cmd_attack),
    "sweep": (SweepConfig, cmd_sweep),
    "bench": (BenchConfig, cmd_bench),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rfadv",
        description="Train a modulation classifier and attack it with "
                    "gradient-based and universal perturbations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="synthesize a dataset file")
    _add_common(p)
    p.add_argument("--n", type=int, help="examples per class per SNR")
    p.add_argument("--out", help="output .rmld path")

    p = sub.add_parser("train", help="train a classifier")
    _add_common(p)
    p.add_argument("--data", help="input .rmld path")
    p.add_argument("--out", help="output .advw weights path")
    p.add_argument("--log", help="training log CSV path")
    p.add_argument("--model", choices=["vtcnn2", "mlp"])
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--batch-size", dest="batch_size", type=int)
    p.add_argument("--split-seed", dest="split_seed", type=int)
    p.add_argument("--eval-limit", dest="eval_limit", type=int)
    p.add_argument("--eval-min-snr", dest="eval_min_snr", type=int)
    p.add_argument("--target-accuracy", dest="target_accuracy", type=float)

    p = sub.add_parser("attack", help="run one attack, write per-example CSV")
    _add_common(p)
    p.add_argument("--weights")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--alg", choices=["bisection", "uap-pca", "uap-iter", "jam"])
    p.add_argument("--snr", type=int)
    p.add_argument("--pnr-db", dest="pnr_db", type=float)
    p.add_argument("--psr-db", dest="psr_db", type=float)
    p.add_argument("--n-examples", dest="n_examples", type=int)
    p.add_argument("--n", dest="uap_n", type=int, help="UAP crafting sample count")
    p.add_argument("--eps-acc-rel", dest="eps_acc_rel", type=float)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--target-fool-rate", dest="target_fool_rate", type=float)
    p.add_argument("--split-seed", dest="split_seed", type=int)

    p = sub.add_parser("sweep", help="accuracy sweep, write CSV + SVG")
    _add_common(p)
    p.add_argument("--weights")
    p.add_argument("--data")
    p.add_argument("--out-csv", dest="out_csv")
    p.add_argument("--out-svg", dest="out_svg")
    p.add_argument("--mode", choices=["pnr", "psr", "transfer"])
    p.add_argument("--grid", help="'a,b,c' or 'start:stop:step' in dB; "
                                  "use --grid=-10:0:2 when the value starts "
                                  "with a dash")
    p.add_argument("--snr", type=int)
    p.add_argument("--n-examples", dest="n_examples", type=int)
    p.add_argument("--uap-n", dest="uap_n", type=int)
    p.add_argument("--eps-acc-rel", dest="eps_acc_rel", type=float)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--target-fool-rate", dest="target_fool_rate", type=float)
    p.add_argument("--shift-seed", dest="shift_seed", type=int)
    p.add_argument("--source-weights", dest="source_weights")
    p.add_argument("--split-seed", dest="split_seed", type=int)

    p = sub.add_parser("bench", help="UAP crafting runtime benchmark CSV")
    _add_common(p)
    p.add_argument("--weights")
    p.add_argument("--data")
    p.add_argument("--out")
    p.add_argument("--psr-grid", dest="psr_grid")
    p.add_argument("--n", type=int)
    p.add_argument("--repeats", type=int)
    p.add_argument("--snr", type=int)
    p.add_argument("--max-epochs", dest="max_epochs", type=int)
    p.add_argument("--target-fool-rate", dest="target_fool_rate", type=float)
    p.add_argument("--split-seed", dest="split_seed", type=int)

    return parser


def _planned_outputs(cfg) -> list[str]:
    paths = []
    for name in ("out", "log", "out_csv", "out_svg"):
        value = getattr(cfg, name, "")
        if value:
            paths.append(value)
    return paths


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cls, handler = COMMANDS[args.command]
    flag_values = {k: v for k, v in vars(args).items()
                   if k not in ("command", "config")}
    snapshot: dict[str, float | None] = {}
    try:
        file_values = load_config_file(args.config) if args.config else {}
        cfg = merge_config(cls, file_values, flag_values)
        snapshot = {p: (os.path.getmtime(p) if os.path.exists(p) else None)
                    for p in _planned_outputs(cfg)}
        handler(cfg)
    except (RfAdvError, OSError) as exc:
        # drop partial outputs: anything this run created or rewrote
        for path, before in snapshot.items():
            if os.path.exists(path) and os.path.getmtime(path) != before:
                os.unlink(path)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
