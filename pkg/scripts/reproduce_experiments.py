#!/usr/bin/env python3
"""Desk-scale end-to-end experiment driver.

Runs the full pipeline through the rfadv CLI: synthesize a dataset, train
the CNN classifier and the substitute MLP, then produce the accuracy-vs-PNR
sweep, the accuracy-vs-PSR sweep (PCA UAP vs iterative UAP vs jamming), the
black-box/shifted transfer sweep, and the crafting-runtime benchmark.

Everything lands in --workdir. With the default scale this takes roughly
half an hour on a laptop CPU; pass --n 20 --epochs 2 for a quick smoke run.
"""

import argparse
import subprocess
import sys
from pathlib import Path


def run(args):
    print("+", " ".join(args), flush=True)
    subprocess.run(args, check=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", default="runs")
    ap.add_argument("--n", type=int, default=100,
                    help="examples per class per SNR")
    ap.add_argument("--epochs", type=int, default=10)
    ap.add_argument("--target-accuracy", type=float, default=0.45,
                    help="early-stop test accuracy on the SNR>=0 subset")
    ap.add_argument("--snr", type=int, default=10)
    ap.add_argument("--n-examples", type=int, default=100)
    ap.add_argument("--uap-n", type=int, default=50)
    ap.add_argument("--seed", type=int, default=11)
    opts = ap.parse_args()

    work = Path(opts.workdir)
    work.mkdir(parents=True, exist_ok=True)
    data = work / "dataset.rmld"
    cnn = work / "cnn.advw"
    mlp = work / "mlp.advw"
    rfadv = [sys.executable, "-m", "rfadv.cli"]

    run(rfadv + ["gen-data", "--n", str(opts.n), "--seed", str(opts.seed),
                 "--out", str(data)])
    run(rfadv + ["train", "--data", str(data), "--out", str(cnn),
                 "--log", str(work / "cnn_train.csv"), "--model", "vtcnn2",
                 "--epochs", str(opts.epochs), "--eval-min-snr", "0",
                 "--target-accuracy", str(opts.target_accuracy),
                 "--seed", "1"])
    run(rfadv + ["train", "--data", str(data), "--out", str(mlp),
                 "--log", str(work / "mlp_train.csv"), "--model", "mlp",
                 "--epochs", str(max(2, opts.epochs // 2)),
                 "--eval-min-snr", "0",
                 "--target-accuracy", str(opts.target_accuracy),
                 "--seed", "2"])

    common = ["--weights", str(cnn), "--data", str(data),
              "--snr", str(opts.snr), "--n-examples", str(opts.n_examples),
              "--uap-n", str(opts.uap_n), "--seed", "0"]
    run(rfadv + ["sweep", "--mode", "pnr", "--grid=-10:0:2.5",
                 "--out-csv", str(work / "accuracy_vs_pnr.csv"),
                 "--out-svg", str(work / "accuracy_vs_pnr.svg")] + common)
    run(rfadv + ["sweep", "--mode", "psr", "--grid=-20:-10:2",
                 "--max-epochs", "1",
                 "--out-csv", str(work / "accuracy_vs_psr.csv"),
                 "--out-svg", str(work / "accuracy_vs_psr.svg")] + common)
    run(rfadv + ["sweep", "--mode", "transfer", "--grid=-16:-10:2",
                 "--shift-seed", "5", "--source-weights", str(mlp),
                 "--out-csv", str(work / "transfer.csv"),
                 "--out-svg", str(work / "transfer.svg")] + common)
    run(rfadv + ["bench", "--weights", str(cnn), "--data", str(data),
                 "--out", str(work / "bench.csv"), "--psr-grid=-20:-10:2",
                 "--n", str(opts.uap_n), "--repeats", "1",
                 "--snr", str(opts.snr), "--seed", "0"])
    print(f"all artifacts in {work}/")


if __name__ == "__main__":
    main()
