"""Command-line front end.

Subcommands: train, eval, plot, crc, inspect. Exit codes are a stable
scripting contract: 0 success, 2 usage/config error, 3 runtime or
training failure, 4 I/O error. The default output directory comes from
--out-dir, falling back to the LISTAE_OUT_DIR environment variable,
falling back to the current directory. Every artifact embeds the fully
resolved config and seed so a run can be reconstructed from its outputs.
"""

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .codec import DegenerateBatchError
from .config import load_experiment
from .crc import CRC8_DEFAULT, CRCSpec, crc_check, crc_compute
from .errors import ConfigError, TrainingDivergedError
from .evaluation import FrozenCodec, evaluate
from .training import run_schedule

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_RUNTIME = 3
EXIT_IO = 4

LOG_HEADER = "epoch,phase,lr,batch,train_loss,test_loss\n"


def _out_dir(args) -> Path:
    out = args.out_dir or os.environ.get("LISTAE_OUT_DIR") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def cmd_train(args) -> int:
    exp = load_experiment(args.config, seed_override=args.seed)
    if exp.train is None:
        raise ConfigError(f"{args.config} has no train section")
    out = _out_dir(args)
    log_path = out / f"{exp.name}_train_log.csv"
    ckpt_path = out / f"{exp.name}.ckpt.npz"
    with open(log_path, "w") as log_fh:
        log_fh.write(LOG_HEADER)
        log_fh.flush()

        def log(result):
            log_fh.write(
                f"{result.epoch},enc,{result.lr!r},{result.batch},{result.enc_loss!r},\n"
                f"{result.epoch},dec,{result.lr!r},{result.batch},{result.dec_loss!r},{result.test_loss!r}\n"
            )
            log_fh.flush()

        result = run_schedule(exp.train, log=log)
    meta = {
        "name": exp.name,
        "seed": exp.seed,
        "experiment": exp.resolved,
        "history": {
            "epochs": len(result.history),
            "best_epoch": result.best_epoch,
            "best_test_loss": result.best_test_loss,
        },
    }
    save_checkpoint(ckpt_path, result.codec, result.norm_stats, meta)
    print(f"trained {exp.name}: {len(result.history)} epochs, "
          f"best test loss {result.best_test_loss:.6g} at epoch {result.best_epoch}")
    print(f"checkpoint: {ckpt_path}")
    print(f"training log: {log_path}")
    return EXIT_OK


def cmd_eval(args) -> int:
    exp = load_experiment(args.config, seed_override=args.seed)
    if exp.eval is None:
        raise ConfigError(f"{args.config} has no eval section")
    bundle = load_checkpoint(args.checkpoint)
    if bundle.codec.cfg.to_dict() != exp.model.to_dict():
        raise ConfigError(
            f"checkpoint architecture {bundle.codec.cfg.to_dict()} does not match "
            f"config model section {exp.model.to_dict()}"
        )
    report = evaluate(FrozenCodec(bundle.codec, bundle.norm_stats), exp.eval)
    report.config = {
        "experiment": exp.resolved,
        "checkpoint": str(args.checkpoint),
        "checkpoint_history": bundle.meta.get("history"),
    }
    out = _out_dir(args)
    json_path = out / f"{exp.name}_report.json"
    csv_path = out / f"{exp.name}_report.csv"
    report.write_json(json_path)
    report.write_csv(csv_path)
    print(f"report: {json_path}")
    print(f"report: {csv_path}")
    if report.trace:
        trace_path = out / f"{exp.name}_trials.csv"
        report.write_trace_csv(trace_path)
        print(f"trial trace: {trace_path}")
    if args.plot:
        from .plotting import plot_report

        png_path = out / f"{exp.name}_bler.png"
        plot_report(json_path, png_path)
        print(f"plot: {png_path}")
    if args.json:
        json.dump(report.to_json_dict(), sys.stdout, indent=2, sort_keys=True)
        print()
    return EXIT_OK


def _parse_bits(args) -> np.ndarray:
    if args.bits is not None:
        if not args.bits or set(args.bits) - {"0", "1"}:
            raise ConfigError(f"not a bit string: {args.bits!r}")
        return np.array([int(b) for b in args.bits], dtype=np.uint8)
    text = args.hex.lower().removeprefix("0x")
    try:
        value = int(text, 16)
    except ValueError as exc:
        raise ConfigError(f"not a hex string: {args.hex!r}") from exc
    width = 4 * len(text)
    return np.array([(value >> (width - 1 - i)) & 1 for i in range(width)], dtype=np.uint8)


def cmd_crc(args) -> int:
    try:
        spec = CRCSpec.from_string(args.poly)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    bits = _parse_bits(args)
    try:
        if args.action == "compute":
            crc = crc_compute(bits, spec)
            if args.json:
                print(json.dumps({"crc": "".join(map(str, crc)), "poly": args.poly}))
            else:
                print("".join(map(str, crc)))
        else:
            ok = crc_check(bits, spec)
            if args.json:
                print(json.dumps({"pass": ok, "poly": args.poly}))
            else:
                print("pass" if ok else "fail")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return EXIT_OK


def cmd_inspect(args) -> int:
    bundle = load_checkpoint(args.checkpoint)
    if args.json:
        json.dump(bundle.meta, sys.stdout, indent=2, sort_keys=True)
        print()
    else:
        cfg = bundle.codec.cfg
        print(f"checkpoint: {args.checkpoint}")
        print(f"architecture: {cfg.variant} K={cfg.block_len} L={cfg.list_size} "
              f"I={cfg.iterations} channels={cfg.channels} kernel={cfg.kernel}")
        print(f"norm stats: mu={bundle.norm_stats.mu!r} gamma={bundle.norm_stats.gamma!r}")
        history = bundle.meta.get("history") or {}
        if history:
            print(f"training: {history.get('epochs')} epochs, best test loss "
                  f"{history.get('best_test_loss')} at epoch {history.get('best_epoch')}")
        print(f"seed: {bundle.meta.get('seed')}")
    return EXIT_OK


def cmd_plot(args) -> int:
    from .plotting import plot_report, plot_training_log

    made = []
    out = _out_dir(args)
    if args.report:
        dest = out / (Path(args.report).stem + ".png")
        plot_report(args.report, dest)
        made.append(dest)
    if args.train_log:
        dest = out / (Path(args.train_log).stem + ".png")
        plot_training_log(args.train_log, dest)
        made.append(dest)
    if not made:
        raise ConfigError("plot needs --report and/or --train-log")
    for dest in made:
        print(f"plot: {dest}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="listae", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"listae {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train a codec from an experiment config")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_train.add_argument("--out-dir", default=None)
    p_train.set_defaults(func=cmd_train)

    p_eval = sub.add_parser("eval", help="run the Monte-Carlo BER/BLER sweep")
    p_eval.add_argument("--checkpoint", required=True)
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_eval.add_argument("--out-dir", default=None)
    p_eval.add_argument("--json", action="store_true", help="print the report JSON to stdout")
    p_eval.add_argument("--plot", action="store_true", help="also write a BLER plot")
    p_eval.set_defaults(func=cmd_eval)

    p_crc = sub.add_parser("crc", help="compute or check a CRC")
    p_crc.add_argument("action", choices=["compute", "check"])
    group = p_crc.add_mutually_exclusive_group(required=True)
    group.add_argument("--bits", help="payload or word as a bit string")
    group.add_argument("--hex", help="payload or word as hex (MSB first)")
    p_crc.add_argument("--poly", default=CRC8_DEFAULT,
                       help="generator polynomial, ascending-power bit string")
    p_crc.add_argument("--json", action="store_true")
    p_crc.set_defaults(func=cmd_crc)

    p_inspect = sub.add_parser("inspect", help="print checkpoint metadata")
    p_inspect.add_argument("checkpoint")
    p_inspect.add_argument("--json", action="store_true")
    p_inspect.set_defaults(func=cmd_inspect)

    p_plot = sub.add_parser("plot", help="render plots from reports / training logs")
    p_plot.add_argument("--report", default=None)
    p_plot.add_argument("--train-log", default=None)
    p_plot.add_argument("--out-dir", default=None)
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TrainingDivergedError as exc:
        print(f"training failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DegenerateBatchError, ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
