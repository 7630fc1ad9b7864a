"""Command-line entry point.

Subcommands cover capacity analysis, codebook tooling, training, gradient
checking, and BER evaluation.  Every subcommand takes --seed and reproduces
byte-identical outputs for identical flags; commands that write an artifact
also write a ``<out>.manifest.json`` recording how to re-derive it.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass

from . import __version__
from .codebook import Codebook, base_4b6b, concat_4b6b, shuffled_concat
from .constraint import build_dcfree_fsm, capacity, count_sequences, format_rate_table, rate_table

DEFAULT_TOL = 1e-4


@dataclass
class RunManifest:
    subcommand: str
    arguments: dict
    master_seed: int | None
    version: str
    outputs: list

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True) + "\n"


def _manifest_for(args, outputs) -> RunManifest:
    skip = {"func", "manifest"}
    arguments = {
        key: value for key, value in sorted(vars(args).items()) if key not in skip
    }
    return RunManifest(
        subcommand=args.command,
        arguments=arguments,
        master_seed=getattr(args, "seed", None),
        version=__version__,
        outputs=[str(o) for o in outputs],
    )


def _write_manifests(args, outputs):
    manifest = _manifest_for(args, outputs)
    for out in outputs:
        with open(f"{out}.manifest.json", "w", encoding="ascii") as fh:
            fh.write(manifest.to_json())
    if getattr(args, "manifest", None):
        with open(args.manifest, "w", encoding="ascii") as fh:
            fh.write(manifest.to_json())


def _emit(text, out_path, args):
    if out_path:
        with open(out_path, "w", encoding="ascii") as fh:
            fh.write(text)
        _write_manifests(args, [out_path])
    else:
        sys.stdout.write(text)
        if getattr(args, "manifest", None):
            _write_manifests(args, [])


def _parse_arch(text):
    try:
        kind, sizes = text.split(":")
        hidden = tuple(int(h) for h in sizes.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"expected KIND:h1,h2,h3 (e.g. mlp:32,16,8), got {text!r}"
        ) from None
    if kind not in ("mlp", "cnn"):
        raise argparse.ArgumentTypeError(f"architecture kind must be mlp or cnn, got {kind!r}")
    if len(hidden) != 3:
        raise argparse.ArgumentTypeError("exactly three hidden-layer sizes are required")
    return kind, hidden


def _load_codebook(args):
    if getattr(args, "codebook", None):
        return Codebook.load(args.codebook)
    frames = getattr(args, "frames", 1)
    return base_4b6b() if frames == 1 else concat_4b6b(frames)


def _build_decoders(specs, cb):
    from .decoders import (
        ExhaustiveMapDecoder,
        MaximumLikelihoodDecoder,
        TableLookupDecoder,
        load_decoder,
    )

    named = {
        "lookup": TableLookupDecoder,
        "ml": MaximumLikelihoodDecoder,
        "map": ExhaustiveMapDecoder,
    }
    decoders = []
    for spec in specs:
        if spec in named:
            decoders.append((spec, named[spec](cb).fit()))
        else:
            if not os.path.exists(spec):
                raise FileNotFoundError(
                    f"decoder {spec!r} is neither one of {sorted(named)} nor a model file"
                )
            dec = load_decoder(spec, codebook=cb)
            if dec.model_.spec.input_len != cb.total_code_bits:
                raise ValueError(
                    f"model {spec} expects {dec.model_.spec.input_len} inputs but the "
                    f"codebook produces {cb.total_code_bits}-bit words"
                )
            label = os.path.splitext(os.path.basename(spec))[0]
            decoders.append((label, dec))
    return decoders


# -- subcommands ------------------------------------------------------------


def cmd_capacity(args):
    fsm = build_dcfree_fsm(args.rds)
    result = capacity(fsm)
    print(f"{result.capacity:.10f}")
    if args.manifest:
        _write_manifests(args, [])
    return 0


def cmd_rate_table(args):
    fsm = build_dcfree_fsm(args.rds)
    print(format_rate_table(rate_table(fsm, args.max_k)))
    if args.manifest:
        _write_manifests(args, [])
    return 0


def cmd_count_sequences(args):
    fsm = build_dcfree_fsm(args.rds)
    print(count_sequences(fsm, args.length, start_state=args.start))
    if args.manifest:
        _write_manifests(args, [])
    return 0


def cmd_shuffle_codebook(args):
    cb = shuffled_concat(args.frames, args.seed)
    cb.save(args.out)
    _write_manifests(args, [args.out])
    print(f"wrote {cb.n_mappings} mappings to {args.out}")
    return 0


def cmd_param_count(args):
    from .nn.model import ArchitectureSpec, parameter_count

    kind, hidden = args.arch
    cb = concat_4b6b(args.frames)
    spec = ArchitectureSpec(kind, hidden, cb.total_code_bits, cb.total_source_bits)
    print(parameter_count(spec))
    if args.manifest:
        _write_manifests(args, [])
    return 0


def cmd_gradcheck(args):
    import numpy as np

    from .nn.gradcheck import gradient_check
    from .nn.model import ArchitectureSpec, build

    kind, hidden = args.arch
    cb = concat_4b6b(args.frames)
    spec = ArchitectureSpec(kind, hidden, cb.total_code_bits, cb.total_source_bits)
    model = build(spec, init_seed=args.seed)
    rng = np.random.default_rng(args.seed)
    coords = None if args.all_coords else args.coords
    worst = 0.0
    for _ in range(args.pairs):
        x = rng.normal(0.0, 2.0, size=spec.input_len)
        y = rng.integers(0, 2, size=spec.output_len).astype(float)
        res = gradient_check(model, x, y, coords_per_array=coords, rng=rng)
        worst = max(worst, res.max_rel_err)
    status = "PASS" if worst <= args.tol else "FAIL"
    print(f"max_rel_err={worst:.3e} tol={args.tol:g} pairs={args.pairs} {status}")
    if args.manifest:
        _write_manifests(args, [])
    return 0 if status == "PASS" else 1


def cmd_train(args):
    from .decoders import CNNDecoder, MLPDecoder

    kind, hidden = args.arch
    cb = _load_codebook(args)
    cls = MLPDecoder if kind == "mlp" else CNNDecoder
    decoder = cls(
        codebook=cb,
        hidden=hidden,
        train_snr_db=args.snr,
        epochs=args.epochs,
        batch_size=args.batch,
        lr=args.lr,
        seed=args.seed,
        convergence_window=args.convergence_window,
        convergence_eps=args.convergence_eps,
        snr_convention=args.snr_convention,
    )
    decoder.fit()
    decoder.save(args.out)
    _write_manifests(args, [args.out])
    print(
        f"trained {kind}:{','.join(map(str, hidden))} frames={cb.frames} "
        f"epochs={decoder.epochs_run_} final_loss={decoder.loss_history_[-1]:.6f} "
        f"stop={decoder.stop_reason_} -> {args.out}"
    )
    return 0


def _format_points(points, fmt):
    from .eval import points_to_csv, points_to_json

    return points_to_csv(points) if fmt == "csv" else points_to_json(points)


def cmd_eval(args):
    from .eval import measure_ber

    cb = _load_codebook(args)
    decoders = _build_decoders(args.decoders.split(","), cb)
    points = [
        measure_ber(
            dec, cb, args.snr, min_errors=args.min_errors, max_frames=args.max_frames,
            seed=args.seed, convention=args.snr_convention, threads=args.threads,
            decoder_id=label,
        )
        for label, dec in decoders
    ]
    _emit(_format_points(points, args.format), args.out, args)
    return 0


def cmd_sweep(args):
    from .eval import SweepConfig, sweep

    cb = _load_codebook(args)
    decoders = _build_decoders(args.decoders.split(","), cb)
    cfg = SweepConfig(
        snr_start=args.snr_start, snr_stop=args.snr_stop, snr_step=args.snr_step,
        min_errors=args.min_errors, max_frames=args.max_frames, seed=args.seed,
        convention=args.snr_convention, threads=args.threads,
    )
    points = sweep(decoders, cb, cfg)
    _emit(_format_points(points, args.format), args.out, args)
    return 0


def cmd_compare(args):
    from .eval import SweepConfig, db_gap_at_ber, extract_curve, points_to_csv, sweep

    cb = _load_codebook(args)
    decoders = _build_decoders(args.decoders.split(","), cb)
    if len(decoders) < 2:
        raise ValueError("compare needs at least two decoders")
    cfg = SweepConfig(
        snr_start=args.snr_start, snr_stop=args.snr_stop, snr_step=args.snr_step,
        min_errors=args.min_errors, max_frames=args.max_frames, seed=args.seed,
        convention=args.snr_convention, threads=args.threads,
    )
    points = sweep(decoders, cb, cfg)
    reference = decoders[0][0]
    lines = [points_to_csv(points)]
    ref_curve = extract_curve(points, reference)
    for label, _ in decoders[1:]:
        gap = db_gap_at_ber(extract_curve(points, label), ref_curve, args.target_ber)
        lines.append(
            f"# gap_db decoder={label} reference={reference} "
            f"target_ber={args.target_ber!r} gap={gap:.3f}\n"
        )
    _emit("".join(lines), args.out, args)
    return 0


# -- parser wiring -----------------------------------------------------------


def _add_common(parser, *, seed=True, manifest=True):
    if seed:
        parser.add_argument("--seed", type=int, default=0, help="master seed")
    if manifest:
        parser.add_argument("--manifest", metavar="PATH",
                            help="also write the run manifest JSON here")


def _add_eval_common(parser):
    parser.add_argument("--decoders", required=True,
                        help="comma list of lookup, ml, map, or model checkpoint paths")
    parser.add_argument("--frames", type=int, default=1,
                        help="frames per word when no --codebook is given")
    parser.add_argument("--codebook", help="codebook JSON (overrides --frames)")
    parser.add_argument("--min-errors", type=int, default=100, dest="min_errors",
                        help="stop a point after this many bit errors")
    parser.add_argument("--max-frames", type=int, default=10_000_000, dest="max_frames",
                        help="hard cap on frames per point")
    parser.add_argument("--snr-convention", choices=("ebn0", "esn0"), default="ebn0",
                        dest="snr_convention", help="meaning of the dB axis")
    parser.add_argument("--threads", type=int, default=1,
                        help="worker threads (results are identical for any value)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--out", help="write output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cscode",
        description="Constrained-sequence coding toolkit",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"cscode {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("capacity", help="capacity of the DC-free constraint",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--rds", type=int, required=True, help="number of RDS values")
    _add_common(p)
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("rate-table", help="best fixed-length rates up to --max-k",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--rds", type=int, required=True, help="number of RDS values")
    p.add_argument("--max-k", type=int, required=True, dest="max_k",
                   help="largest source-word length")
    _add_common(p)
    p.set_defaults(func=cmd_rate_table)

    p = sub.add_parser("count-sequences", help="count constraint-satisfying sequences",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--rds", type=int, required=True, help="number of RDS values")
    p.add_argument("--length", type=int, required=True, help="sequence length in bits")
    p.add_argument("--start", type=int, default=None,
                   help="start state (default: middle RDS state)")
    _add_common(p)
    p.set_defaults(func=cmd_count_sequences)

    p = sub.add_parser("shuffle-codebook", help="write a seeded shuffled concatenation",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--frames", type=int, required=True, help="frames to concatenate")
    p.add_argument("--out", required=True, help="output codebook JSON path")
    _add_common(p)
    p.set_defaults(func=cmd_shuffle_codebook)

    p = sub.add_parser("param-count", help="trainable parameters of an architecture",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--arch", type=_parse_arch, required=True, help="mlp:h1,h2,h3 or cnn:h1,h2,h3")
    p.add_argument("--frames", type=int, default=1)
    _add_common(p)
    p.set_defaults(func=cmd_param_count)

    p = sub.add_parser("gradcheck", help="finite-difference check of the gradients",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--arch", type=_parse_arch, required=True)
    p.add_argument("--frames", type=int, default=1)
    p.add_argument("--pairs", type=int, default=10, help="random (input, target) pairs")
    p.add_argument("--coords", type=int, default=25,
                   help="coordinates checked per parameter array")
    p.add_argument("--all-coords", action="store_true", dest="all_coords",
                   help="check every coordinate (slow for large nets)")
    p.add_argument("--tol", type=float, default=DEFAULT_TOL, help="relative error tolerance")
    _add_common(p)
    p.set_defaults(func=cmd_gradcheck)

    p = sub.add_parser("train", help="train a neural decoder",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--arch", type=_parse_arch, required=True)
    p.add_argument("--frames", type=int, default=1)
    p.add_argument("--codebook", help="codebook JSON (overrides --frames)")
    p.add_argument("--snr", type=float, default=1.0, help="training SNR in dB")
    p.add_argument("--epochs", type=int, default=20000, help="epoch cap")
    p.add_argument("--batch", type=int, default=None,
                   help="minibatch size (default: full set, capped at 4096)")
    p.add_argument("--lr", type=float, default=1e-3, help="Adam learning rate")
    p.add_argument("--convergence-window", type=int, default=50, dest="convergence_window",
                   help="epochs per convergence window (0 disables early stop)")
    p.add_argument("--convergence-eps", type=float, default=1e-5, dest="convergence_eps",
                   help="relative improvement below which training stops")
    p.add_argument("--snr-convention", choices=("ebn0", "esn0"), default="ebn0",
                   dest="snr_convention", help="meaning of the dB axis")
    p.add_argument("--out", required=True, help="checkpoint JSON path")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="BER of decoders at one SNR",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--snr", type=float, required=True, help="SNR in dB")
    _add_eval_common(p)
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="BER of decoders over an SNR grid",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--snr-start", type=float, required=True, dest="snr_start")
    p.add_argument("--snr-stop", type=float, required=True, dest="snr_stop")
    p.add_argument("--snr-step", type=float, default=1.0, dest="snr_step")
    _add_eval_common(p)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="sweep plus dB gaps against the first decoder",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--snr-start", type=float, required=True, dest="snr_start")
    p.add_argument("--snr-stop", type=float, required=True, dest="snr_stop")
    p.add_argument("--snr-step", type=float, default=1.0, dest="snr_step")
    p.add_argument("--target-ber", type=float, default=1e-3, dest="target_ber",
                   help="BER at which horizontal gaps are read off")
    _add_eval_common(p)
    _add_common(p)
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"cscode {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
