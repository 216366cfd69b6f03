"""Command-line front-end.

Exit codes: 0 success, 1 usage error, 2 data/format error, 3 numerical
error.  Output files are written to a temporary path and renamed into
place, so a failing run never leaves a partially-written file behind.
"""

from __future__ import annotations

import argparse
import os
import re
import sys
import tempfile
from pathlib import Path

import numpy as np

from .checkpoint_io import (
    Checkpoint,
    parse_tensor_specs,
    read_checkpoint,
    write_checkpoint,
)
from .errors import DataFormatError, NumericalError
from .postprocess import (
    DEFAULT_BETA,
    PostprocessConfig,
    ghn_orth,
    he_init,
    saxe_orthogonal_init,
)
from .report import (
    analyze_checkpoint,
    compare_checkpoints,
    emit_compare_csv,
    emit_histogram_svg,
    emit_projection_csv,
    emit_report_csv,
    parse_embeddings_csv,
    project_embeddings,
)
from .rng import RngStream

DEFAULT_BINS = 50


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    data errors, so force usage failures to exit 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _nonneg_int(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must fit in an unsigned 64-bit integer")
    return value


def _nonneg_float(text: str) -> float:
    value = float(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _pos_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _pos_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def build_parser() -> _Parser:
    parser = _Parser(
        prog="ghnpost",
        description="Analyze and post-process neural-network parameter checkpoints.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="per-layer channel-correlation report")
    p.add_argument("checkpoint", type=Path)
    p.add_argument("--out", type=Path, required=True, help="output CSV path")
    p.add_argument("--svg-dir", type=Path, help="write one histogram SVG per layer")
    p.add_argument("--bins", type=_pos_int, default=DEFAULT_BINS)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("postprocess", help="noise + orthogonal re-initialization")
    p.add_argument("checkpoint", type=Path)
    p.add_argument("--beta", type=_nonneg_float, default=DEFAULT_BETA,
                   help="noise scaling factor (default %(default)s)")
    p.add_argument("--start-layer", type=_nonneg_int, required=True,
                   help="depth from which post-processing applies")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", type=Path, required=True, help="output checkpoint path")
    p.add_argument("--skip-noise", action="store_true",
                   help="ablation: orthogonal re-initialization only")
    p.add_argument("--skip-orth", action="store_true",
                   help="ablation: noise addition only")
    p.set_defaults(func=_cmd_postprocess)

    p = sub.add_parser("init", help="generate a baseline-initialized checkpoint")
    p.add_argument("archspec", type=Path,
                   help="JSON list of {name, shape, kind, depth}")
    p.add_argument("--method", choices=("rand", "orth"), required=True)
    p.add_argument("--gain", type=_pos_float, default=1.0,
                   help="scale for --method orth (default %(default)s)")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_init)

    p = sub.add_parser("pca", help="2D PCA projection of embedding vectors")
    p.add_argument("embeddings", type=Path, help="CSV with columns id[,label],v0..")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_pca)

    p = sub.add_parser("compare", help="per-layer diff of two checkpoints")
    p.add_argument("checkpoint_a", type=Path)
    p.add_argument("checkpoint_b", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=_cmd_compare)

    return parser


def _write_atomic(path: Path, payload: bytes | str) -> None:
    data = payload.encode("utf-8") if isinstance(payload, str) else payload
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _read_ckpt(path: Path) -> Checkpoint:
    return read_checkpoint(path.read_bytes())


_UNSAFE = re.compile(r"[^A-Za-z0-9._-]")


def _cmd_analyze(args) -> int:
    report = analyze_checkpoint(_read_ckpt(args.checkpoint), bins=args.bins)
    _write_atomic(args.out, emit_report_csv(report))
    if args.svg_dir is not None:
        for i, rec in enumerate(report.records):
            fname = f"{i:03d}_{_UNSAFE.sub('_', rec.name)}.svg"
            _write_atomic(args.svg_dir / fname, emit_histogram_svg(rec.histogram, rec.name))
    return 0


def _cmd_postprocess(args) -> int:
    cfg = PostprocessConfig(
        start_layer=args.start_layer,
        beta=args.beta,
        seed=args.seed,
        skip_noise=args.skip_noise,
        skip_orth=args.skip_orth,
    )
    result = ghn_orth(_read_ckpt(args.checkpoint), cfg)
    _write_atomic(args.out, write_checkpoint(result))
    return 0


def _cmd_init(args) -> int:
    specs = parse_tensor_specs(args.archspec.read_text(encoding="utf-8"), with_data=False)
    tensors = []
    for meta, _ in specs:
        stream = RngStream(args.seed, meta.name)
        if meta.kind in ("conv", "linear"):
            if args.method == "rand":
                arr = he_init(meta.shape, stream)
            else:
                arr = saxe_orthogonal_init(meta.shape, args.gain, stream)
        elif meta.kind == "norm":
            arr = np.ones(meta.shape, dtype=np.float32)
        else:  # bias, other
            arr = np.zeros(meta.shape, dtype=np.float32)
        tensors.append((meta, arr))
    _write_atomic(args.out, write_checkpoint(Checkpoint(tensors=tensors)))
    return 0


def _cmd_pca(args) -> int:
    embeddings = parse_embeddings_csv(args.embeddings.read_text(encoding="utf-8"))
    _write_atomic(args.out, emit_projection_csv(project_embeddings(embeddings)))
    return 0


def _cmd_compare(args) -> int:
    rows = compare_checkpoints(_read_ckpt(args.checkpoint_a), _read_ckpt(args.checkpoint_b))
    _write_atomic(args.out, emit_compare_csv(rows))
    return 0


def run(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "skip_noise", False) and getattr(args, "skip_orth", False):
            parser.error("--skip-noise and --skip-orth are mutually exclusive")
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except DataFormatError as exc:
        print(f"ghnpost: data error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"ghnpost: i/o error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"ghnpost: numerical error: {exc}", file=sys.stderr)
        return 3


def main(argv: list[str] | None = None) -> int:
    return run(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
