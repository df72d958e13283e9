"""Command-line entry point: ``manifoldwalk <command> [flags]``.

Exit codes: 0 success, 2 usage / validation / I/O error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from . import datasets as ds
from . import experiments as ex
from .errors import DimensionMismatch, InvalidArgument, ManifoldWalkError, NumericalError
from .graphs import knn_adjacency
from .imaging import compare, raster, superpixel
from .similarity import DEFAULT_SAFETY, Variant, manifold_distance
from .transfer import TransferConfig, derive_seed, prepare_trial

QUICK_N = 300
QUICK_ITERATIONS = 5
VARIANTS = {"rows": Variant.ROWS, "columns": Variant.COLUMNS, "both": Variant.ROWS_AND_COLUMNS}

SIMILARITY_EPILOG = """\
inputs: an image (.png/.ppm), a delimited text file (label in the last
column), or a synthetic spec NAME[:LEVEL] with NAME in swiss_roll, moons,
s_curve; LEVEL 0-4 adds noise to the standardised cloud. Clouds with
different row counts are subsampled to the smaller one.

output CSV columns: distance,t,variant,n,score
  score = 1/(1 + distance/n), a bounded convenience value
"""

FIGURE1_EPILOG = """\
output CSV columns: noise_level,sigma,measure,mean_distance,std,seeds
  measure is one of walk, cosine, rbf, procrustes, wasserstein, hausdorff;
  std is the population standard deviation over seeds.
"""

TABLES_EPILOG = """\
output CSV columns:
  dataset,per_class,noise_level,sigma,mean_acc_no_tl,mean_acc_tl,
  measured_distance,gated_fraction,iterations,seed,dt,mean_acc_tl_ungated
accuracies are fractions in [0, 1]. mean_acc_tl averages the iterations
that passed the gate and is empty when all were gated;
mean_acc_tl_ungated ignores the gate. With --dt auto (default) the
threshold of each (dataset, per_class) group is the largest distance seen
at noise level 2. Real datasets (banknotes, pendigits, satimage) are read
from --data-dir: data_banknote_authentication.txt, pendigits.tra, sat.trn.
"""

STUDY_EPILOG = """\
output CSV columns: grid_size,n_segments,distance
  grid_size "original" is the unprocessed pair; otherwise N = grid_size^2.
"""

RANK_EPILOG = """\
output CSV columns: rank,path,distance (ascending distance)
with --class-average: label,mean_distance,count (one row per subdirectory)
"""


# --------------------------------------------------------------------------
# argument parsing


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _int_list(text):
    try:
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _t_value(text):
    if text == "auto":
        return None
    value = float(text)
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a positive number or 'auto', got {text}")
    return value


def _dt_value(text):
    if text == "auto":
        return "auto"
    value = float(text)
    if not value >= 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, 'inf' or 'auto', got {text}")
    return value


def _common_parser():
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("common options")
    g.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    g.add_argument("--threads", type=_positive_int, default=None,
                   help="worker processes (default: logical cores)")
    g.add_argument("--k", type=_positive_int, default=None,
                   help="neighbours per node (default 10; 8 for images)")
    g.add_argument("--t", type=_t_value, default=None, help="walk parameter or 'auto' (default)")
    g.add_argument("--dt", type=_dt_value, default="auto",
                   help="gating threshold: number, 'inf' or 'auto' (default)")
    g.add_argument("--variant", choices=sorted(VARIANTS), default="rows")
    g.add_argument("--symmetrize", action=argparse.BooleanOptionalAction, default=False,
                   help="use undirected k-NN graphs")
    g.add_argument("--quick", action=argparse.BooleanOptionalAction, default=False,
                   help=f"defaults n={QUICK_N} and {QUICK_ITERATIONS} iterations/seeds")
    g.add_argument("--out", type=Path, default=None, help="output file (default: stdout)")
    g.add_argument("--config", type=Path, default=None,
                   help="key=value file mirroring these flags; flags override it")
    g.add_argument("--data-dir", type=Path, default=None,
                   help=f"directory of real datasets (default: ${ex.DATA_DIR_ENV})")
    g.add_argument("--n", type=_positive_int, default=None, help="points per cloud (default 1000)")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common_parser()
    parser = argparse.ArgumentParser(prog="manifoldwalk", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, epilog=None):
        return sub.add_parser(name, parents=[common], help=help_text, epilog=epilog,
                              formatter_class=argparse.RawDescriptionHelpFormatter)

    p = add("similarity", "distance between two clouds or images", SIMILARITY_EPILOG)
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--no-xy", action="store_true", help="images: colour features only")
    p.add_argument("--max-pixels", type=_positive_int, default=compare.DEFAULT_MAX_PIXELS)
    p.add_argument("--label-col", default="-1",
                   help="text inputs: label column as 0-based index or header name (default -1)")
    p.add_argument("--dump-adjacency", type=Path, default=None,
                   help="write both dense adjacency matrices as PREFIX.1.txt / PREFIX.2.txt")

    p = add("figure1", "distance sweep over noise levels", FIGURE1_EPILOG)
    p.add_argument("--seeds", type=_positive_int, default=None, help="default 20")
    p.add_argument("--levels", type=_int_list, default=(0,) + ex.LEVELS)

    p = add("tables", "transfer accuracy grid", TABLES_EPILOG)
    p.add_argument("--datasets", default="synthetic",
                   help="comma list of names, 'synthetic' or 'real' (default synthetic)")
    p.add_argument("--per-class", type=_int_list, default=ex.PER_CLASS)
    p.add_argument("--levels", type=_int_list, default=ex.LEVELS)
    p.add_argument("--iterations", type=_positive_int, default=None, help="default 20")
    p.add_argument("--classes", type=_positive_int, default=4, help="classes for synthetic shapes")
    p.add_argument("--joint-scale", action=argparse.BooleanOptionalAction, default=False,
                   help="min-max scale source and target together instead of separately")
    p.add_argument("--markdown", type=Path, default=None, help="also write a Markdown table here")

    p = add("superpixel", "write a superpixel-centroid image")
    p.add_argument("input")
    p.add_argument("output", help=".png or .ppm")
    p.add_argument("--segments", type=_positive_int, required=True, help="segment / palette count N")
    p.add_argument("--dump-segments", type=Path, default=None, help="segment label grid as text")
    p.add_argument("--dump-palette", type=Path, default=None, help="palette LAB colours as text")

    p = add("superpixel-study", "distance vs superpixel grid size", STUDY_EPILOG)
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--grids", type=_int_list, default=ex.STUDY_GRIDS)
    p.add_argument("--no-xy", action="store_true")
    p.add_argument("--max-pixels", type=_positive_int, default=compare.DEFAULT_MAX_PIXELS)

    p = add("rank", "rank a gallery by distance to a reference image", RANK_EPILOG)
    p.add_argument("reference")
    p.add_argument("gallery")
    p.add_argument("--superpixel", type=_positive_int, default=None, metavar="N")
    p.add_argument("--class-average", action="store_true")
    p.add_argument("--no-xy", action="store_true")
    p.add_argument("--max-pixels", type=_positive_int, default=compare.DEFAULT_MAX_PIXELS)
    return parser


def read_config(path) -> list[str]:
    """Turn ``key = value`` lines into flag tokens (``#`` starts a comment)."""
    tokens = []
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidArgument(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        flag = "--" + key.replace("_", "-")
        lowered = value.lower()
        if lowered in ("true", "yes", "on"):
            tokens.append(flag)
        elif lowered in ("false", "no", "off"):
            tokens.append("--no-" + key.replace("_", "-"))
        else:
            tokens.extend([flag, value])
    return tokens


def parse_args(argv):
    argv = list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", type=Path)
    known, _ = pre.parse_known_args(argv)
    if known.config is not None and argv:
        # config tokens go right after the command so explicit flags win
        argv = argv[:1] + read_config(known.config) + argv[1:]
    return parser.parse_args(argv)


# --------------------------------------------------------------------------
# commands


def _emit(text: str, out) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="\n")


def _n(args) -> int:
    return args.n or (QUICK_N if args.quick else 1000)


def _load_cloud(spec: str, args) -> np.ndarray:
    path = Path(spec)
    if path.exists():
        return ds.load_csv(path, _label_column(args.label_col)).X
    name, _, level = spec.partition(":")
    if name not in ds.SYNTHETIC:
        raise FileNotFoundError(f"no such file and not a synthetic spec: {spec}")
    level = int(level) if level else 0
    if level not in range(len(ds.NOISE_SIGMAS)):
        raise InvalidArgument(f"noise level must be 0-4, got {level}")
    # same seed for both inputs, so name:0 vs name:L compares a cloud with its noisy copy
    _, source = prepare_trial(name, 1, level, derive_seed(args.seed, "similarity", name), n=_n(args))
    return source.X


def _label_column(text):
    try:
        return int(text)
    except ValueError:
        return text


def _dump_adjacency(prefix, A, which):
    np.savetxt(f"{prefix}.{which}.txt", A, fmt="%d")


def cmd_similarity(args):
    variant = VARIANTS[args.variant]
    if raster.is_image_path(args.first) or raster.is_image_path(args.second):
        if not (raster.is_image_path(args.first) and raster.is_image_path(args.second)):
            raise InvalidArgument("cannot compare an image with a point cloud")
        a, b = compare.prepare_pair(raster.read_image(args.first), raster.read_image(args.second),
                                    args.max_pixels)
        X1 = raster.image_to_point_cloud(a, not args.no_xy)
        X2 = raster.image_to_point_cloud(b, not args.no_xy)
        k = args.k or compare.DEFAULT_K
    else:
        X1, X2 = _load_cloud(args.first, args), _load_cloud(args.second, args)
        if X1.shape[1] != X2.shape[1]:
            raise DimensionMismatch("feature dimensions differ", X1.shape[1], X2.shape[1])
        n = min(len(X1), len(X2))
        rng = np.random.default_rng(derive_seed(args.seed, "subsample"))
        if len(X1) > n:
            X1 = X1[np.sort(rng.choice(len(X1), n, replace=False))]
        if len(X2) > n:
            X2 = X2[np.sort(rng.choice(len(X2), n, replace=False))]
        k = args.k or 10
    k = min(k, len(X1) - 1)
    A1 = knn_adjacency(X1, k, args.symmetrize)
    A2 = knn_adjacency(X2, k, args.symmetrize)
    if args.dump_adjacency is not None:
        _dump_adjacency(args.dump_adjacency, A1, 1)
        _dump_adjacency(args.dump_adjacency, A2, 2)
    result = manifold_distance(A1, A2, t=args.t, variant=variant, safety=DEFAULT_SAFETY)
    text = "distance,t,variant,n,score\n" + ",".join([
        ex.format_value(result.distance), ex.format_value(result.t), args.variant,
        str(result.n), ex.format_value(result.score),
    ]) + "\n"
    _emit(text, args.out)


def cmd_figure1(args):
    bad = [lvl for lvl in args.levels if lvl not in range(len(ds.NOISE_SIGMAS))]
    if bad:
        raise InvalidArgument(f"--levels: noise levels must be 0-4, got {bad}")
    seeds = args.seeds or (QUICK_ITERATIONS if args.quick else 20)
    records = ex.figure1(levels=args.levels, seeds=seeds, seed=args.seed, n=_n(args),
                         k=args.k or 10, t=args.t, variant=VARIANTS[args.variant],
                         symmetrize=args.symmetrize, threads=args.threads)
    _emit(ex.to_csv(records, ex.Figure1Record), args.out)


def cmd_tables(args):
    bad = [lvl for lvl in args.levels if lvl not in range(1, len(ds.NOISE_SIGMAS))]
    if bad:
        raise InvalidArgument(f"--levels: noise levels must be 1-4, got {bad}")
    if any(pc < 1 for pc in args.per_class):
        raise InvalidArgument("--per-class: values must be >= 1")
    names = ex.expand_datasets(args.datasets)
    real = [n for n in names if n in ex.REAL_FILES]
    if real:
        args.data_dir = Path(ex.require_data_dir(args.data_dir, real))
    iterations = args.iterations or (QUICK_ITERATIONS if args.quick else 20)
    cfg = TransferConfig(k=args.k or 10, t=args.t, variant=VARIANTS[args.variant],
                         symmetrize=args.symmetrize, joint_scale=args.joint_scale)
    cells = ex.run_cells(names, per_class=args.per_class, levels=args.levels,
                         iterations=iterations, seed=args.seed, n=_n(args), classes=args.classes,
                         cfg=cfg, data_dir=args.data_dir, threads=args.threads)
    records = ex.table_records(cells, dt=args.dt, seed=args.seed)
    _emit(ex.to_csv(records, ex.TableRecord), args.out)
    if args.markdown is not None:
        args.markdown.write_text(ex.to_markdown(records, ex.TableRecord), encoding="utf-8",
                                 newline="\n")


def cmd_superpixel(args):
    img = raster.read_image(args.input)
    result = superpixel.superpixel_centroids(img, args.segments, seed=args.seed)
    raster.write_image(args.output, result.image)
    if args.dump_segments is not None:
        np.savetxt(args.dump_segments, result.segments, fmt="%d")
    if args.dump_palette is not None:
        np.savetxt(args.dump_palette, result.palette, fmt="%.6f")


def _image_kwargs(args):
    return {"k": args.k or compare.DEFAULT_K, "include_xy": not args.no_xy, "t": args.t,
            "variant": VARIANTS[args.variant], "symmetrize": args.symmetrize}


def cmd_superpixel_study(args):
    a, b = raster.read_image(args.first), raster.read_image(args.second)
    records = ex.superpixel_study(a, b, grids=args.grids, seed=args.seed,
                                  max_pixels=args.max_pixels, **_image_kwargs(args))
    _emit(ex.to_csv(records, ex.StudyRecord), args.out)


def cmd_rank(args):
    reference = raster.read_image(args.reference)
    paths = ex.gallery_paths(args.gallery)
    records = ex.rank_gallery(reference, paths, n_segments=args.superpixel, seed=args.seed,
                              root=Path(args.gallery), max_pixels=args.max_pixels,
                              **_image_kwargs(args))
    if args.class_average:
        _emit(ex.to_csv(ex.class_averages(records), ex.ClassRecord), args.out)
    else:
        _emit(ex.to_csv(records, ex.RankRecord), args.out)


COMMANDS = {
    "similarity": cmd_similarity,
    "figure1": cmd_figure1,
    "tables": cmd_tables,
    "superpixel": cmd_superpixel,
    "superpixel-study": cmd_superpixel_study,
    "rank": cmd_rank,
}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except (InvalidArgument, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        COMMANDS[args.command](args)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except (ManifoldWalkError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
