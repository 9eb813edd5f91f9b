"""Command-line interface.

    lolfusion params init [--out FILE] [--force]
    lolfusion synthesize  [--config FILE] [--seed N] [--out DIR] [--force]
    lolfusion train --method anfis|rbf|mlp [...]
    lolfusion fuse --method owa|kalman [...]
    lolfusion evaluate [...]
    lolfusion run-all [...]

Exit codes: 0 success, 1 usage error, 2 data/validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import os
import shutil
import sys
import tempfile
import time
from contextlib import contextmanager

from lolfusion import __version__, estimators, metrics, pipeline, synthesis
from lolfusion.errors import LolFusionError
from lolfusion.fusion import GaResult, OwaWeights
from lolfusion.pipeline import RunConfig
from lolfusion.thermal import TransformerParams

log = logging.getLogger("lolfusion")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

DATASET_FILE = "dataset.csv"
MANIFEST_FILE = "manifest.json"
REPORT_FILE = "report.json"
RANKING_FILE = "ranking.txt"
COMPARISON_FILE = "comparison.csv"
FIG5_FILE = "fig5.csv"
COMPARISON_COLUMNS = ("hour", "target", "anfis", "rbf", "owa", "kalman")
FIG5_COLUMNS = ("hour", "actual", "fused", "error")


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")


def model_file(kind: str) -> str:
    return f"model_{kind.lower()}.json"


def fusion_file(method: str) -> str:
    return f"fusion_{method.lower()}.json"


@contextmanager
def stage(name: str):
    log.info("stage: %s", name)
    try:
        yield
    except (UsageError, StageError):
        raise
    except Exception as exc:  # noqa: BLE001 - re-raised with the stage name attached
        raise StageError(name, exc) from exc


class ArtifactWriter:
    """Collects output files in a scratch directory and moves them into place on success.

    If anything fails before :meth:`commit`, the scratch directory is removed
    and nothing in the output directory is touched.
    """

    def __init__(self, out_dir: str, force: bool):
        self.out_dir = out_dir
        self.force = force
        self.names: list[str] = []
        os.makedirs(out_dir, exist_ok=True)
        self.scratch = tempfile.mkdtemp(prefix=".partial-", dir=out_dir)

    def check(self, *names: str) -> None:
        """Refuse early if any of ``names`` already exists and --force was not given."""
        for name in names:
            target = os.path.join(self.out_dir, name)
            if os.path.exists(target) and not self.force:
                raise UsageError(f"{target} exists; pass --force to overwrite")

    def path(self, name: str) -> str:
        self.check(name)
        self.names.append(name)
        return os.path.join(self.scratch, name)

    def text(self, name: str, content: str) -> None:
        with open(self.path(name), "w", encoding="utf-8", newline="") as fh:
            fh.write(content)

    def json(self, name: str, doc: dict) -> None:
        self.text(name, pipeline.dumps_json(doc))

    def csv(self, name: str, header, rows) -> None:
        with open(self.path(name), "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) for v in row])

    def commit(self) -> list[str]:
        written = []
        for name in self.names:
            dest = os.path.join(self.out_dir, name)
            os.replace(os.path.join(self.scratch, name), dest)
            written.append(dest)
        self.discard()
        return written

    def discard(self) -> None:
        shutil.rmtree(self.scratch, ignore_errors=True)

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self.discard()
        return False


# ---------------------------------------------------------------------------
# config plumbing


def load_config(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["output_dir"] = args.out
    return dataclasses.replace(cfg, **changes) if changes else cfg


def dataset_path(cfg: RunConfig) -> str:
    return cfg.dataset_csv or os.path.join(cfg.output_dir, DATASET_FILE)


def read_dataset(cfg: RunConfig) -> synthesis.Dataset:
    path = dataset_path(cfg)
    if not os.path.exists(path):
        raise UsageError(f"dataset not found at {path}; run 'synthesize' first")
    ds = synthesis.read_dataset_csv(path, cfg.lagged_features)
    if ds.split is None:
        raise UsageError(f"{path} has no train/test split column")
    return ds


def read_model(cfg: RunConfig, kind: str, required: bool = True):
    path = os.path.join(cfg.output_dir, model_file(kind))
    if not os.path.exists(path):
        if required:
            raise UsageError(f"{path} not found; run 'train --method {kind.lower()}' first")
        return None
    return estimators.load_model(path)


def read_json(path: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# commands


def cmd_params_init(args) -> int:
    path = args.out or "transformer_params.cfg"
    if os.path.exists(path) and not args.force:
        raise UsageError(f"{path} exists; pass --force to overwrite")
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(TransformerParams().dumps())
    print(path)
    return EXIT_OK


def cmd_synthesize(args) -> int:
    cfg = load_config(args)
    with ArtifactWriter(cfg.output_dir, args.force) as out:
        with stage("synthesize"):
            ds = pipeline.synthesize(cfg)
            synthesis.write_dataset_csv(ds, out.path(DATASET_FILE))
            out.json(MANIFEST_FILE, pipeline.manifest(cfg, rows=len(ds)))
        written = out.commit()
    print("\n".join(written))
    return EXIT_OK


def cmd_train(args) -> int:
    cfg = load_config(args)
    kind = args.method.upper()
    ds = read_dataset(cfg)
    with ArtifactWriter(cfg.output_dir, args.force) as out:
        with stage(f"train {kind}"):
            model = pipeline.train(kind, ds, cfg)
            doc = model.to_dict()
            doc["manifest"] = pipeline.manifest(cfg, rows=len(ds))
            out.json(model_file(kind), doc)
        written = out.commit()
    print("\n".join(written))
    return EXIT_OK


def cmd_fuse(args) -> int:
    cfg = load_config(args)
    method = args.method.upper()
    ds = read_dataset(cfg)
    anfis_model = read_model(cfg, "ANFIS")
    rbf_model = read_model(cfg, "RBF")
    with ArtifactWriter(cfg.output_dir, args.force) as out:
        with stage(f"fuse {method}"):
            doc = {"manifest": pipeline.manifest(cfg, rows=len(ds)), "method": method}
            if method == "OWA":
                result = pipeline.fit_owa(ds, anfis_model, rbf_model, cfg)
                doc["owa_weights"] = {"c1": result.weights.c1, "c2": result.weights.c2}
                doc["owa_train_objective"] = result.objective
            else:
                doc["kalman_config"] = dataclasses.asdict(pipeline.fit_kalman(ds, anfis_model, rbf_model, cfg))
            out.json(fusion_file(method), doc)
        written = out.commit()
    print("\n".join(written))
    return EXIT_OK


def _write_report(out: ArtifactWriter, cfg, ds, evaluation, owa, kalman) -> None:
    out.json(REPORT_FILE, pipeline.report_document(cfg, ds, evaluation, owa, kalman))
    out.text(RANKING_FILE, metrics.format_table(evaluation.ranked))
    out.csv(COMPARISON_FILE, COMPARISON_COLUMNS, pipeline.comparison_rows(ds, evaluation))
    if "KALMAN" in evaluation.streams:
        out.csv(FIG5_FILE, FIG5_COLUMNS, pipeline.fig5_rows(ds, evaluation))
    out.json(MANIFEST_FILE, pipeline.manifest(cfg, rows=len(ds)))


def cmd_evaluate(args) -> int:
    cfg = load_config(args)
    ds = read_dataset(cfg)
    models = {"ANFIS": read_model(cfg, "ANFIS"), "RBF": read_model(cfg, "RBF")}
    mlp_model = read_model(cfg, "MLP", required=False)
    if mlp_model is not None:
        models["MLP"] = mlp_model
    owa = kalman = None
    owa_path = os.path.join(cfg.output_dir, fusion_file("OWA"))
    if os.path.exists(owa_path):
        doc = read_json(owa_path)
        owa = GaResult(OwaWeights(**doc["owa_weights"]), doc["owa_train_objective"], ())
    kalman_path = os.path.join(cfg.output_dir, fusion_file("KALMAN"))
    if os.path.exists(kalman_path):
        kalman = pipeline.kalman_from_dict(read_json(kalman_path)["kalman_config"])
    with ArtifactWriter(cfg.output_dir, args.force) as out:
        with stage("evaluate"):
            evaluation = pipeline.evaluate(ds, models, owa.weights if owa else None, kalman)
            _write_report(out, cfg, ds, evaluation, owa, kalman)
        written = out.commit()
    print(metrics.format_table(evaluation.ranked), end="")
    log.info("wrote %s", ", ".join(written))
    return EXIT_OK


def cmd_run_all(args) -> int:
    cfg = load_config(args)
    started = time.perf_counter()
    with ArtifactWriter(cfg.output_dir, args.force) as out:
        out.check(DATASET_FILE, REPORT_FILE, RANKING_FILE, COMPARISON_FILE, FIG5_FILE, MANIFEST_FILE,
                  *(model_file(k) for k in estimators.KINDS))
        current = {"name": "setup"}

        def on_stage(name):
            current["name"] = name
            log.info("stage: %s", name)

        try:
            result = pipeline.run_all(cfg, on_stage)
        except Exception as exc:
            raise StageError(current["name"], exc) from exc
        with stage("write outputs"):
            synthesis.write_dataset_csv(result.dataset, out.path(DATASET_FILE))
            for kind, model in result.models.items():
                doc = model.to_dict()
                doc["manifest"] = pipeline.manifest(cfg, rows=len(result.dataset))
                out.json(model_file(kind), doc)
            _write_report(out, cfg, result.dataset, result.evaluation, result.owa, result.kalman)
        written = out.commit()
    print(metrics.format_table(result.evaluation.ranked), end="")
    log.info("run-all finished in %.1f s; wrote %d files to %s", time.perf_counter() - started,
             len(written), cfg.output_dir)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lolfusion", description="Transformer loss-of-life estimation and fusion.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log stage progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, out_help="output directory (default from config, else ./out)"):
        p.add_argument("--config", metavar="PATH", help="flat key = value run config")
        p.add_argument("--seed", type=int, help="global seed (overrides config)")
        p.add_argument("--out", metavar="DIR", help=out_help)
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")

    params = sub.add_parser("params", help="transformer parameter files")
    params_sub = params.add_subparsers(dest="params_command", required=True, parser_class=_Parser)
    init = params_sub.add_parser("init", help="write the default transformer parameters")
    init.add_argument("--out", metavar="PATH", help="file to write (default transformer_params.cfg)")
    init.add_argument("--force", action="store_true")
    init.set_defaults(func=cmd_params_init)

    p = sub.add_parser("synthesize", help="generate the hourly dataset with LOL targets")
    common(p)
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("train", help="train one estimator on the dataset's train split")
    p.add_argument("--method", required=True, type=str.lower, choices=["anfis", "rbf", "mlp"])
    common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("fuse", help="fit OWA weights or Kalman settings")
    p.add_argument("--method", required=True, type=str.lower, choices=["owa", "kalman"])
    common(p)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("evaluate", help="score trained models and fusers on the test split")
    common(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("run-all", help="synthesize, train, fuse and evaluate in one go")
    common(p)
    p.set_defaults(func=cmd_run_all)
    return parser


def exit_code_for(exc: BaseException) -> int:
    if isinstance(exc, StageError):
        exc = exc.cause
    if isinstance(exc, UsageError):
        return EXIT_USAGE
    if isinstance(exc, ArithmeticError):
        return EXIT_NUMERIC
    if isinstance(exc, (ValueError, OSError, KeyError, LolFusionError)):
        return EXIT_DATA
    return EXIT_NUMERIC


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, StageError, LolFusionError, ValueError, OSError, ArithmeticError, KeyError) as exc:
        print(f"lolfusion: error: {exc}", file=sys.stderr)
        return exit_code_for(exc)


if __name__ == "__main__":
    sys.exit(main())
