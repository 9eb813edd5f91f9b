"""End-to-end experiment: synthesize, train, fuse, evaluate.

Each stage is a plain function over in-memory values so the CLI can run
stages one at a time (reading and writing files in between) or all at once.
One global seed fans out to per-stage seeds by fixed offsets.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from lolfusion import estimators, fusion, kvconfig, metrics, synthesis
from lolfusion.errors import ConfigError
from lolfusion.estimators import AnfisConfig, EstimatorModel, MlpConfig, RbfConfig
from lolfusion.fusion import GaConfig, KalmanConfig, OwaWeights
from lolfusion.synthesis import Dataset, ProfileConfig
from lolfusion.thermal import TransformerParams

REPORT_VERSION = 1
FIG5_SAMPLES = 50

SEED_OFFSETS = {"profile": 0, "split": 1, "rbf": 2, "anfis": 3, "mlp": 4, "ga": 5}


@dataclass(frozen=True)
class RunConfig:
    """Everything a run depends on. Read from a flat ``key = value`` file.

    Keys are the field names below plus any :class:`ProfileConfig` field.
    ``kalman_*`` entries left at ``auto`` are estimated from the training rows.
    """

    seed: int = 0
    output_dir: str = "out"
    params_path: str = ""
    profile_csv: str = ""
    dataset_csv: str = ""
    hours: int = synthesis.HOURS_PER_YEAR
    train_fraction: float = 0.7
    lagged_features: bool = False
    rbf_centers: int = 25
    rbf_ridge: float = 1e-8
    anfis_mfs: int = 3
    anfis_epochs: int = 50
    anfis_learning_rate: float = 1e-2
    mlp_hidden_units: int = 16
    mlp_epochs: int = 500
    mlp_learning_rate: float = 1e-2
    mlp_batch_size: int = 32
    ga_population: int = 40
    ga_generations: int = 60
    ga_crossover_rate: float = 0.9
    ga_mutation_rate: float = 0.1
    ga_mutation_scale: float = 0.05
    kalman_a: float = 1.0
    kalman_b: float = 0.0
    kalman_h: float = 1.0
    kalman_q: float | None = None
    kalman_e_anfis: float | None = None
    kalman_e_rbf: float | None = None
    kalman_x0: float | None = None
    kalman_p0: float | None = None
    profile: ProfileConfig = field(default_factory=ProfileConfig)
    params: TransformerParams = field(default_factory=TransformerParams)

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie in (0, 1)")

    @classmethod
    def from_mapping(cls, values: dict[str, str], base_dir: str | os.PathLike = ".") -> "RunConfig":
        profile_keys = {f.name for f in dataclasses.fields(ProfileConfig)}
        run_keys = {f.name for f in dataclasses.fields(cls)} - {"profile", "params"}
        unknown = set(values) - profile_keys - run_keys
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        profile = kvconfig.dataclass_from_kv(ProfileConfig, {k: v for k, v in values.items() if k in profile_keys})
        run_values = {k: v for k, v in values.items() if k in run_keys}
        for key in ("params_path", "profile_csv", "dataset_csv"):
            if run_values.get(key):
                run_values[key] = os.path.join(base_dir, run_values[key])
        params = TransformerParams()
        if run_values.get("params_path"):
            if not os.path.exists(run_values["params_path"]):
                raise ConfigError(f"params_path does not exist: {run_values['params_path']}")
            params = TransformerParams.load(run_values["params_path"])
        if run_values.get("profile_csv") and not os.path.exists(run_values["profile_csv"]):
            raise ConfigError(f"profile_csv does not exist: {run_values['profile_csv']}")
        return kvconfig.dataclass_from_kv(cls, run_values, strict=False, profile=profile, params=params)

    @classmethod
    def load(cls, path: str | os.PathLike) -> "RunConfig":
        return cls.from_mapping(kvconfig.read_kv(path), base_dir=os.path.dirname(os.path.abspath(path)))

    def stage_seed(self, stage: str) -> int:
        return self.seed + SEED_OFFSETS[stage]

    def rbf_config(self) -> RbfConfig:
        return RbfConfig(centers=self.rbf_centers, ridge=self.rbf_ridge, seed=self.stage_seed("rbf"))

    def anfis_config(self) -> AnfisConfig:
        return AnfisConfig(self.anfis_mfs, self.anfis_epochs, self.anfis_learning_rate, self.stage_seed("anfis"))

    def mlp_config(self) -> MlpConfig:
        return MlpConfig(self.mlp_hidden_units, self.mlp_epochs, self.mlp_learning_rate,
                         self.mlp_batch_size, self.stage_seed("mlp"))

    def estimator_config(self, kind: str):
        return {"ANFIS": self.anfis_config, "RBF": self.rbf_config, "MLP": self.mlp_config}[kind.upper()]()

    def ga_config(self) -> GaConfig:
        return GaConfig(self.ga_population, self.ga_generations, self.ga_crossover_rate,
                        self.ga_mutation_rate, self.ga_mutation_scale, seed=self.stage_seed("ga"))

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        # paths are environment detail, not part of the experiment identity
        for key in ("output_dir", "params_path", "profile_csv", "dataset_csv"):
            d.pop(key)
        return d

    def config_hash(self) -> str:
        return _hash(self.to_dict())


def _hash(obj: Any) -> str:
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def manifest(cfg: RunConfig, rows: int | None = None, extra: dict | None = None) -> dict:
    doc = {
        "seed": cfg.seed,
        "config_hash": cfg.config_hash(),
        "params_hash": _hash(cfg.params.to_dict()),
        "report_version": REPORT_VERSION,
    }
    if rows is not None:
        doc["rows"] = rows
    if extra:
        doc.update(extra)
    return doc


# ---------------------------------------------------------------------------
# stages


def synthesize(cfg: RunConfig) -> Dataset:
    """Profile (generated or read) -> hourly LOL targets -> train/test split."""
    if cfg.profile_csv:
        profile = synthesis.read_profile_csv(cfg.profile_csv)
    else:
        profile = synthesis.generate_profile(cfg.hours, cfg.profile, cfg.stage_seed("profile"))
    ds = synthesis.synthesize_targets(profile, cfg.params, cfg.lagged_features)
    return synthesis.split_dataset(ds, cfg.train_fraction, cfg.stage_seed("split"))


def train(kind: str, ds: Dataset, cfg: RunConfig) -> EstimatorModel:
    train_rows = ds.train()
    return estimators.train(kind, train_rows.features, train_rows.targets, cfg.estimator_config(kind))


def fit_owa(ds: Dataset, anfis_model: EstimatorModel, rbf_model: EstimatorModel, cfg: RunConfig) -> fusion.GaResult:
    """GA weight search on the training rows."""
    train_rows = ds.train()
    return fusion.run_owa_ga(
        estimators.predict(anfis_model, train_rows.features),
        estimators.predict(rbf_model, train_rows.features),
        train_rows.targets,
        cfg.ga_config(),
    )


def fit_kalman(ds: Dataset, anfis_model: EstimatorModel, rbf_model: EstimatorModel, cfg: RunConfig) -> KalmanConfig:
    """Kalman settings; anything not pinned in ``cfg`` comes from the training rows.

    Measurement noises are the residual variances of each estimator; the
    process noise is the variance of one-hour target increments; the filter
    starts at the first ANFIS prediction with ``p0 = e_anfis``.
    """
    train_rows = ds.train()
    e_anfis = cfg.kalman_e_anfis
    if e_anfis is None:
        e_anfis = fusion.estimate_measurement_noise(anfis_model, train_rows)
    e_rbf = cfg.kalman_e_rbf
    if e_rbf is None:
        e_rbf = fusion.estimate_measurement_noise(rbf_model, train_rows)
    q = cfg.kalman_q
    if q is None:
        q = fusion.estimate_process_noise(ds.targets, ds.hours, ds.train_mask)
    x0 = cfg.kalman_x0
    if x0 is None:
        x0 = float(estimators.predict(anfis_model, ds.features[0]))
    p0 = cfg.kalman_p0 if cfg.kalman_p0 is not None else e_anfis
    return KalmanConfig(e_anfis=e_anfis, e_rbf=e_rbf, q=q, x0=x0, p0=p0,
                        a=cfg.kalman_a, b=cfg.kalman_b, h=cfg.kalman_h)


@dataclass
class Evaluation:
    """Per-hour streams over the whole dataset and the ranked test-split table."""

    ranked: list[metrics.MethodReport]
    train_reports: dict[str, metrics.MethodReport]
    streams: dict[str, np.ndarray]


def evaluate(
    ds: Dataset,
    models: dict[str, EstimatorModel],
    owa_weights: OwaWeights | None = None,
    kalman_cfg: KalmanConfig | None = None,
) -> Evaluation:
    """Score every available method on the test rows.

    The Kalman filter is run over the complete hourly stream in time order
    (it needs only estimator outputs, never targets) and scored on the test
    hours, like every other method.
    """
    streams = {kind: np.asarray(estimators.predict(m, ds.features)) for kind, m in models.items()}
    if owa_weights is not None:
        streams["OWA"] = fusion.owa_fuse(owa_weights, streams["ANFIS"], streams["RBF"])
    if kalman_cfg is not None:
        order = np.argsort(ds.hours, kind="stable")
        fused = np.empty(len(ds))
        fused[order] = fusion.sequential_kalman_fuse(streams["ANFIS"][order], streams["RBF"][order], kalman_cfg)
        streams["KALMAN"] = fused
    test, train_mask = ds.test_mask, ds.train_mask
    reports = [metrics.MethodReport.evaluate(name, s[test], ds.targets[test]) for name, s in streams.items()]
    train_reports = {name: metrics.MethodReport.evaluate(name, s[train_mask], ds.targets[train_mask])
                     for name, s in streams.items()}
    return Evaluation(metrics.rank_methods(reports), train_reports, streams)


@dataclass
class RunResult:
    config: RunConfig
    dataset: Dataset
    models: dict[str, EstimatorModel]
    owa: fusion.GaResult
    kalman: KalmanConfig
    evaluation: Evaluation


def run_all(cfg: RunConfig, on_stage=None) -> RunResult:
    """Every stage in one call. ``on_stage(name)`` is called as each stage starts."""
    notify = on_stage or (lambda name: None)
    notify("synthesize")
    ds = synthesize(cfg)
    models = {}
    for kind in estimators.KINDS:
        notify(f"train {kind}")
        models[kind] = train(kind, ds, cfg)
    notify("fuse OWA")
    owa = fit_owa(ds, models["ANFIS"], models["RBF"], cfg)
    notify("fuse KALMAN")
    kalman = fit_kalman(ds, models["ANFIS"], models["RBF"], cfg)
    notify("evaluate")
    evaluation = evaluate(ds, models, owa.weights, kalman)
    return RunResult(cfg, ds, models, owa, kalman, evaluation)


# ---------------------------------------------------------------------------
# artifacts


def report_document(cfg: RunConfig, ds: Dataset, evaluation: Evaluation,
                    owa: fusion.GaResult | None, kalman: KalmanConfig | None) -> dict:
    doc = {
        "manifest": manifest(cfg, rows=len(ds)),
        "split": {"train_rows": int(ds.train_mask.sum()), "test_rows": int(ds.test_mask.sum())},
        "methods": metrics.table_json(evaluation.ranked),
        "train_metrics": {name: {"mse": r.mse, "r2": r.r2} for name, r in sorted(evaluation.train_reports.items())},
    }
    if owa is not None:
        doc["owa_weights"] = {"c1": owa.weights.c1, "c2": owa.weights.c2}
        doc["owa_train_objective"] = owa.objective
    if kalman is not None:
        doc["kalman_config"] = dataclasses.asdict(kalman)
    return doc


def dumps_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def comparison_rows(ds: Dataset, evaluation: Evaluation):
    """Test-split rows of ``hour,target,anfis,rbf,owa,kalman`` in time order."""
    idx = np.flatnonzero(ds.test_mask)
    idx = idx[np.argsort(ds.hours[idx], kind="stable")]
    cols = ["ANFIS", "RBF", "OWA", "KALMAN"]
    for i in idx:
        yield [ds.hours[i], ds.targets[i]] + [evaluation.streams[c][i] if c in evaluation.streams else float("nan")
                                              for c in cols]


def fig5_rows(ds: Dataset, evaluation: Evaluation, samples: int = FIG5_SAMPLES):
    """First ``samples`` test hours: actual, Kalman-fused value and their difference."""
    for row in list(comparison_rows(ds, evaluation))[:samples]:
        hour, actual, fused = row[0], row[1], row[5]
        yield [hour, actual, fused, actual - fused]


def kalman_from_dict(d: dict) -> KalmanConfig:
    return KalmanConfig(**{f.name: float(d[f.name]) for f in dataclasses.fields(KalmanConfig)})
