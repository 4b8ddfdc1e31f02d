"""End-to-end orchestration: frames to HOG to PCA to reservoir to score.

A pipeline run materializes one artifact per stage under its output
directory.  Artifact names are content-addressed: each stage's file name
carries a short digest of everything that influences its bytes (manifest
content hash, upstream digests, stage parameters), so reruns and grid
trials reuse whatever already matches and never reuse anything stale.
With the default "reuse" cache policy a warm rerun reproduces the cold
run's result files bit for bit; "rebuild" recomputes every stage.

Every numeric handoff between stages round-trips through a float32 cache
file, and downstream stages consume the file's values rather than the
in-memory originals; this is what makes warm and cold runs byte-identical.

Stage failures surface as :class:`PipelineStageError` naming the stage and
carrying the root cause.
"""

import contextlib
import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .cache import CacheWriter, read_cache, read_cache_header
from .hog import DEFAULT_CONFIG, HogConfig, descriptor_layout, feature_count, hog_descriptor
from .classify import (
    classify_stream,
    confusion,
    score_line,
    write_confusion,
    write_sequence_results,
)
from .dataset import Split, index_frames, load_manifest, stream_frames
from .errors import PhotonRcError, PipelineStageError, SchemaError
from .pca import fit_pca, load_pca_model, save_pca_model, transform
from .readout import (
    TRANSFORM_NONLINEAR_PHASE,
    TRANSFORM_RAW,
    apply_readout,
    encode_targets,
    load_readout_model,
    nmse_per_output,
    save_readout_model,
    train_ridge,
)
from .reservoir import (
    PRNG_FAMILY,
    HyperParams,
    ReservoirSpec,
    run_reservoir,
    save_reservoir_spec,
)

PIPELINE_FILE = "pipeline.json"
CONFIG_FILE = "config.json"

STAGES = ("dataset", "hog", "pca", "reservoir", "train", "evaluate")


def derive_stream_seed(global_seed, label):
    """Per-stage seed: one global seed fans out through fixed stream labels."""
    digest = hashlib.sha256(f"{label}:{int(global_seed)}".encode("ascii")).digest()
    return int.from_bytes(digest[:8], "little") >> 1  # keep it a positive int64


def _digest(payload):
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:12]


def file_sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass(frozen=True)
class PipelineConfig:
    manifest_path: str
    out_dir: str
    hog_config: HogConfig = DEFAULT_CONFIG
    pca_components: int = 2000
    n_nodes: int = 1024
    variant: str = "intensity"
    params: HyperParams = field(
        default_factory=lambda: HyperParams(
            feedback_gain=0.8, input_gain=0.01, coupling_gain=0.1, coupling_density=0.01
        )
    )
    ridge_lambda: float | None = None  # None picks the scale-adaptive default
    seed: int = 0
    cache_policy: str = "reuse"  # "reuse" | "rebuild"
    # sequences are concatenated into one stream; resetting at sequence
    # starts is an ablation, not the default
    reset_per_sequence: bool = False
    pca_fit_on: str = "train"  # "train" | "all"

    def __post_init__(self):
        if self.cache_policy not in ("reuse", "rebuild"):
            raise ValueError(f"unknown cache policy {self.cache_policy!r}")
        if self.pca_fit_on not in ("train", "all"):
            raise ValueError(f"pca_fit_on must be 'train' or 'all', got {self.pca_fit_on!r}")

    def as_dict(self):
        return {
            "manifest_path": self.manifest_path,
            "out_dir": self.out_dir,
            "hog": {
                "cell_size": self.hog_config.cell_size,
                "block_size": self.hog_config.block_size,
                "num_bins": self.hog_config.num_bins,
                "block_stride": self.hog_config.block_stride,
                "normalization_epsilon": self.hog_config.normalization_epsilon,
            },
            "pca_components": self.pca_components,
            "n_nodes": self.n_nodes,
            "variant": self.variant,
            "hyperparameters": self.params.as_dict(),
            "ridge_lambda": self.ridge_lambda,
            "seed": self.seed,
            "cache_policy": self.cache_policy,
            "reset_per_sequence": self.reset_per_sequence,
            "pca_fit_on": self.pca_fit_on,
            "prng_family": PRNG_FAMILY,
        }


@dataclass(frozen=True)
class PipelineReport:
    score: float
    confusion_matrix: object
    nmse_per_class: np.ndarray
    resolved_lambda: float
    artifacts: dict
    digests: dict
    out_dir: str


@contextlib.contextmanager
def _stage(name):
    try:
        yield
    except PipelineStageError:
        raise
    except (PhotonRcError, OSError, OverflowError, ValueError) as exc:
        raise PipelineStageError(name, exc) from exc


def _cache_is_valid(path, expected_rows, expected_dim):
    if not os.path.isfile(path):
        return False
    try:
        rows, dim, _ = read_cache_header(path)
    except PhotonRcError:
        return False
    return rows == expected_rows and dim == expected_dim


def feature_transform_for(variant):
    """Phase-variant states are read through the intensity response."""
    return TRANSFORM_NONLINEAR_PHASE if variant == "phase" else TRANSFORM_RAW


def run_pipeline(config):
    """Execute every stage; returns a :class:`PipelineReport`."""
    out_dir = config.out_dir
    os.makedirs(out_dir, exist_ok=True)
    reuse = config.cache_policy == "reuse"
    artifacts = {}
    digests = {}

    with _stage("dataset"):
        manifest = load_manifest(config.manifest_path)
        if not manifest.sequences:
            raise SchemaError(f"{config.manifest_path}: manifest lists no sequences")
        index = index_frames(manifest)
        manifest_hash = file_sha256(config.manifest_path)
        n_frames = index.total_frames
        feature_dim = feature_count(manifest.resolution, config.hog_config)

    with open(os.path.join(out_dir, CONFIG_FILE), "w", encoding="utf-8") as fh:
        json.dump(config.as_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")

    with _stage("hog"):
        hog_digest = _digest(
            {"stage": "hog", "manifest": manifest_hash, "config": config.as_dict()["hog"]}
        )
        hog_name = f"hog_{hog_digest}.rcf"
        hog_path = os.path.join(out_dir, hog_name)
        if not (reuse and _cache_is_valid(hog_path, n_frames, feature_dim)):
            layout = descriptor_layout(manifest.resolution, config.hog_config)
            with CacheWriter(hog_path, feature_dim, layout=layout) as writer:
                for frame in stream_frames(manifest):
                    values, _ = hog_descriptor(frame.pixels, config.hog_config)
                    writer.append(values)
        hog_values, hog_layout = read_cache(hog_path)
        artifacts["hog"] = hog_name
        digests["hog"] = hog_digest

    with _stage("pca"):
        pca_digest = _digest(
            {
                "stage": "pca",
                "upstream": hog_digest,
                "components": config.pca_components,
                "fit_on": config.pca_fit_on,
            }
        )
        model_name = f"pca_{pca_digest}.bin"
        proj_name = f"features_{pca_digest}.rcf"
        model_path = os.path.join(out_dir, model_name)
        proj_path = os.path.join(out_dir, proj_name)
        have_model = reuse and os.path.isfile(model_path)
        if not (have_model and _cache_is_valid(proj_path, n_frames, config.pca_components)):
            if config.pca_fit_on == "train":
                fit_rows = index.rows_for(Split.TRAIN)
            else:
                fit_rows = np.arange(n_frames)
            pca_model = fit_pca(hog_values[fit_rows], config.pca_components)
            save_pca_model(pca_model, model_path)
            pca_model = load_pca_model(model_path)
            projected = transform(pca_model, hog_values)
            with CacheWriter(proj_path, config.pca_components) as writer:
                writer.append(projected)
        proj_values, _ = read_cache(proj_path)
        artifacts["pca_model"] = model_name
        artifacts["features"] = proj_name
        digests["pca"] = pca_digest

    with _stage("reservoir"):
        reservoir_seed = derive_stream_seed(config.seed, "reservoir")
        res_digest = _digest(
            {
                "stage": "reservoir",
                "upstream": pca_digest,
                "n_nodes": config.n_nodes,
                "variant": config.variant,
                "hyperparameters": config.params.as_dict(),
                "seed": reservoir_seed,
                "reset_per_sequence": config.reset_per_sequence,
            }
        )
        spec = ReservoirSpec(
            n_nodes=config.n_nodes,
            input_dim=config.pca_components,
            variant=config.variant,
            params=config.params,
            seed=reservoir_seed,
        )
        spec_name = f"reservoir_{res_digest}.json"
        states_name = f"states_{res_digest}.rcf"
        states_path = os.path.join(out_dir, states_name)
        save_reservoir_spec(spec, os.path.join(out_dir, spec_name))
        if not (reuse and _cache_is_valid(states_path, n_frames, config.n_nodes)):
            matrices = spec.build()
            spans = None
            if config.reset_per_sequence:
                spans = [(start, stop) for _, start, stop, _ in index.spans_for()]
            states = run_reservoir(
                matrices, proj_values, variant=config.variant, spans=spans
            )
            with CacheWriter(states_path, config.n_nodes) as writer:
                writer.append(states)
        state_values, _ = read_cache(states_path)
        artifacts["reservoir_spec"] = spec_name
        artifacts["states"] = states_name
        digests["reservoir"] = res_digest

    with _stage("train"):
        train_digest = _digest(
            {
                "stage": "train",
                "upstream": res_digest,
                "ridge_lambda": config.ridge_lambda,
            }
        )
        readout_name = f"readout_{train_digest}.bin"
        readout_path = os.path.join(out_dir, readout_name)
        encoding = encode_targets(index.frame_actions())
        train_rows = index.rows_for(Split.TRAIN)
        if train_rows.size == 0:
            raise SchemaError("manifest has no train-split sequences")
        if not (reuse and os.path.isfile(readout_path)):
            model = train_ridge(
                state_values[train_rows],
                encoding.targets[train_rows],
                ridge_lambda=config.ridge_lambda,
                feature_transform=feature_transform_for(config.variant),
            )
            save_readout_model(model, readout_path)
        model = load_readout_model(readout_path)
        artifacts["readout_model"] = readout_name
        digests["train"] = train_digest

    with _stage("evaluate"):
        outputs = apply_readout(model, state_values)
        test_spans = index.spans_for(Split.TEST)
        if not test_spans:
            raise SchemaError("manifest has no test-split sequences")
        decisions, truths = classify_stream(outputs, test_spans)
        matrix = confusion(decisions, truths)
        test_rows = index.rows_for(Split.TEST)
        per_class = nmse_per_output(
            outputs[test_rows], encoding.targets[test_rows]
        )
        write_sequence_results(os.path.join(out_dir, "sequence_results.csv"), decisions, truths)
        write_confusion(os.path.join(out_dir, "confusion.csv"), matrix)
        with open(os.path.join(out_dir, "score.txt"), "w", encoding="utf-8") as fh:
            fh.write(score_line(matrix) + "\n")
        artifacts["sequence_results"] = "sequence_results.csv"
        artifacts["confusion"] = "confusion.csv"
        artifacts["score"] = "score.txt"

    report = PipelineReport(
        score=matrix.score,
        confusion_matrix=matrix,
        nmse_per_class=per_class,
        resolved_lambda=model.ridge_lambda,
        artifacts=artifacts,
        digests=digests,
        out_dir=out_dir,
    )
    summary = {
        "stages": list(STAGES),
        "artifacts": artifacts,
        "digests": digests,
        "dimensions": {
            "frames": n_frames,
            "hog_features": feature_dim,
            "hog_layout": list(hog_layout),
            "pca_components": config.pca_components,
            "n_nodes": config.n_nodes,
        },
        "resolved_lambda": model.ridge_lambda,
        "score": matrix.score,
        "populated_classes": matrix.populated_rows,
    }
    with open(os.path.join(out_dir, PIPELINE_FILE), "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return report


def describe_artifacts(out_dir):
    """Human-readable summary of a pipeline (or grid-search) directory."""
    from .errors import NotAPipelineDirError, ParseError

    summary_path = os.path.join(out_dir, PIPELINE_FILE)
    grid_log = os.path.join(out_dir, "grid_log.csv")
    if not os.path.isfile(summary_path):
        if os.path.isfile(grid_log):
            with open(grid_log, "r", encoding="utf-8") as fh:
                trials = max(0, sum(1 for _ in fh) - 1)
            return f"grid-search directory: {trials} trials logged in grid_log.csv"
        raise NotAPipelineDirError(f"{out_dir}: no {PIPELINE_FILE} found")
    with open(summary_path, "r", encoding="utf-8") as fh:
        summary = json.load(fh)

    lines = [f"pipeline run in {out_dir}"]
    dims = summary.get("dimensions", {})
    lines.append(
        "  dimensions: {frames} frames, {hog} HOG features, "
        "{k} components, {n} nodes".format(
            frames=dims.get("frames", "?"),
            hog=dims.get("hog_features", "?"),
            k=dims.get("pca_components", "?"),
            n=dims.get("n_nodes", "?"),
        )
    )
    lines.append(f"  stages: {', '.join(summary.get('stages', []))}")
    for name, filename in sorted(summary.get("artifacts", {}).items()):
        path = os.path.join(out_dir, filename)
        note = "missing"
        if os.path.isfile(path):
            note = f"{os.path.getsize(path)} bytes"
            if filename.endswith(".rcf"):
                try:
                    rows, dim, _ = read_cache_header(path)
                    note += f", {rows} x {dim}"
                except ParseError as exc:
                    note += f", INTEGRITY WARNING: {exc}"
        lines.append(f"  {name}: {filename} ({note})")
    for stage, digest in sorted(summary.get("digests", {}).items()):
        lines.append(f"  digest[{stage}] = {digest}")
    if "score" in summary:
        lines.append(
            f"  score: {summary['score']:.6g} "
            f"({summary.get('populated_classes', '?')} classes populated)"
        )
    if os.path.isfile(grid_log):
        with open(grid_log, "r", encoding="utf-8") as fh:
            trials = max(0, sum(1 for _ in fh) - 1)
        lines.append(f"  grid search: {trials} trials logged")
    return "\n".join(lines)
