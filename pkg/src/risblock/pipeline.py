"""End-to-end experiment: split, per-scenario feature masking, the two-stage
cascade predictor, and the four-scenario evaluation.

The four scenarios differ only in which features reach the classifier:

    none    direct-link rate only (image block zeroed)
    camera  pooled image only (rate column zeroed)
    ris     surface-assisted rate only (image block zeroed)
    both    image + surface-assisted rate, predicted by the two-stage cascade

The first three train the perceptron on masked features. "both" instead runs
the cascade: stage 1 declares the link clear when the camera sees the
terminal (any channel-2 evidence); stage 2 separates absent from blocked by
thresholding the surface-assisted rate, with the threshold calibrated on the
training split. A perceptron is still trained on the full features so the
scenario has a learning curve to report next to the others.

Feature standardization is fit on the training split only and stored with
each model; images enter as 16x16x3 average-pooled blocks, flattened.
"""

import json
import time
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np

from risblock import learn
from risblock.dataset import generate_dataset, load_dataset, save_dataset
from risblock.learn import (MlpParams, Standardization, TrainConfig,
                            fit_standardization, label_to_index)
from risblock.scene import LinkStatus

SPLIT_STREAM_TAG = 202
TRAIN_STREAM_TAG = 303

POOLED_HW = (16, 16)

# Training recipe used by experiments. The schedule shape comes from
# TrainConfig; the base rate is raised because this small network is trained
# from scratch on standardized features, where the fine-tuning rate of the
# default config is too timid to move the weights within 10 epochs.
EXPERIMENT_TRAIN_CONFIG = TrainConfig(learning_rate=0.2)


class Scenario(Enum):
    """Which side information the predictor may consume."""

    NONE = "none"
    CAMERA_ONLY = "camera"
    RIS_ONLY = "ris"
    BOTH = "both"


def pool_image(image, pooled_hw=POOLED_HW):
    """Average-pool an (H, W, C) image to (h, w, C); H, W must divide evenly."""
    image = np.asarray(image, dtype=np.float64)
    h, w = pooled_hw
    height, width, channels = image.shape
    if height % h or width % w:
        raise ValueError(f"image {image.shape} not divisible into {pooled_hw}")
    return image.reshape(h, height // h, w, width // w, channels).mean(axis=(1, 3))


def pooled_feature_count(image_dims, pooled_hw=POOLED_HW):
    return pooled_hw[0] * pooled_hw[1] * image_dims[2]


def build_features(samples, scenario, pooled_hw=POOLED_HW):
    """Masked raw feature matrix (N, d_img + 1) for a scenario.

    The image block is pooled and flattened, or zeroed when the scenario has
    no camera; the final column is the scenario's rate feature (direct for
    "none", surface-assisted for "ris"/"both", zero for "camera").
    """
    n = len(samples)
    if n == 0:
        raise ValueError("samples must be non-empty")
    d_img = pooled_feature_count(samples[0].image.shape, pooled_hw)
    if scenario in (Scenario.CAMERA_ONLY, Scenario.BOTH):
        image_block = np.stack([pool_image(s.image, pooled_hw).ravel()
                                for s in samples])
    else:
        image_block = np.zeros((n, d_img))
    if scenario is Scenario.NONE:
        rates = np.array([s.direct_rate for s in samples])
    elif scenario is Scenario.CAMERA_ONLY:
        rates = np.zeros(n)
    else:
        rates = np.array([s.ris_rate for s in samples])
    return np.concatenate([image_block, rates[:, None]], axis=1)


def labels_of(samples):
    return np.array([int(s.label) for s in samples])


def split_dataset(samples, train_fraction=0.7, seed=0):
    """Seeded shuffle, then cut: floor(fraction * n) train, the rest test."""
    n = len(samples)
    if n < 2:
        raise ValueError("need at least 2 samples to split")
    if not 0 < train_fraction < 1:
        raise ValueError("train_fraction must lie in (0, 1)")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed),
                                                        SPLIT_STREAM_TAG]))
    order = rng.permutation(n)
    n_train = min(max(int(train_fraction * n), 1), n - 1)
    train = [samples[i] for i in order[:n_train]]
    test = [samples[i] for i in order[n_train:]]
    return train, test


def calibrate_rate_threshold(ris_rates, labels):
    """Best rate cut separating absent (-1) from blocked (+1) training rows.

    Scans the sorted unique rates and their midpoints; predicts blocked when
    rate >= threshold. Returns (threshold, training_accuracy), taking the
    lowest candidate on ties.
    """
    rates = np.asarray(ris_rates, dtype=np.float64)
    labels = np.asarray(labels)
    if rates.shape != labels.shape or rates.ndim != 1:
        raise ValueError("ris_rates and labels must be congruent 1-D arrays")
    present = set(np.unique(labels).tolist())
    if present != {-1, 1}:
        raise ValueError(
            f"need both absent (-1) and blocked (1) rows, got labels {sorted(present)}")
    uniques = np.unique(rates)
    candidates = list(uniques) + [(a + b) / 2.0
                                  for a, b in zip(uniques[:-1], uniques[1:])]
    candidates = sorted(candidates)
    is_blocked = labels == 1
    best_threshold, best_accuracy = None, -1.0
    for threshold in candidates:
        accuracy = float(np.mean((rates >= threshold) == is_blocked))
        if accuracy > best_accuracy:
            best_threshold, best_accuracy = float(threshold), accuracy
    return best_threshold, best_accuracy


def detect_visible_ue(image):
    """Default camera-stage rule: any channel-2 pixel above 0.5."""
    return bool(np.any(np.asarray(image)[:, :, 2] > 0.5))


def cascade_predict(sample, camera_model, rate_threshold):
    """Two-stage prediction: camera first, then the rate cut.

    camera_model may be None (the channel-2 pixel rule), a callable
    image -> bool, or an (MlpParams, Standardization) pair whose argmax on
    (pooled image, rate 0) declares visibility. Stage 2 maps rate >=
    threshold to blocked, below to absent.
    """
    if camera_model is None:
        visible = detect_visible_ue(sample.image)
    elif callable(camera_model):
        visible = bool(camera_model(sample.image))
    else:
        params, stats = camera_model
        row = np.concatenate([pool_image(sample.image).ravel(), [0.0]])
        std_row = stats.apply(row[None, :])[0]
        probs = learn.forward(params, std_row[:-1], std_row[-1])
        visible = learn.argmax_index(probs) == label_to_index(LinkStatus.UNBLOCKED)
    if visible:
        return LinkStatus.UNBLOCKED
    if sample.ris_rate >= rate_threshold:
        return LinkStatus.BLOCKED
    return LinkStatus.ABSENT


@dataclass(frozen=True)
class ScenarioModel:
    """Everything one scenario needs at prediction time."""

    scenario: Scenario
    params: MlpParams
    standardization: Standardization
    history: tuple
    rate_threshold: float = None
    threshold_accuracy: float = None
    train_time_s: float = 0.0


@dataclass(frozen=True)
class EvalReport:
    """Test-set outcome of one scenario."""

    scenario: Scenario
    accuracy: float
    confusion: np.ndarray  # (3, 3) counts, rows true / cols predicted
    curve: tuple  # (iteration, train_accuracy) pairs
    wall_time_s: float


def train_scenario(train_samples, scenario, train_cfg):
    """Fit one scenario: standardization, perceptron, and (for the cascade)
    the absent-vs-blocked rate threshold."""
    started = time.perf_counter()
    raw = build_features(train_samples, scenario)
    stats = fit_standardization(raw)
    features = stats.apply(raw)
    labels = labels_of(train_samples)
    params, history = learn.train(features, labels, train_cfg)

    rate_threshold = None
    threshold_accuracy = None
    if scenario is Scenario.BOTH:
        keep = labels != int(LinkStatus.UNBLOCKED)
        rates = np.array([s.ris_rate for s in train_samples])[keep]
        rate_threshold, threshold_accuracy = calibrate_rate_threshold(
            rates, labels[keep])
    return ScenarioModel(scenario=scenario, params=params,
                         standardization=stats, history=tuple(history),
                         rate_threshold=rate_threshold,
                         threshold_accuracy=threshold_accuracy,
                         train_time_s=time.perf_counter() - started)


def predict_scenario(samples, model):
    """Predicted labels ({-1, 0, 1}) for a batch of samples."""
    if model.scenario is Scenario.BOTH:
        return np.array([int(cascade_predict(s, None, model.rate_threshold))
                         for s in samples])
    raw = build_features(samples, model.scenario)
    features = model.standardization.apply(raw)
    probs, _, _ = learn._forward_batch(model.params, features)
    indices = np.argmax(probs, axis=1)
    return np.array([learn.index_to_label(int(i)) for i in indices])


def evaluate_scenario(test_samples, scenario, model):
    """Accuracy, confusion matrix, and curve for one scenario's test run."""
    if len(test_samples) == 0:
        raise ValueError("test set must be non-empty")
    if model.scenario is not scenario:
        raise ValueError(f"model was trained for {model.scenario}, not {scenario}")
    started = time.perf_counter()
    predicted = predict_scenario(test_samples, model)
    true = labels_of(test_samples)
    confusion = np.zeros((3, 3), dtype=np.int64)
    for t, p in zip(true, predicted):
        confusion[label_to_index(t), label_to_index(p)] += 1
    accuracy = float(np.trace(confusion) / confusion.sum())
    curve = tuple((it, acc) for it, _, _, _, acc in model.history)
    elapsed = time.perf_counter() - started
    return EvalReport(scenario=scenario, accuracy=accuracy, confusion=confusion,
                      curve=curve, wall_time_s=model.train_time_s + elapsed)


def _mixed_seed(seed, tag, index):
    ss = np.random.SeedSequence([int(seed), tag, int(index)])
    return int(ss.generate_state(1, np.uint64)[0])


CLASS_NAMES = ("absent", "unblocked", "blocked")


def report_to_dict(report, model):
    # wall_time_s deliberately left out: report files are byte-reproducible
    # for a fixed seed, timings go to timings.json instead
    return {
        "scenario": report.scenario.value,
        "accuracy": report.accuracy,
        "confusion": report.confusion.tolist(),
        "class_order": list(CLASS_NAMES),
        "n_test": int(report.confusion.sum()),
        "rate_threshold": model.rate_threshold,
        "threshold_accuracy": model.threshold_accuracy,
    }


def write_report_files(out_dir, report, model):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    name = report.scenario.value
    (out_dir / f"report_{name}.json").write_text(
        json.dumps(report_to_dict(report, model), sort_keys=True, indent=2) + "\n",
        encoding="ascii")
    curve_lines = ["iteration,accuracy"]
    curve_lines += [f"{it},{repr(float(acc))}" for it, acc in report.curve]
    (out_dir / f"curve_{name}.csv").write_text("\n".join(curve_lines) + "\n",
                                               encoding="ascii")
    rows = ["true\\predicted," + ",".join(CLASS_NAMES)]
    for i, cls in enumerate(CLASS_NAMES):
        rows.append(cls + "," + ",".join(str(int(v))
                                         for v in report.confusion[i]))
    (out_dir / f"confusion_{name}.csv").write_text("\n".join(rows) + "\n",
                                                   encoding="ascii")


def run_experiment(gen_cfg, train_cfg, seed, out_dir, dataset_dir=None,
                   n_samples=None):
    """Generate (or load) a dataset, train all four scenarios, evaluate, and
    write reports, curves, confusions, and an experiment manifest.

    Returns {scenario: (model, report)}. Fully deterministic for a fixed
    seed: per-sample streams, the split, and each scenario's training seed
    are all derived from it.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset_dir = Path(dataset_dir) if dataset_dir is not None else out_dir / "dataset"

    if (dataset_dir / "manifest.json").exists():
        samples, manifest = load_dataset(dataset_dir)
    else:
        samples, manifest = generate_dataset(gen_cfg, seed, n_samples)
        save_dataset(dataset_dir, samples, manifest)

    train_samples, test_samples = split_dataset(
        samples, train_fraction=train_cfg.train_fraction, seed=seed)

    results = {}
    summary = {}
    timings = {}
    for k, scenario in enumerate(Scenario):
        cfg_k = replace(train_cfg, seed=_mixed_seed(seed, TRAIN_STREAM_TAG, k))
        model = train_scenario(train_samples, scenario, cfg_k)
        report = evaluate_scenario(test_samples, scenario, model)
        write_report_files(out_dir, report, model)
        results[scenario] = (model, report)
        summary[scenario.value] = report.accuracy
        timings[scenario.value] = report.wall_time_s
    (out_dir / "timings.json").write_text(
        json.dumps(timings, sort_keys=True, indent=2) + "\n", encoding="ascii")

    experiment_manifest = {
        "seed": int(seed),
        "dataset_hash": manifest["content_hash"],
        "n_samples": manifest["n_samples"],
        "n_train": len(train_samples),
        "n_test": len(test_samples),
        "train_config": {
            "batch_size": train_cfg.batch_size,
            "learning_rate": train_cfg.learning_rate,
            "weight_decay": train_cfg.weight_decay,
            "schedule_epochs": list(train_cfg.schedule_epochs),
            "lr_reduction_factor": train_cfg.lr_reduction_factor,
            "epochs": train_cfg.epochs,
            "train_fraction": train_cfg.train_fraction,
        },
        "generator_config": manifest["config"],
        "accuracies": summary,
    }
    (out_dir / "experiment_manifest.json").write_text(
        json.dumps(experiment_manifest, sort_keys=True, indent=2) + "\n",
        encoding="ascii")
    return results
