"""Command line front end: train, eval, oneshot, theory, previews, manifests.

One experiment is described by a single JSON config document.  Every
subcommand that touches data takes ``--config``; unknown or ill-typed
fields are rejected with the offending field path.  Outputs under
``--out-dir`` are deterministic functions of the effective config, so a
rerun with the same config and seeds reproduces every artifact
byte for byte (no timestamps, no host names, sorted JSON keys).

Exit codes:

* 0 success
* 1 unexpected internal failure
* 2 missing input (config file, manifest, dataset file)
* 3 invalid config or malformed data format
* 4 saved params do not match the requested model spec
* 5 episode spec infeasible (n_way exceeds probe classes, too few samples)
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import corruptions as C
from . import datasets as D
from . import metrics as T
from . import models as M
from . import optim as O
from . import pairs as P
from . import synth as S
from . import theory as TH
from .errors import ConsistencyError, ContractError, FormatError


class ConfigError(ValueError):
    """Invalid config document; the message starts with the field path."""


class ParamsMismatchError(ValueError):
    """Saved params do not fit the model spec the config asks for."""


# ---------------------------------------------------------------- config --

DEFAULTS = {
    "experiment": "experiment",
    "dataset": {
        "kind": "synthetic",          # synthetic | manifest
        "manifest": None,             # path, resolved relative to the config file
        "train_split": "train",
        "probe_split": "probe",
        "classes": None,              # optional label whitelist, reindexed 0..k-1
        "target_hw": [100, 100],      # resize target for pgm-tree manifests
        "synthetic": {
            "source": "digits",       # digits | glyphs
            "digits": [4, 9],
            "n_classes": 10,          # glyphs only
            "n_per_class": 200,
            "probe_n_per_class": 100,
            "seed": 101,
            "probe_seed": 202,
            "size": 28,
            "style": "plain",         # plain | varied
        },
    },
    "model": {
        "kind": "mlp",                # mlp | cnn
        "arch": "pair",               # pair | siamese
        "output": None,               # default: signed_distance (mlp), probability (cnn)
    },
    "train": {
        "epochs": 10,
        "pairs_per_epoch": 1024,
        "batch_size": 32,
        "lr": 0.001,
        "seed": 0,
        "balance": 0.5,
        "swap_augment": False,
    },
    "eval": {
        "corruptions": ["raw", "flipped"],
        "runs": 10,
        "n_pairs": 2000,
        "threshold": 0.5,
        "seed": 0,
    },
    "oneshot": {
        "n_way": 5,
        "trials": 400,
        "queries_per_class": 1,
        "seed": 0,
    },
    "theory": {
        "a": 3.0,
        "sigma1": 0.75,
        "sigma_b": 0.25,
        "bg_shift": 5.0,
        "swap_b_means": False,
        "n_train": 4000,
        "n_test": 4000,
        "seed": 0,
    },
}


def _merge(defaults, user, path=""):
    """Deep-merge ``user`` over ``defaults``, rejecting unknown fields."""
    out = copy.deepcopy(defaults)
    for key, value in user.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"{where}: unknown field")
        if isinstance(defaults[key], dict) and defaults[key]:
            if not isinstance(value, dict):
                raise ConfigError(f"{where}: expected an object")
            out[key] = _merge(defaults[key], value, where)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _want(cfg, path, kinds, label):
    node = cfg
    for part in path.split("."):
        node = node[part]
    if kinds is bool:
        ok = isinstance(node, bool)
    elif kinds is int:
        ok = isinstance(node, int) and not isinstance(node, bool)
    elif kinds is float:
        ok = isinstance(node, (int, float)) and not isinstance(node, bool)
    else:
        ok = isinstance(node, kinds)
    if not ok:
        raise ConfigError(f"{path}: expected {label}")
    return node


def _want_int(cfg, path, lo=None):
    value = _want(cfg, path, int, "an integer")
    if lo is not None and value < lo:
        raise ConfigError(f"{path}: must be >= {lo}")
    return value


def _want_pos_float(cfg, path):
    value = _want(cfg, path, float, "a number")
    if not value > 0:
        raise ConfigError(f"{path}: must be > 0")
    return float(value)


def _want_choice(cfg, path, choices):
    value = _want(cfg, path, str, "a string")
    if value not in choices:
        raise ConfigError(f"{path}: must be one of {sorted(choices)}")
    return value


def _check_corruption_names(names, path):
    if not isinstance(names, list) or not names:
        raise ConfigError(f"{path}: expected a non-empty list of corruption names")
    for i, name in enumerate(names):
        if not isinstance(name, str):
            raise ConfigError(f"{path}[{i}]: expected a string")
        try:
            C.apply_corruption(np.zeros((1, 4, 4)), name, np.random.default_rng(0))
        except ContractError:
            raise ConfigError(f"{path}[{i}]: unknown corruption {name!r}") from None


def validate_config(cfg):
    """Type- and range-check a merged config; raises ConfigError."""
    experiment = _want(cfg, "experiment", str, "a string")
    if not experiment:
        raise ConfigError("experiment: must be a non-empty string")

    kind = _want_choice(cfg, "dataset.kind", {"synthetic", "manifest"})
    if kind == "manifest" and not isinstance(cfg["dataset"]["manifest"], str):
        raise ConfigError("dataset.manifest: required when dataset.kind is 'manifest'")
    classes = cfg["dataset"]["classes"]
    if classes is not None:
        if not isinstance(classes, list) or len(classes) < 2 or not all(
            isinstance(c, int) and not isinstance(c, bool) for c in classes
        ):
            raise ConfigError("dataset.classes: expected a list of at least two integer labels")
    hw = cfg["dataset"]["target_hw"]
    if not (isinstance(hw, list) and len(hw) == 2 and all(
        isinstance(v, int) and not isinstance(v, bool) and v >= 1 for v in hw
    )):
        raise ConfigError("dataset.target_hw: expected [height, width] of positive integers")
    source = _want_choice(cfg, "dataset.synthetic.source", {"digits", "glyphs"})
    digits = cfg["dataset"]["synthetic"]["digits"]
    if kind == "synthetic" and source == "digits":
        if not isinstance(digits, list) or len(digits) < 2 or not all(
            isinstance(d, int) and not isinstance(d, bool) and 0 <= d <= 9 for d in digits
        ):
            raise ConfigError("dataset.synthetic.digits: expected a list of at least two digits 0-9")
    _want_int(cfg, "dataset.synthetic.n_classes", lo=2)
    _want_int(cfg, "dataset.synthetic.n_per_class", lo=1)
    _want_int(cfg, "dataset.synthetic.probe_n_per_class", lo=1)
    _want_int(cfg, "dataset.synthetic.seed")
    _want_int(cfg, "dataset.synthetic.probe_seed")
    _want_int(cfg, "dataset.synthetic.size", lo=8)
    _want_choice(cfg, "dataset.synthetic.style", {"plain", "varied"})

    _want_choice(cfg, "model.kind", {"mlp", "cnn"})
    arch = _want_choice(cfg, "model.arch", {"pair", "siamese"})
    if cfg["model"]["output"] is not None:
        _want_choice(cfg, "model.output", {"signed_distance", "probability"})

    _want_int(cfg, "train.epochs", lo=0)
    _want_int(cfg, "train.pairs_per_epoch", lo=1)
    _want_int(cfg, "train.batch_size", lo=1)
    _want_pos_float(cfg, "train.lr")
    _want_int(cfg, "train.seed")
    balance = _want(cfg, "train.balance", float, "a number")
    if not 0.0 < balance < 1.0:
        raise ConfigError("train.balance: must lie strictly between 0 and 1")
    swap = _want(cfg, "train.swap_augment", bool, "a boolean")
    if swap and arch == "siamese":
        raise ConfigError(
            "train.swap_augment: not valid with model.arch 'siamese' "
            "(contrastive targets are 0/1 and carry no pair order)"
        )

    _check_corruption_names(cfg["eval"]["corruptions"], "eval.corruptions")
    _want_int(cfg, "eval.runs", lo=1)
    _want_int(cfg, "eval.n_pairs", lo=1)
    _want(cfg, "eval.threshold", float, "a number")
    _want_int(cfg, "eval.seed")

    _want_int(cfg, "oneshot.n_way", lo=2)
    _want_int(cfg, "oneshot.trials", lo=1)
    _want_int(cfg, "oneshot.queries_per_class", lo=1)
    _want_int(cfg, "oneshot.seed")

    _want(cfg, "theory.a", float, "a number")
    _want_pos_float(cfg, "theory.sigma1")
    _want_pos_float(cfg, "theory.sigma_b")
    _want(cfg, "theory.bg_shift", float, "a number")
    _want(cfg, "theory.swap_b_means", bool, "a boolean")
    _want_int(cfg, "theory.n_train", lo=2)
    _want_int(cfg, "theory.n_test", lo=2)
    _want_int(cfg, "theory.seed")

    if cfg["model"]["output"] is None:
        cfg["model"]["output"] = (
            "signed_distance" if cfg["model"]["kind"] == "mlp" else "probability"
        )
    return cfg


def load_config(path, seed_override=None):
    """Read, merge, and validate a config file; returns the effective config."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"config file {path}")
    try:
        user = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigError(f"<config>: not valid JSON ({e})") from None
    if not isinstance(user, dict):
        raise ConfigError("<config>: top level must be an object")
    cfg = _merge(DEFAULTS, user)
    if seed_override is not None:
        for section in ("train", "eval", "oneshot", "theory"):
            cfg[section]["seed"] = seed_override
        cfg["dataset"]["synthetic"]["seed"] = seed_override
        cfg["dataset"]["synthetic"]["probe_seed"] = seed_override + 1
    return validate_config(cfg)


def config_fingerprint(cfg) -> str:
    """sha256 of the canonical effective-config JSON."""
    text = json.dumps(cfg, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


# ------------------------------------------------------------- data prep --

def _load_split(cfg, which, config_dir):
    ds_cfg = cfg["dataset"]
    if ds_cfg["kind"] == "synthetic":
        s = ds_cfg["synthetic"]
        n = s["n_per_class"] if which == "train" else s["probe_n_per_class"]
        seed = s["seed"] if which == "train" else s["probe_seed"]
        if s["source"] == "digits":
            ds = S.make_digit_dataset(
                s["digits"], n, seed, size=s["size"], split=which, style=s["style"]
            )
        else:
            ds = S.make_glyph_dataset(s["n_classes"], n, seed, size=s["size"], split=which)
    else:
        manifest = Path(ds_cfg["manifest"])
        if not manifest.is_absolute():
            manifest = config_dir / manifest
        if not manifest.exists():
            raise FileNotFoundError(f"manifest {manifest}")
        split = ds_cfg["train_split"] if which == "train" else ds_cfg["probe_split"]
        ds = D.load_from_manifest(manifest, split, target_hw=tuple(ds_cfg["target_hw"]))
    if ds_cfg["classes"] is not None:
        ds = P.filter_classes(ds, ds_cfg["classes"])
    return ds


def _model_spec(cfg, ds):
    flat = int(np.prod(ds.samples.shape[1:]))
    kind, arch, output = cfg["model"]["kind"], cfg["model"]["arch"], cfg["model"]["output"]
    try:
        if kind == "mlp":
            if arch == "pair":
                return M.build_mlp(2 * flat, output=output)
            return M.build_siamese_mlp(flat, output=output)
        if ds.samples.ndim != 3:
            raise ConfigError("model.kind: 'cnn' needs image-shaped samples (N, H, W)")
        hw = ds.samples.shape[1:]
        if arch == "pair":
            return M.build_cnn(2, hw, output=output)
        return M.build_siamese_cnn(hw, output=output)
    except ContractError as e:
        # the dataset shape the config selected cannot carry this model
        raise ConfigError(f"model: {e}") from None


def _make_sampler(cfg, ds):
    return P.make_pair_sampler(
        ds,
        balance=cfg["train"]["balance"],
        swap_augment=cfg["train"]["swap_augment"],
    )


# ------------------------------------------------------------ oracle hook --

def _oracle_probe(probe):
    """Label-stamped constant images plus a scorer that reads them back.

    Each image is a constant plate whose level encodes its label, spaced
    across [0.1, 0.9] so style corruptions treat every pixel as
    foreground and leave the plates unchanged.  The mean-gap scorer is
    then exact on raw and flipped probes, which gives the CLI a known
    AUC/F1 = 1.0 target without touching any trained model.
    """
    k = probe.n_classes()
    gap = 0.8 / max(k - 1, 1)
    levels = 0.1 + gap * np.arange(k)
    shape = probe.samples.shape[1:]
    samples = levels[probe.labels].reshape((-1,) + (1,) * len(shape)) * np.ones(shape)
    oracle = D.LabeledDataset(samples, probe.labels, split=probe.split)

    def scorer(a, b):
        axes = tuple(range(1, a.ndim))
        return np.abs(a.mean(axis=axes) - b.mean(axis=axes))

    return oracle, scorer, 0.4 * gap


# -------------------------------------------------------------- artifacts --

def _write_json(path, payload):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _append_results_csv(path, rows):
    """Append result rows atomically; writes the header on first use."""
    header = "experiment,corruption,metric,mean,std,runs\n"
    body = "".join(
        f"{exp},{corr},{metric},{mean:.3f},{std:.3f},{runs}\n"
        for exp, corr, metric, mean, std, runs in rows
    )
    path.parent.mkdir(parents=True, exist_ok=True)
    fd = os.open(path, os.O_WRONLY | os.O_APPEND | os.O_CREAT, 0o644)
    try:
        payload = body if os.fstat(fd).st_size else header + body
        os.write(fd, payload.encode())
    finally:
        os.close(fd)


def _echo(payload):
    print(json.dumps(payload, sort_keys=True, indent=2))


# ------------------------------------------------------------ subcommands --

def cmd_train(args):
    cfg = load_config(args.config, args.seed)
    out_dir = Path(args.out_dir)
    config_dir = Path(args.config).resolve().parent
    ds = _load_split(cfg, "train", config_dir)
    spec = _model_spec(cfg, ds)
    params = M.init_params(spec, seed=cfg["train"]["seed"])
    sampler = _make_sampler(cfg, ds)

    logs = []
    O.train(
        spec,
        params,
        sampler,
        epochs=cfg["train"]["epochs"],
        pairs_per_epoch=cfg["train"]["pairs_per_epoch"],
        batch_size=cfg["train"]["batch_size"],
        seed=cfg["train"]["seed"],
        optimizer=O.AdamState(lr=cfg["train"]["lr"]),
        on_epoch=logs.append,
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    M.save_params(params, out_dir / "params.bin")
    lines = ["epoch,mean_loss"] + [f"{log.epoch},{log.loss!r}" for log in logs]
    (out_dir / "loss.csv").write_text("\n".join(lines) + "\n")
    payload = {"config": cfg, "config_fingerprint": config_fingerprint(cfg)}
    _write_json(out_dir / "config.json", payload)
    _echo(payload)
    return 0


def _load_matching_params(args, cfg, ds):
    spec = _model_spec(cfg, ds)
    params_path = Path(args.params)
    if not params_path.exists():
        raise FileNotFoundError(f"params file {params_path}")
    params = M.load_params(params_path)
    try:
        M.check_params_match(spec, params)
    except ContractError as e:
        raise ParamsMismatchError(str(e)) from None
    return spec, params


def cmd_eval(args):
    cfg = load_config(args.config, args.seed)
    if args.corruptions:
        cfg["eval"]["corruptions"] = list(args.corruptions)
        _check_corruption_names(cfg["eval"]["corruptions"], "eval.corruptions")
    out_dir = Path(args.out_dir)
    config_dir = Path(args.config).resolve().parent
    probe = _load_split(cfg, "probe", config_dir)
    fingerprint = config_fingerprint(cfg)

    threshold = cfg["eval"]["threshold"]
    if args.oracle:
        probe, scorer, threshold = _oracle_probe(probe)
    else:
        spec, params = _load_matching_params(args, cfg, probe)
        scorer = M.make_scorer(spec, params)

    reports = {}
    rows = []
    for corruption in cfg["eval"]["corruptions"]:
        auc, f1 = T.evaluate_pairs(
            scorer,
            probe,
            corruption,
            n_pairs=cfg["eval"]["n_pairs"],
            runs=cfg["eval"]["runs"],
            threshold=threshold,
            seed=cfg["eval"]["seed"],
            fingerprint=fingerprint,
        )
        reports[corruption] = {"auc": auc.to_dict(), "f1": f1.to_dict()}
        for rep in (auc, f1):
            rows.append(
                (cfg["experiment"], corruption, rep.metric, rep.mean, rep.std, rep.runs)
            )

    payload = {
        "experiment": cfg["experiment"],
        "config_fingerprint": fingerprint,
        "reports": reports,
    }
    _write_json(out_dir / "eval.json", payload)
    _append_results_csv(out_dir / "results.csv", rows)
    _echo(payload)
    return 0


def cmd_oneshot(args):
    cfg = load_config(args.config, args.seed)
    out_dir = Path(args.out_dir)
    config_dir = Path(args.config).resolve().parent
    probe = _load_split(cfg, "probe", config_dir)
    fingerprint = config_fingerprint(cfg)

    n_way = args.n_way if args.n_way is not None else cfg["oneshot"]["n_way"]
    if n_way > probe.n_classes():
        print(
            f"error: n_way {n_way} exceeds the {probe.n_classes()} probe classes",
            file=sys.stderr,
        )
        return 5
    episode = P.EpisodeSpec(
        n_way=n_way, queries_per_class=cfg["oneshot"]["queries_per_class"]
    )

    if args.oracle:
        probe, scorer, _ = _oracle_probe(probe)
    else:
        spec, params = _load_matching_params(args, cfg, probe)
        scorer = M.make_scorer(spec, params)

    try:
        report = T.evaluate_oneshot(
            scorer,
            probe,
            episode,
            trials=cfg["oneshot"]["trials"],
            seed=cfg["oneshot"]["seed"],
            fingerprint=fingerprint,
        )
    except ContractError as e:
        print(f"error: episode spec infeasible: {e}", file=sys.stderr)
        return 5

    payload = {
        "experiment": cfg["experiment"],
        "config_fingerprint": fingerprint,
        "n_way": n_way,
        "accuracy": report.to_dict(),
    }
    _write_json(out_dir / "oneshot.json", payload)
    _append_results_csv(
        out_dir / "results.csv",
        [(cfg["experiment"], "raw", report.metric, report.mean, report.std, report.runs)],
    )
    _echo(payload)
    return 0


def cmd_theory(args):
    cfg = load_config(args.config, args.seed) if args.config else validate_config(
        copy.deepcopy(DEFAULTS)
    )
    if args.seed is not None:
        cfg["theory"]["seed"] = args.seed
    t = cfg["theory"]
    model_a, model_b = TH.default_models(
        a=t["a"],
        sigma1=t["sigma1"],
        sigma_b=t["sigma_b"],
        bg_shift=t["bg_shift"],
        swap_b_means=t["swap_b_means"],
    )
    condition = TH.check_definition3(model_a, model_b)
    rng = np.random.default_rng(t["seed"])
    acc_a, acc_b, angle = TH.hyperplane_transfer(
        model_a,
        model_b,
        n_train=t["n_train"],
        n_test=t["n_test"],
        rng=rng,
        check=False,
    )
    payload = {
        "def3_satisfied": condition.satisfied,
        "acc_on_A": acc_a,
        "acc_on_B": acc_b,
        "normal_angle_deg": angle,
    }
    _write_json(Path(args.out_dir) / "theory.json", payload)
    _echo(payload)
    return 0


def cmd_corrupt_preview(args):
    cfg = load_config(args.config, args.seed)
    out_dir = Path(args.out_dir)
    config_dir = Path(args.config).resolve().parent
    probe = _load_split(cfg, "probe", config_dir)
    if probe.samples.ndim != 3:
        raise ConfigError("dataset: corrupt-preview needs image-shaped samples (N, H, W)")
    names = list(args.corruptions) if args.corruptions else cfg["eval"]["corruptions"]
    _check_corruption_names(names, "eval.corruptions")
    if args.count < 1:
        raise ConfigError("count: must be >= 1")
    count = min(args.count, len(probe))
    seed = cfg["eval"]["seed"]

    written = []
    for idx, name in enumerate(names):
        rng = np.random.default_rng(np.random.SeedSequence([seed, idx]))
        before = probe.samples[:count]
        after = C.apply_corruption(before, name, rng)
        target = out_dir / "preview" / name
        target.mkdir(parents=True, exist_ok=True)
        for i in range(count):
            D.save_pgm(before[i], target / f"sample{i:02d}_before.pgm")
            D.save_pgm(after[i], target / f"sample{i:02d}_after.pgm")
            written.append(str(target / f"sample{i:02d}_after.pgm"))
    _echo({"corruptions": names, "count": count, "files": len(written) * 2})
    return 0


def cmd_validate_manifest(args):
    summary = D.validate_manifest(args.manifest)
    _echo(summary)
    return 0


# ------------------------------------------------------------------ main --

def _parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="path to the experiment config (JSON)")
    common.add_argument("--seed", type=int, help="override every seed in the config")
    common.add_argument("--out-dir", default="out", help="artifact directory (default: out)")
    common.add_argument("--threads", type=int, help="cap BLAS/OpenMP thread pools")

    parser = argparse.ArgumentParser(
        prog="absgen",
        description="train and probe pair-concatenation classifiers",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", parents=[common], help="train a model from a config")
    p.set_defaults(func=cmd_train, needs_config=True)

    p = sub.add_parser("eval", parents=[common], help="score a trained model on corrupted probes")
    p.add_argument("--params", help="trained params file (from absgen train)")
    p.add_argument("--corruptions", nargs="+", help="override eval.corruptions")
    p.add_argument("--oracle", action="store_true",
                   help="score label-stamped plates with an exact reader (self-test)")
    p.set_defaults(func=cmd_eval, needs_config=True)

    p = sub.add_parser("oneshot", parents=[common], help="run n-way one-shot episodes")
    p.add_argument("--params", help="trained params file (from absgen train)")
    p.add_argument("--n-way", type=int, help="override oneshot.n_way")
    p.add_argument("--oracle", action="store_true",
                   help="score label-stamped plates with an exact reader (self-test)")
    p.set_defaults(func=cmd_oneshot, needs_config=True)

    p = sub.add_parser("theory", parents=[common],
                       help="two-pattern latent models: definition check and hyperplane transfer")
    p.set_defaults(func=cmd_theory, needs_config=False)

    p = sub.add_parser("corrupt-preview", parents=[common],
                       help="write before/after PGM pairs for each corruption")
    p.add_argument("--corruptions", nargs="+", help="override eval.corruptions")
    p.add_argument("--count", type=int, default=4, help="images per corruption (default: 4)")
    p.set_defaults(func=cmd_corrupt_preview, needs_config=True)

    p = sub.add_parser("validate-manifest", parents=[common],
                       help="check manifest checksums and print a summary")
    p.add_argument("manifest", help="manifest file to validate")
    p.set_defaults(func=cmd_validate_manifest, needs_config=False)

    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.threads is not None:
        if args.threads < 1:
            print("error: --threads must be >= 1", file=sys.stderr)
            return 3
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ[var] = str(args.threads)
    if args.needs_config and not args.config:
        print("error: this subcommand requires --config", file=sys.stderr)
        return 3
    if getattr(args, "func", None) in (cmd_eval, cmd_oneshot):
        if not args.oracle and not args.params:
            print("error: --params is required unless --oracle is given", file=sys.stderr)
            return 3
    try:
        return args.func(args)
    except FileNotFoundError as e:
        print(f"error: missing input: {e}", file=sys.stderr)
        return 2
    except ConfigError as e:
        print(f"error: invalid config: {e}", file=sys.stderr)
        return 3
    except (FormatError, ConsistencyError) as e:
        print(f"error: malformed data: {e}", file=sys.stderr)
        return 3
    except ParamsMismatchError as e:
        print(f"error: params mismatch: {e}", file=sys.stderr)
        return 4
    except ContractError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
