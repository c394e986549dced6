"""Command line front end: ``bornchain {run,predict,oracle,validate-model}``.

Experiments are described by a strict JSON config::

    {"model": "linear", "a": [3, 7], "trials": 100000, "seed": 42}

Exit codes: 0 success, 1 I/O failure, 2 config error, 3 enumeration guard
refusal, 4 failed acceptance check (only with ``--check``).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from bornchain import analytic, engine, oracle, stats
from bornchain.model import InadmissibleModelError, ModelKind, TransitionModel, load_weight_file, make_model, validate_model
from bornchain.state import MAX_N, EnumerationGuardError, IntensityState

EXIT_OK, EXIT_IO, EXIT_CONFIG, EXIT_GUARD, EXIT_CHECK = 0, 1, 2, 3, 4
SEED_ENV = "BORNCHAIN_SEED"

Z_LIMIT = 3.0
P_LIMIT = 1e-3
INTERVAL_LEVEL = 0.999
UNFINISHED_LIMIT = 1e-3
EXACT_TOL = 1e-9

_REQUIRED = ("model", "a")
_OPTIONAL = ("weights", "trials", "seed", "mode", "k", "max_steps", "output", "trials_csv")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    model: str
    a: tuple[int, ...]
    trials: int = 10_000
    seed: int = 0
    mode: str = "absorb"
    k: int | None = None
    max_steps: int | None = None
    weights: str | None = None
    output: str | None = None
    trials_csv: bool = True
    base_dir: Path = field(default=Path("."), repr=False, compare=False)

    @property
    def N(self) -> int:
        return sum(self.a)

    @property
    def state(self) -> IntensityState:
        return IntensityState(self.a)

    def build_model(self, strict: bool = True) -> TransitionModel:
        if self.model != ModelKind.CUSTOM.value:
            return make_model(self.model)
        path = Path(self.weights)
        if not path.is_absolute():
            path = self.base_dir / path
        try:
            return load_weight_file(path, self.N, strict=strict)
        except OSError as err:
            raise ConfigError(f"cannot read weight file {path}: {err.strerror}") from err
        except (ValueError, InadmissibleModelError) as err:
            raise ConfigError(str(err)) from err

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "weights": self.weights,
            "a": list(self.a),
            "N": self.N,
            "trials": self.trials,
            "seed": self.seed,
            "mode": self.mode,
            "k": self.k,
            "max_steps": self.max_steps,
        }


def _is_int(x) -> bool:
    return isinstance(x, int) and not isinstance(x, bool)


def parse_config(document: str, base_dir: Path | str = ".") -> ExperimentConfig:
    """Parse and validate a JSON experiment config. ``N`` is the sum of ``a``."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as err:
        raise ConfigError(f"config is not valid JSON: {err}") from err
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(doc) - set(_REQUIRED) - set(_OPTIONAL))
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    missing = [k for k in _REQUIRED if k not in doc]
    if doc.get("model") == "custom" and "weights" not in doc:
        missing.append("weights")
    if doc.get("mode") == "partial" and "k" not in doc:
        missing.append("k")
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(missing)}")

    errors = []
    kinds = [k.value for k in ModelKind]
    if doc["model"] not in kinds:
        errors.append(f"model must be one of {kinds}")
    a = doc["a"]
    if not isinstance(a, list) or not a or not all(_is_int(x) for x in a):
        errors.append("a must be a nonempty list of integers")
    elif any(x < 0 for x in a):
        errors.append("intensities must be nonnegative")
    elif sum(a) == 0:
        errors.append("zero total intensity")
    elif sum(a) > MAX_N:
        errors.append(f"total intensity exceeds {MAX_N}")
    trials = doc.get("trials", 10_000)
    if not _is_int(trials) or trials < 1:
        errors.append("trials must be a positive integer")
    seed = doc.get("seed", 0)
    if not _is_int(seed) or not 0 <= seed < 2**64:
        errors.append("seed must be an integer in [0, 2**64)")
    mode = doc.get("mode", "absorb")
    if mode not in ("absorb", "partial"):
        errors.append("mode must be 'absorb' or 'partial'")
    k = doc.get("k")
    if k is not None and (not _is_int(k) or k < 0):
        errors.append("k must be a nonnegative integer")
    max_steps = doc.get("max_steps")
    if max_steps is not None and (not _is_int(max_steps) or max_steps < 1):
        errors.append("max_steps must be a positive integer")
    weights = doc.get("weights")
    if weights is not None and doc["model"] != "custom":
        errors.append("weights is only valid with model 'custom'")
    if weights is not None and not isinstance(weights, str):
        errors.append("weights must be a path string")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        errors.append("output must be a path string")
    trials_csv = doc.get("trials_csv", True)
    if not isinstance(trials_csv, bool):
        errors.append("trials_csv must be a boolean")
    if errors:
        raise ConfigError("; ".join(errors))

    return ExperimentConfig(
        model=doc["model"],
        a=tuple(a),
        trials=trials,
        seed=seed,
        mode=mode,
        k=k if mode == "partial" else None,
        max_steps=max_steps,
        weights=weights,
        output=output,
        trials_csv=trials_csv,
        base_dir=Path(base_dir),
    )


def load_config(path: Path) -> ExperimentConfig:
    try:
        text = path.read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err.strerror}") from err
    cfg = parse_config(text, base_dir=path.parent)
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            seed = int(env_seed)
        except ValueError as err:
            raise ConfigError(f"{SEED_ENV} must be an integer, got {env_seed!r}") from err
        if not 0 <= seed < 2**64:
            raise ConfigError(f"{SEED_ENV} out of range")
        cfg.seed = seed
    return cfg


# --- formatting ----------------------------------------------------------------


def fmt(x) -> str:
    """Numbers for CSV: integers verbatim, floats with 17 significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def dump_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _csv_text(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _check(name: str, passed: bool, **detail) -> dict:
    return {"name": name, "passed": bool(passed), **detail}


def _z_check(name: str, mean: float, var: float, n: int, target: float) -> dict:
    if n < 2 or var <= 0:
        return _check(name, mean == target, mean=mean, target=target, z=None)
    z = stats.mean_z_test(mean, var**0.5, n, target)
    return _check(name, abs(z) < Z_LIMIT, mean=mean, target=target, z=z)


# --- subcommands ---------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig, threads: int = 1) -> tuple[dict, dict[str, str]]:
    """Simulate the ensemble. Returns the summary document and extra files to write."""
    model = cfg.build_model()
    state = cfg.state
    records = engine.simulate_trials(
        state, model, cfg.trials, cfg.seed, mode=cfg.mode, k=cfg.k, max_steps=cfg.max_steps, threads=threads
    )
    summary = stats.summarize(records)
    born = analytic.born_probabilities(state)
    prediction = analytic.predict_steps(state, model)
    doc = {
        "command": "run",
        "config": cfg.to_dict(),
        "prng": engine.PRNG_ID,
        "summary": summary.to_dict(),
        "born_probabilities": born.tolist(),
        "predicted": {
            "mean_total_steps": prediction.total,
            "mean_nontrivial_steps": prediction.nontrivial,
            "heuristic": prediction.heuristic,
        },
    }
    checks = []
    if cfg.mode == "absorb":
        finished = cfg.trials - summary.unfinished
        winners = []
        for i, c in enumerate(summary.winner_counts):
            lo, hi = stats.proportion_interval(c, finished, INTERVAL_LEVEL) if finished else (0.0, 1.0)
            winners.append({"component": i + 1, "count": c, "frequency": c / finished if finished else None,
                            "interval": [lo, hi], "born": born[i]})
            if born[i] > 0:
                checks.append(_check(f"born_interval_{i + 1}", lo <= born[i] <= hi, born=born[i], interval=[lo, hi]))
        doc["winners"] = winners
        doc["interval_level"] = INTERVAL_LEVEL
        support = born > 0
        checks.append(_check("support", all(c == 0 for c, s in zip(summary.winner_counts, support) if not s)))
        if support.sum() >= 2 and finished:
            gof = stats.chi_square_gof(np.asarray(summary.winner_counts)[support], born[support], finished)
            doc["gof"] = {"statistic": gof.statistic, "dof": gof.dof, "p_value": gof.p_value}
            checks.append(_check("born_gof", gof.p_value > P_LIMIT, p_value=gof.p_value))
        checks.append(_z_check("nontrivial_mean", summary.nontrivial_mean, summary.nontrivial_variance,
                               finished, prediction.nontrivial))
        if not prediction.heuristic:
            checks.append(_z_check("total_mean", summary.step_mean, summary.step_variance, finished, prediction.total))
        if model.kind is ModelKind.UNIFORM and support.sum() == 2 and summary.null_fraction_se > 0:
            z = (summary.null_fraction - 0.5) / summary.null_fraction_se
            checks.append(_check("null_fraction", abs(z) < Z_LIMIT, value=summary.null_fraction, target=0.5, z=z))
        checks.append(_check("unfinished", summary.unfinished / cfg.trials < UNFINISHED_LIMIT, count=summary.unfinished))
    else:
        for i, x in enumerate(state.a):
            checks.append(_z_check(f"mean_intensity_{i + 1}", summary.final_mean[i], summary.final_variance[i], cfg.trials, x))
    doc["checks"] = checks

    files = {}
    if cfg.trials_csv:
        M = state.M
        if cfg.mode == "absorb":
            header = ["trial", "winner", "total_steps", "nontrivial_steps"]
            rows = ((t, "" if w < 0 else w + 1, s, n) for t, (w, s, n) in
                    enumerate(zip(records.winner.tolist(), records.total_steps.tolist(), records.nontrivial_steps.tolist())))
        else:
            header = ["trial"] + [f"a_{i + 1}" for i in range(M)] + ["total_steps", "nontrivial_steps"]
            rows = ([t, *f, s, n] for t, (f, s, n) in
                    enumerate(zip(records.final_states.tolist(), records.total_steps.tolist(), records.nontrivial_steps.tolist())))
        files["trials.csv"] = _csv_text(header, rows)
    return doc, files


def cmd_predict(cfg: ExperimentConfig) -> dict:
    model = cfg.build_model()
    state = cfg.state
    prediction = analytic.predict_steps(state, model)
    doc = {
        "command": "predict",
        "config": cfg.to_dict(),
        "born_probabilities": analytic.born_probabilities(state).tolist(),
        "v": list(prediction.v),
        "mean_total_steps": prediction.total,
        "heuristic": prediction.heuristic,
        "mean_nontrivial_steps": prediction.nontrivial,
        "max_nontrivial": analytic.max_nontrivial(state.M, state.N),
    }
    if state.N > 1:
        doc["q"] = [analytic.q_value(model, a, state.N) for a in range(1, state.N)]
    return doc


def cmd_oracle(cfg: ExperimentConfig) -> tuple[dict, str]:
    model = cfg.build_model()
    state = cfg.state
    space = oracle.enumerate_states(state.M, state.N)
    sol = oracle.solve_chain(model, space)
    born = space.states / space.N
    nontrivial = np.array([analytic.mean_nontrivial_steps(IntensityState(tuple(s))) for s in space.states.tolist()])
    absorb, total, nt = sol.at(state.a)
    doc = {
        "command": "oracle",
        "config": cfg.to_dict(),
        "states": len(space),
        "state": {"a": list(state.a), "absorb": absorb.tolist(), "expected_total": total, "expected_nontrivial": nt},
        "born_max_deviation": float(np.max(np.abs(sol.absorb - born))),
        "nontrivial_max_deviation": float(np.max(np.abs(sol.expected_nontrivial - nontrivial))),
    }
    checks = [
        _check("born_exact", doc["born_max_deviation"] <= EXACT_TOL),
        _check("nontrivial_exact", doc["nontrivial_max_deviation"] <= 1e-8 * max(1.0, nontrivial.max())),
    ]
    if state.M == 2:
        residual = oracle.second_difference_check(sol.absorb)
        v = analytic.mean_steps_all(model, state.N)
        # index by a: row N - a holds (a, N - a)
        v_oracle = sol.expected_total[::-1]
        rel = np.abs(v_oracle - v) / np.maximum(1.0, np.abs(v))
        doc["second_difference_residual"] = residual
        doc["mean_steps_max_rel_deviation"] = float(rel.max())
        checks.append(_check("second_difference", residual <= EXACT_TOL))
        checks.append(_check("mean_steps_closed_form", rel.max() <= 1e-8))
    doc["checks"] = checks

    header = ["state"] + [f"absorb_{i + 1}" for i in range(state.M)] + ["expected_total", "expected_nontrivial"]
    rows = (
        [":".join(map(str, s)), *map(fmt, p), fmt(t), fmt(n)]
        for s, p, t, n in zip(space.states.tolist(), sol.absorb, sol.expected_total, sol.expected_nontrivial)
    )
    return doc, _csv_text(header, rows)


def cmd_validate_model(cfg: ExperimentConfig) -> dict:
    model = cfg.build_model(strict=False)
    report = validate_model(model, cfg.state.M, cfg.N)
    doc = {"command": "validate-model", "config": cfg.to_dict(), **report.to_dict()}
    doc["checks"] = [_check("admissible", report.valid)]
    return doc


# --- entry point ----------------------------------------------------------------


def _write(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        path = out_dir / name
        with open(path, "w", newline="") as fh:
            fh.write(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bornchain", description="Stochastic measurement model: simulate, predict, solve exactly.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [
        ("run", "simulate an ensemble of trials"),
        ("predict", "closed-form predictions"),
        ("oracle", "exact absorbing-chain solution over all states"),
        ("validate-model", "check a transition model against the admissibility constraints"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", type=Path, required=True, help="JSON experiment config")
        p.add_argument("--out", type=Path, default=None, help="output directory (default: config 'output', else stdout only)")
        p.add_argument("--check", action="store_true", help="exit 4 when an acceptance check fails")
        if name == "run":
            p.add_argument("--threads", type=int, default=1, help="worker threads; affects speed only")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        files: dict[str, str] = {}
        if args.command == "run":
            doc, files = cmd_run(cfg, threads=args.threads)
            files["summary.json"] = dump_json(doc)
        elif args.command == "predict":
            doc = cmd_predict(cfg)
            files["predict.json"] = dump_json(doc)
        elif args.command == "oracle":
            doc, table = cmd_oracle(cfg)
            files["oracle.csv"] = table
            files["oracle.json"] = dump_json(doc)
        else:
            doc = cmd_validate_model(cfg)
            files["validate.json"] = dump_json(doc)
        out = args.out or (Path(cfg.output) if cfg.output else None)
        if out is not None:
            if not out.is_absolute() and args.out is None:
                out = cfg.base_dir / out
            _write(out, files)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except EnumerationGuardError as err:
        print(f"refused: {err}", file=sys.stderr)
        return EXIT_GUARD
    except OSError as err:
        print(f"I/O error on {err.filename}: {err.strerror}", file=sys.stderr)
        return EXIT_IO

    sys.stdout.write(dump_json(doc))
    failed = [c["name"] for c in doc.get("checks", []) if not c["passed"]]
    if args.check and failed:
        print(f"failed checks: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
