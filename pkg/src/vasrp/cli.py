"""Command-line interface: fit, bootstrap, simulate, and recover subcommands.

Input is a CSV with header ``user_id,item_id,polarity,value[,scale_min,scale_max]``
(polarity is ``unipolar`` or ``bipolar``; the scale defaults to 0-100).
Outputs are JSON/CSV flat files written atomically.  Exit codes: 0 ok,
2 input error, 3 configuration error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from dataclasses import dataclass, fields, replace

from .bootstrap import SamplingPlan, aggregate, bootstrap_profiles
from .distributions import beta_moments, mean_std
from .errors import InsufficientDataError
from .pipeline import (
    HyperParams,
    ResponseProfile,
    ResponseRecord,
    estimate_profile,
    normalize,
)
from .simulation import (
    DEFAULT_ACCEPT_GRID,
    DEFAULT_FAMILIES,
    DEFAULT_TH_GRID,
    builtin_conditions,
    condition_by_id,
    run_recovery,
    sample_condition,
    write_recovery_csv,
    write_recovery_json,
)

_EXIT_OK = 0
_EXIT_INPUT = 2
_EXIT_CONFIG = 3
_EXIT_INTERNAL = 4


class InputError(Exception):
    """Malformed input data (exit code 2)."""


class ConfigError(Exception):
    """Invalid configuration (exit code 3)."""


@dataclass(frozen=True)
class RunConfig:
    """All runtime settings; every field can come from the config file or a flag."""

    th: float = 0.15
    accept_bidist: float = 0.15
    family: str = "beta"
    w_step: float = 0.1
    min_sub_n: int = 5
    min_main_n: int = 10
    min_bimodal_n: int = 10
    level1_n: int = 300
    level2_n: int = 1800
    replicates: int = 1000
    seed: int = 0
    bin_width: float = 0.05

    def hyper_params(self) -> HyperParams:
        try:
            return HyperParams(
                th=self.th,
                accept_bidist=self.accept_bidist,
                family=self.family,
                w_step=self.w_step,
                min_sub_n=self.min_sub_n,
                min_main_n=self.min_main_n,
                min_bimodal_n=self.min_bimodal_n,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def sampling_plan(self) -> SamplingPlan:
        try:
            return SamplingPlan(self.level1_n, self.level2_n, self.replicates)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def validate(self) -> "RunConfig":
        self.hyper_params()
        self.sampling_plan()
        if self.seed < 0:
            raise ConfigError(f"seed must be non-negative, got {self.seed}")
        n_bins = round(1.0 / self.bin_width)
        if not (self.bin_width > 0.0 and abs(n_bins * self.bin_width - 1.0) < 1e-9):
            raise ConfigError(f"bin_width must divide 1 evenly, got {self.bin_width}")
        return self


def load_config(path: str | None, overrides: dict) -> RunConfig:
    """Config file values first, CLI flags win."""
    cfg = RunConfig()
    known = {f.name: f.type for f in fields(RunConfig)}
    if path is not None:
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a flat JSON object")
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = replace(cfg, **data)
    cfg = replace(cfg, **{k: v for k, v in overrides.items() if v is not None})
    return cfg.validate()


# ---------------------------------------------------------------------------
# CSV input
# ---------------------------------------------------------------------------

_REQUIRED_COLUMNS = ("user_id", "item_id", "polarity", "value")


def read_records(path: str) -> dict[str, list[ResponseRecord]]:
    """Parse the input CSV into per-user record lists (input order kept)."""
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read input file: {exc}") from exc
    with fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in _REQUIRED_COLUMNS if c not in header]
        if missing:
            raise InputError(f"missing required CSV columns: {missing}")
        users: dict[str, list[ResponseRecord]] = {}
        for row_no, row in enumerate(reader, start=2):
            users.setdefault(row["user_id"], []).append(_parse_row(row, row_no))
    if not users:
        raise InputError("input CSV holds no data rows")
    return users


def _parse_row(row: dict, row_no: int) -> ResponseRecord:
    polarity = (row.get("polarity") or "").strip()
    if polarity not in ("unipolar", "bipolar"):
        raise InputError(
            f"row {row_no}, column polarity: expected 'unipolar' or 'bipolar', got {polarity!r}"
        )
    scale_min = _parse_float(row.get("scale_min"), 0.0, row_no, "scale_min")
    scale_max = _parse_float(row.get("scale_max"), 100.0, row_no, "scale_max")
    value = _parse_float(row.get("value"), None, row_no, "value")
    if scale_min >= scale_max:
        raise InputError(
            f"row {row_no}: invalid scale [{scale_min}, {scale_max}]"
        )
    if not scale_min <= value <= scale_max:
        raise InputError(
            f"row {row_no}, column value: {value} outside scale [{scale_min}, {scale_max}]"
        )
    return ResponseRecord(
        user_id=row["user_id"],
        item_id=row["item_id"],
        polarity=polarity,
        raw_value=value,
        scale_min=scale_min,
        scale_max=scale_max,
    )


def _parse_float(raw, default, row_no: int, column: str) -> float:
    if raw is None or raw == "":
        if default is None:
            raise InputError(f"row {row_no}, column {column}: missing value")
        return default
    try:
        return float(raw)
    except ValueError as exc:
        raise InputError(f"row {row_no}, column {column}: not a number: {raw!r}") from exc


def _write_json(payload, path: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def user_seed(seed: int, user_id: str) -> int:
    """Stable per-user substream index derived from the user id."""
    digest = hashlib.sha256(user_id.encode("utf-8")).digest()
    return int.from_bytes(digest[:6], "big")


# ---------------------------------------------------------------------------
# Profile serialization
# ---------------------------------------------------------------------------


def profile_to_json(profile: ResponseProfile) -> dict:
    out = {
        "main_kind": profile.main.kind,
        "sub_kind": profile.sub.kind,
        "is_mrs": int(profile.main.kind == "mrs"),
        "is_bimrs": int(profile.main.kind == "bimrs"),
        "is_ers": int(profile.sub.kind == "ers"),
        "is_drs": int(profile.sub.kind == "drs"),
        "is_ars": int(profile.sub.kind == "ars"),
        "w_ade": profile.sub.w_ade,
        "loglik": profile.loglik,
        "aic": profile.aic,
        "n_obs": profile.n_obs,
        "n_main": profile.n_main,
        "n_sub": profile.n_sub,
        "separation": profile.main.separation,
    }
    main = profile.main
    if main.kind == "mrs":
        out["w1"] = 1.0
        out.update(_component_json(main.params, "1"))
        out["left_peak_mean"] = mean_std(main.params)[0]
    elif main.kind == "bimrs":
        out["w1"] = main.params.w1
        out["w2"] = main.params.w2
        out.update(_component_json(main.params.comp1, "1"))
        out.update(_component_json(main.params.comp2, "2"))
        out["left_peak_mean"] = min(
            mean_std(main.params.comp1)[0], mean_std(main.params.comp2)[0]
        )
    if profile.sub.kind != "none":
        out["alpha_ade"] = profile.sub.params.alpha
        out["beta_ade"] = profile.sub.params.beta
    if profile.metrics is not None:
        out["metrics"] = {
            "corr": profile.metrics.corr,
            "d_kl": profile.metrics.d_kl,
            "chisq": profile.metrics.chisq,
            "intersect": profile.metrics.intersect,
            "bhattacharyya": profile.metrics.bhattacharyya,
        }
    out["candidates"] = [
        {"label": c.label, "aic": c.fit.aic, "k": c.fit.k, "eligible": c.eligible}
        for c in profile.candidates
    ]
    return out


def _component_json(comp, suffix: str) -> dict:
    entries = {}
    if hasattr(comp, "alpha"):
        entries[f"alpha{suffix}"] = comp.alpha
        entries[f"beta{suffix}"] = comp.beta
        m, s = beta_moments(comp)
        entries[f"mu{suffix}"] = m
        entries[f"sigma{suffix}"] = s
    else:
        entries[f"mu{suffix}"] = comp.mu
        entries[f"sigma{suffix}"] = comp.sigma
    return entries


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    cfg = load_config(args.config, _config_overrides(args))
    hp = cfg.hyper_params()
    users = read_records(args.input)
    results = {}
    skipped = {}
    for uid in sorted(users):
        records = users[uid]
        if len(records) < cfg.min_main_n:
            skipped[uid] = f"only {len(records)} records (min_main_n={cfg.min_main_n})"
            continue
        dataset = normalize(records)
        try:
            profile = estimate_profile(dataset, hp, bin_width=cfg.bin_width)
        except InsufficientDataError as exc:
            skipped[uid] = str(exc)
            continue
        results[uid] = profile_to_json(profile)
    _write_json({"users": results, "skipped": skipped}, args.output)
    print(f"fit: {len(results)} users written, {len(skipped)} skipped -> {args.output}")
    return _EXIT_OK


def cmd_bootstrap(args) -> int:
    cfg = load_config(args.config, _config_overrides(args))
    hp = cfg.hyper_params()
    plan = cfg.sampling_plan()
    users = read_records(args.input)
    results = {}
    skipped = {}
    for uid in sorted(users):
        records = users[uid]
        if len(records) < cfg.min_main_n:
            skipped[uid] = f"only {len(records)} records (min_main_n={cfg.min_main_n})"
            continue
        dataset = normalize(records)
        run = bootstrap_profiles(dataset, hp, plan, user_seed(cfg.seed, uid))
        if not run.profiles:
            skipped[uid] = "all replicates failed"
            continue
        summary = aggregate(run.profiles, run.n_failed)
        results[uid] = {
            "params": {
                name: _stats_json(st) for name, st in sorted(summary.params.items())
            },
            "metrics": {
                name: _stats_json(st) for name, st in sorted(summary.metrics.items())
            },
            "main_kind_counts": summary.main_kind_counts,
            "sub_kind_counts": summary.sub_kind_counts,
            "n_replicates": summary.n_replicates,
            "n_failed": summary.n_failed,
            **summary.features,
        }
    _write_json({"users": results, "skipped": skipped}, args.output)
    print(
        f"bootstrap: {len(results)} users x {plan.replicates} replicates -> {args.output}"
    )
    return _EXIT_OK


def _stats_json(st) -> dict:
    return {
        "median": st.median,
        "p5": st.p5,
        "p25": st.p25,
        "p75": st.p75,
        "p95": st.p95,
        "n": st.n,
    }


def cmd_simulate(args) -> int:
    cfg = load_config(args.config, _config_overrides(args))
    if args.condition is not None:
        try:
            conditions = [condition_by_id(args.condition)]
        except KeyError as exc:
            raise ConfigError(str(exc)) from exc
    else:
        conditions = list(builtin_conditions())
    n = args.n if args.n is not None else 1000
    if n < 1:
        raise ConfigError(f"--n must be >= 1, got {n}")
    tmp = f"{args.output}.tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["user_id", "item_id", "polarity", "value", "scale_min", "scale_max"])
        for cond in conditions:
            values = sample_condition(cond, n, cfg.seed, repeat=0)
            for v in values:
                writer.writerow([cond.cid, "sim", "bipolar", repr(float(v)), 0.0, 1.0])
    os.replace(tmp, args.output)
    print(f"simulate: {len(conditions)} condition(s) x {n} samples -> {args.output}")
    return _EXIT_OK


def cmd_recover(args) -> int:
    cfg = load_config(args.config, _config_overrides(args))
    families = [args.family] if args.family else list(DEFAULT_FAMILIES)
    th_values = [args.th] if args.th is not None else list(DEFAULT_TH_GRID)
    accept_values = (
        [args.accept_bidist] if args.accept_bidist is not None else list(DEFAULT_ACCEPT_GRID)
    )
    for th in th_values:
        if not 0.0 < th < 0.5:
            raise ConfigError(f"th must be in (0, 0.5), got {th}")
    for acc in accept_values:
        if not 0.0 <= acc <= 1.0:
            raise ConfigError(f"accept-bidist must be in [0, 1], got {acc}")
    n = args.n if args.n is not None else 1000
    repeats = args.repeats if args.repeats is not None else 1
    if n < cfg.min_main_n:
        raise ConfigError(f"--n must be >= min_main_n ({cfg.min_main_n}), got {n}")
    if repeats < 1:
        raise ConfigError(f"--repeats must be >= 1, got {repeats}")
    cells = run_recovery(
        families=families,
        th_values=th_values,
        accept_values=accept_values,
        n_per_condition=n,
        seed=cfg.seed,
        repeats=repeats,
        w_step=cfg.w_step,
        bin_width=cfg.bin_width,
    )
    csv_path = args.output
    json_path = os.path.splitext(csv_path)[0] + ".json"
    write_recovery_csv(cells, csv_path)
    write_recovery_json(cells, json_path)
    print(f"recover: {len(cells)} grid cells -> {csv_path}, {json_path}")
    return _EXIT_OK


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


def _config_overrides(args) -> dict:
    keys = (
        "th",
        "accept_bidist",
        "family",
        "w_step",
        "replicates",
        "level1_n",
        "level2_n",
        "seed",
        "bin_width",
    )
    return {k: getattr(args, k, None) for k in keys}


def _add_common(parser: argparse.ArgumentParser, with_input: bool = True) -> None:
    if with_input:
        parser.add_argument("--input", required=True, help="input CSV path")
    parser.add_argument("--output", required=True, help="output file path")
    parser.add_argument("--config", help="JSON config file (flags win)")
    parser.add_argument("--th", type=float, help="split threshold in (0, 0.5)")
    parser.add_argument("--accept-bidist", type=float, dest="accept_bidist",
                        help="minimum peak separation for the bimodal main")
    parser.add_argument("--family", choices=["beta", "gaussian"], help="main-fit family")
    parser.add_argument("--w-step", type=float, dest="w_step", help="tail weight grid step")
    parser.add_argument("--replicates", type=int, help="bootstrap replicate count")
    parser.add_argument("--level1-n", type=int, dest="level1_n", help="per-item resample count")
    parser.add_argument("--level2-n", type=int, dest="level2_n",
                        help="per-polarity resample count")
    parser.add_argument("--seed", type=int, help="base random seed")
    parser.add_argument("--bin-width", type=float, dest="bin_width", help="histogram bin width")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vasrp",
        description="Characterize response profiles in repeated slider-scale data.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit one profile per user from a CSV")
    _add_common(p_fit)
    p_fit.set_defaults(func=cmd_fit)

    p_boot = sub.add_parser("bootstrap", help="bootstrap profile ranges per user")
    _add_common(p_boot)
    p_boot.set_defaults(func=cmd_bootstrap)

    p_sim = sub.add_parser("simulate", help="write pseudo-data for built-in conditions")
    _add_common(p_sim, with_input=False)
    p_sim.add_argument("--condition", type=int, help="built-in condition id (default: all)")
    p_sim.add_argument("--n", type=int, help="samples per condition (default 1000)")
    p_sim.set_defaults(func=cmd_simulate)

    p_rec = sub.add_parser("recover", help="run the parameter-recovery grid")
    _add_common(p_rec, with_input=False)
    p_rec.add_argument("--n", type=int, help="samples per condition (default 1000)")
    p_rec.add_argument("--repeats", type=int, help="datasets per condition (default 1)")
    p_rec.set_defaults(func=cmd_recover)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return _EXIT_INPUT
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return _EXIT_CONFIG
    except AssertionError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return _EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
