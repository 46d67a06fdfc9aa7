"""Command-line front end.

Subcommands cover field sampling, cluster exploration, cone-guided
revealment, the estimators, the critical-intensity locator, the inequality
checkers, and an entropy self-test.  Configuration comes from a JSON file
with strict key validation; ``--set key=value`` flags override file values.
Each run writes a CSV (schema-tagged header comment) and a JSON manifest
embedding the resolved config, its hash, and the seed — no timestamps, so
identical config and seed produce byte-identical artifacts.

Environment: BOOLPERC_WORKERS sets the default worker count,
BOOLPERC_OUTDIR the default output directory.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict, is_dataclass
from pathlib import Path

import numpy as np

from .distributions import MomentConditionError, RadiusLaw, require_weak_condition
from .entropy import (
    DecisionTree,
    FiniteLaw,
    kl_discrete,
    kl_poisson,
    kl_process_bound,
    log_ratio_bound,
    pinsker_gap_bound,
    stopped_kl_identity_check,
)
from .experiments import (
    CheckerConfig,
    NonBracketingError,
    check_entropic_bound,
    check_theorem_magnetization,
    check_theorem_susceptibility,
    check_theorem_tail,
    estimate_chi,
    estimate_magnetization,
    estimate_tail,
    estimate_theta,
    find_lambda_c,
)
from .explorer import explore_cluster, union_volume
from .field import FieldConfig, sample_ghost, sample_window, substream
from .revealment import GhostConnection, OneArm, VolumeAtLeast, run_template

CSV_SCHEMA_VERSION = "boolperc-csv v1"


class CLIConfigError(ValueError):
    pass


# -- config plumbing ----------------------------------------------------------

SCHEMAS: dict[str, dict] = {
    "sample": {
        "required": {"dimension", "lam", "radius_law", "seed", "R"},
        "optional": {"eps_trunc": 1e-9},
    },
    "explore": {
        "required": {"dimension", "lam", "radius_law", "seed", "R"},
        "optional": {"eps_trunc": 1e-9, "ball_cap": None, "vol_n": 16384},
    },
    "reveal": {
        "required": {"dimension", "lam", "radius_law", "seed", "event", "max_steps"},
        "optional": {"vol_n": 4096},
    },
    "estimate-theta": {
        "required": {"dimension", "lam", "radius_law", "seed", "R", "replicas"},
        "optional": {"eps_trunc": 1e-9},
    },
    "estimate-chi": {
        "required": {"dimension", "lam", "radius_law", "seed", "replicas"},
        "optional": {"R": 16.0, "ball_cap": 4000, "vol_n": 16384},
    },
    "estimate-tail": {
        "required": {"dimension", "lam", "radius_law", "seed", "replicas", "y_grid"},
        "optional": {"R": 16.0, "ball_cap": 4000, "vol_n": 16384},
    },
    "estimate-magnetization": {
        "required": {"dimension", "lam", "radius_law", "seed", "replicas", "rho"},
        "optional": {"method": "direct", "R": 16.0, "ball_cap": 4000, "vol_n": 32768},
    },
    "find-lambda-c": {
        "required": {"dimension", "radius_law", "seed"},
        "optional": {
            "R_ladder": [8.0, 16.0],
            "crossing_target": 0.5,
            "tolerance": 0.02,
            "replicas_per_eval": 400,
            "bracket": None,
            "eps_trunc": 1e-6,
        },
    },
    "check-susceptibility": {
        "required": {"dimension", "radius_law", "seed", "checker"},
        "optional": {
            "replicas": 1500, "theta_replicas": 800, "critical_replicas": 3000,
            "R": 16.0, "theta_R": 8.0, "ball_cap": 4000, "vol_n": 16384,
        },
    },
    "check-tail": {
        "required": {"dimension", "radius_law", "seed", "checker"},
        "optional": {
            "replicas": 1500, "critical_replicas": 3000,
            "R": 16.0, "ball_cap": 4000, "vol_n": 16384,
        },
    },
    "check-magnetization": {
        "required": {"dimension", "radius_law", "seed", "checker"},
        "optional": {
            "replicas": 1500, "critical_replicas": 3000,
            "R": 16.0, "ball_cap": 4000, "vol_n": 16384,
        },
    },
    "check-entropic": {
        "required": {"dimension", "radius_law", "seed", "event", "l1", "l2", "replicas"},
        "optional": {"max_steps": 2500, "vol_n": 2048, "aux_replicas": None},
    },
    "entropy-selftest": {
        "required": set(),
        "optional": {"seed": 0},
    },
}

CHECKER_KEYS = {
    "required": {"lambda_c_hat", "lambda_grid", "y_grid", "rho_grid"},
    "optional": {"beta0": 1.0, "c0": 1e-6},
}

EVENT_KINDS = {
    "one_arm": {"R"},
    "volume_at_least": {"y"},
    "ghost": {"rho", "box_radius"},
}


def _parse_set_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _apply_overrides(config: dict, sets: list[str]) -> dict:
    for item in sets:
        if "=" not in item:
            raise CLIConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        target = config
        parts = key.split(".")
        for p in parts[:-1]:
            target = target.setdefault(p, {})
            if not isinstance(target, dict):
                raise CLIConfigError(f"cannot override inside non-object key {p!r}")
        target[parts[-1]] = _parse_set_value(raw)
    return config


def _validate_keys(obj: dict, required: set, optional: dict, where: str) -> dict:
    unknown = set(obj) - required - set(optional)
    if unknown:
        raise CLIConfigError(f"unknown {where} keys: {sorted(unknown)}")
    missing = required - set(obj)
    if missing:
        raise CLIConfigError(f"missing {where} keys: {sorted(missing)}")
    resolved = dict(optional)
    resolved.update(obj)
    return resolved


def load_config(subcommand: str, config_path: str | None, sets: list[str]) -> dict:
    schema = SCHEMAS[subcommand]
    config: dict = {}
    if config_path is not None:
        with open(config_path) as f:
            config = json.load(f)
        if not isinstance(config, dict):
            raise CLIConfigError("config file must hold a JSON object")
    _apply_overrides(config, sets)
    resolved = _validate_keys(config, schema["required"], schema["optional"], "config")
    if "radius_law" in resolved:
        if not isinstance(resolved["radius_law"], dict):
            raise CLIConfigError("radius_law must be an object")
        resolved["radius_law"] = RadiusLaw.from_spec(resolved["radius_law"]).to_spec()
    if "checker" in resolved:
        if not isinstance(resolved["checker"], dict):
            raise CLIConfigError("checker must be an object")
        resolved["checker"] = _validate_keys(
            resolved["checker"], CHECKER_KEYS["required"], CHECKER_KEYS["optional"], "checker"
        )
    if "event" in resolved:
        ev = resolved["event"]
        if not isinstance(ev, dict) or "kind" not in ev:
            raise CLIConfigError("event must be an object with a 'kind' key")
        kind = ev["kind"]
        if kind not in EVENT_KINDS:
            raise CLIConfigError(f"unknown event kind {kind!r}; expected one of {sorted(EVENT_KINDS)}")
        _validate_keys({k: v for k, v in ev.items() if k != "kind"}, EVENT_KINDS[kind], {}, "event")
    return resolved


def _field_config(cfg: dict) -> FieldConfig:
    return FieldConfig(
        dimension=int(cfg["dimension"]),
        lam=float(cfg["lam"]) if "lam" in cfg else 0.0,
        mu=RadiusLaw.from_spec(cfg["radius_law"]),
        seed=int(cfg["seed"]),
    )


def _event_from_config(cfg: dict):
    ev = cfg["event"]
    if ev["kind"] == "one_arm":
        return OneArm(float(ev["R"]))
    if ev["kind"] == "volume_at_least":
        return VolumeAtLeast(float(ev["y"]))
    d = int(cfg["dimension"])
    b = float(ev["box_radius"])
    ghost = sample_ghost(
        float(ev["rho"]), np.full(d, -b), np.full(d, b), int(cfg["seed"]), "cli-ghost"
    )
    return GhostConnection(ghost)


def _config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _jsonable(obj):
    if is_dataclass(obj) and not isinstance(obj, type):
        return _jsonable(asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else repr(v)
    return obj


def _fmt_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path: Path, tag: str, rows: list[dict], columns: list[str] | None = None) -> None:
    if columns is None:
        seen: dict[str, None] = {}
        for r in rows:
            for k in r:
                seen.setdefault(k)
        columns = list(seen)
    lines = [f"# {CSV_SCHEMA_VERSION} schema={tag}", ",".join(columns)]
    for r in rows:
        lines.append(",".join(_fmt_cell(r.get(c)) for c in columns))
    path.write_text("\n".join(lines) + "\n")


def write_manifest(path: Path, subcommand: str, cfg: dict, result: dict, outputs: list[str]) -> None:
    manifest = {
        "schema": "boolperc-manifest v1",
        "subcommand": subcommand,
        "config": _jsonable(cfg),
        "config_sha256": _config_hash(_jsonable(cfg)),
        "seed": cfg.get("seed"),
        "result": _jsonable(result),
        "outputs": outputs,
    }
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n")


# -- subcommand handlers ------------------------------------------------------


def _cmd_sample(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    require_weak_condition(fc.mu, fc.dimension)
    w = sample_window(fc, float(cfg["R"]), float(cfg["eps_trunc"]))
    rows = [
        {**{f"x{k}": float(c[k]) for k in range(fc.dimension)},
         "radius": float(r), "coin": float(u)}
        for c, r, u in zip(w.centers, w.radii, w.coins)
    ]
    write_csv(out / "sample.csv", "sample", rows,
              [f"x{k}" for k in range(fc.dimension)] + ["radius", "coin"])
    result = {
        "count": w.count,
        "truncation_radius": w.truncation_radius,
        "truncation_error_bound": w.truncation_error_bound,
    }
    write_manifest(out / "sample.json", "sample", cfg, result, ["sample.csv"])
    return 0


def _cmd_explore(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    require_weak_condition(fc.mu, fc.dimension)
    R = float(cfg["R"])
    w = sample_window(fc, R, float(cfg["eps_trunc"]))
    cap = cfg["ball_cap"]
    cl = explore_cluster(w, ball_cap=None if cap is None else int(cap))
    if cl.ball_count:
        vol = union_volume(cl.centers, cl.radii, fc.dimension,
                           n=int(cfg["vol_n"]), rng=substream(fc.seed, "volmc"))
        vol_value, vol_se = vol.value, vol.standard_error
    else:
        vol_value = vol_se = 0.0
    rows = [
        {**{f"x{k}": float(c[k]) for k in range(fc.dimension)}, "radius": float(r)}
        for c, r in zip(cl.centers, cl.radii)
    ]
    write_csv(out / "explore.csv", "explore", rows,
              [f"x{k}" for k in range(fc.dimension)] + ["radius"])
    result = {
        "ball_count": cl.ball_count,
        "contains_origin": cl.contains_origin,
        "volume": vol_value,
        "volume_se": vol_se,
        "max_reach": cl.max_reach(),
        "censored": bool(cl.truncated or cl.max_reach() >= R),
    }
    write_manifest(out / "explore.json", "explore", cfg, result, ["explore.csv"])
    return 0


def _cmd_reveal(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    require_weak_condition(fc.mu, fc.dimension)
    event = _event_from_config(cfg)
    trace = run_template(fc, event, int(cfg["max_steps"]),
                         record_steps=True, vol_n=int(cfg["vol_n"]))
    d = fc.dimension
    rows = [
        {"step": rec["step"],
         **{f"s{k}": rec["spatial"][k] for k in range(d)},
         "height": rec["height"], "points": rec["points"],
         "cum_pvol": rec["cum_pvol"], "cluster_balls": rec["cluster_balls"],
         "event_certified": rec["event"]}
        for rec in trace.step_records
    ]
    write_csv(out / "reveal.csv", "reveal", rows,
              ["step"] + [f"s{k}" for k in range(d)]
              + ["height", "points", "cum_pvol", "cluster_balls", "event_certified"])
    result = {
        "verdict": trace.verdict,
        "reason": trace.reason,
        "steps": trace.steps,
        "pvol_revealed": trace.pvol_revealed,
        "cluster_balls": int(trace.cluster_indices.size),
    }
    write_manifest(out / "reveal.json", "reveal", cfg, result, ["reveal.csv"])
    return 0


def _estimate_row(est, extra: dict) -> dict:
    return {
        **extra,
        "value": est.value,
        "standard_error": est.standard_error,
        "replicas": est.replicas,
        "censored_fraction": est.censored_fraction,
        "truncation_error": est.truncation_error,
    }


def _cmd_estimate_theta(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    est = estimate_theta(fc, float(cfg["R"]), int(cfg["replicas"]),
                         eps_trunc=float(cfg["eps_trunc"]), workers=workers)
    rows = [_estimate_row(est, {"lam": fc.lam, "R": float(cfg["R"])})]
    write_csv(out / "estimate-theta.csv", "estimate-theta", rows)
    write_manifest(out / "estimate-theta.json", "estimate-theta", cfg, rows[0],
                   ["estimate-theta.csv"])
    return 0


def _cmd_estimate_chi(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    est = estimate_chi(fc, int(cfg["replicas"]), ball_cap=int(cfg["ball_cap"]),
                       R=float(cfg["R"]), vol_n=int(cfg["vol_n"]), workers=workers)
    rows = [_estimate_row(est, {"lam": fc.lam})]
    write_csv(out / "estimate-chi.csv", "estimate-chi", rows)
    write_manifest(out / "estimate-chi.json", "estimate-chi", cfg, rows[0],
                   ["estimate-chi.csv"])
    return 0


def _cmd_estimate_tail(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    rep = estimate_tail(fc, cfg["y_grid"], int(cfg["replicas"]),
                        ball_cap=int(cfg["ball_cap"]), R=float(cfg["R"]),
                        vol_n=int(cfg["vol_n"]), workers=workers)
    rows = [
        {"y": float(y), "raw": e.value, "raw_se": e.standard_error,
         "corrected": float(c), "replicas": e.replicas,
         "censored_fraction": e.censored_fraction}
        for y, e, c in zip(rep.y_grid, rep.raw, rep.corrected)
    ]
    write_csv(out / "estimate-tail.csv", "estimate-tail", rows)
    result = {"chi": rep.chi.value, "chi_se": rep.chi.standard_error, "rows": rows}
    write_manifest(out / "estimate-tail.json", "estimate-tail", cfg, result,
                   ["estimate-tail.csv"])
    return 0


def _cmd_estimate_magnetization(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    est = estimate_magnetization(fc, float(cfg["rho"]), int(cfg["replicas"]),
                                 method=str(cfg["method"]), ball_cap=int(cfg["ball_cap"]),
                                 R=float(cfg["R"]), vol_n=int(cfg["vol_n"]), workers=workers)
    rows = [_estimate_row(est,
                          {"lam": fc.lam, "rho": float(cfg["rho"]), "method": cfg["method"]})]
    write_csv(out / "estimate-magnetization.csv", "estimate-magnetization", rows)
    write_manifest(out / "estimate-magnetization.json", "estimate-magnetization",
                   cfg, rows[0], ["estimate-magnetization.csv"])
    return 0


def _cmd_find_lambda_c(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    bracket = cfg["bracket"]
    try:
        res = find_lambda_c(
            fc, cfg["R_ladder"], float(cfg["crossing_target"]), float(cfg["tolerance"]),
            replicas_per_eval=int(cfg["replicas_per_eval"]),
            bracket=None if bracket is None else (float(bracket[0]), float(bracket[1])),
            eps_trunc=float(cfg["eps_trunc"]), workers=workers,
        )
    except NonBracketingError as e:
        rows = [{"R": R, "lam": lam, "theta": th, "theta_se": se}
                for R, lam, th, se in e.evaluations]
        write_csv(out / "find-lambda-c.csv", "find-lambda-c", rows,
                  ["R", "lam", "theta", "theta_se"])
        result = {"status": "non_bracketing", "message": str(e)}
        write_manifest(out / "find-lambda-c.json", "find-lambda-c", cfg, result,
                       ["find-lambda-c.csv"])
        return 0
    rows = [{"R": R, "lam": lam, "theta": th, "theta_se": se}
            for R, lam, th, se in res.evaluations]
    write_csv(out / "find-lambda-c.csv", "find-lambda-c", rows,
              ["R", "lam", "theta", "theta_se"])
    result = {
        "status": "ok",
        "estimate": res.estimate,
        "bracket": list(res.bracket),
        "R": res.R,
        "per_R": {repr(k): v for k, v in res.per_R.items()},
        "replicas_per_eval": res.replicas_per_eval,
    }
    write_manifest(out / "find-lambda-c.json", "find-lambda-c", cfg, result,
                   ["find-lambda-c.csv"])
    return 0


def _checker_from_config(cfg: dict) -> CheckerConfig:
    ch = cfg["checker"]
    return CheckerConfig(
        lambda_c_hat=float(ch["lambda_c_hat"]),
        lambda_grid=tuple(float(v) for v in ch["lambda_grid"]),
        y_grid=tuple(float(v) for v in ch["y_grid"]),
        rho_grid=tuple(float(v) for v in ch["rho_grid"]),
        beta0=float(ch["beta0"]),
        c0=float(ch["c0"]),
    )


def _cmd_check_susceptibility(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    rep = check_theorem_susceptibility(
        fc, _checker_from_config(cfg),
        replicas=int(cfg["replicas"]), theta_replicas=int(cfg["theta_replicas"]),
        critical_replicas=int(cfg["critical_replicas"]), R=float(cfg["R"]),
        theta_R=float(cfg["theta_R"]), ball_cap=int(cfg["ball_cap"]),
        vol_n=int(cfg["vol_n"]), workers=workers,
    )
    write_csv(out / "check-susceptibility.csv", "check-susceptibility", rep.rows)
    result = {"constants": rep.constants, "passed": rep.passed,
              "excluded": rep.excluded, "details": rep.details}
    write_manifest(out / "check-susceptibility.json", "check-susceptibility", cfg,
                   result, ["check-susceptibility.csv"])
    return 0


def _cmd_check_tail(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    rep = check_theorem_tail(
        fc, _checker_from_config(cfg),
        replicas=int(cfg["replicas"]), critical_replicas=int(cfg["critical_replicas"]),
        R=float(cfg["R"]), ball_cap=int(cfg["ball_cap"]),
        vol_n=int(cfg["vol_n"]), workers=workers,
    )
    write_csv(out / "check-tail.csv", "check-tail", rep.rows)
    result = {"constants": rep.constants, "passed": rep.passed,
              "excluded": rep.excluded, "details": rep.details}
    write_manifest(out / "check-tail.json", "check-tail", cfg, result, ["check-tail.csv"])
    return 0


def _cmd_check_magnetization(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    rep = check_theorem_magnetization(
        fc, _checker_from_config(cfg),
        replicas=int(cfg["replicas"]), critical_replicas=int(cfg["critical_replicas"]),
        R=float(cfg["R"]), ball_cap=int(cfg["ball_cap"]),
        vol_n=int(cfg["vol_n"]), workers=workers,
    )
    write_csv(out / "check-magnetization.csv", "check-magnetization", rep.rows)
    result = {"constants": rep.constants, "passed": rep.passed,
              "excluded": rep.excluded, "details": rep.details}
    write_manifest(out / "check-magnetization.json", "check-magnetization", cfg,
                   result, ["check-magnetization.csv"])
    return 0


def _cmd_check_entropic(cfg, out: Path, workers) -> int:
    fc = _field_config(cfg)
    event = _event_from_config(cfg)
    aux = cfg["aux_replicas"]
    rep = check_entropic_bound(
        fc, event, float(cfg["l1"]), float(cfg["l2"]), int(cfg["replicas"]),
        max_steps=int(cfg["max_steps"]), vol_n=int(cfg["vol_n"]),
        aux_replicas=None if aux is None else int(aux), workers=workers,
    )
    row = {
        "l1": rep.l1, "l2": rep.l2,
        "p1": rep.p1.value, "p1_se": rep.p1.standard_error,
        "p2": rep.p2.value, "p2_se": rep.p2.standard_error,
        "gap": rep.gap, "gap_se": rep.gap_se,
        "pvol": rep.pvol.value, "pvol_se": rep.pvol.standard_error,
        "rhs_gap": rep.rhs_gap, "rhs_gap_widened": rep.rhs_gap_widened,
        "gap_holds": rep.gap_holds,
        "log_ratio": rep.log_ratio, "rhs_log": rep.rhs_log, "log_holds": rep.log_holds,
        "truncated_fraction": rep.truncated_fraction, "flagged": rep.flagged,
        "ratio_chi": rep.ratio_chi,
        "ratio_tail_integral": rep.ratio_tail_integral,
        "ratio_magnetization": rep.ratio_magnetization,
    }
    write_csv(out / "check-entropic.csv", "check-entropic", [row])
    write_manifest(out / "check-entropic.json", "check-entropic", cfg, row,
                   ["check-entropic.csv"])
    return 0


# -- entropy self-test --------------------------------------------------------


def _selftest_poisson_closed_form() -> tuple[bool, str]:
    from scipy.stats import poisson

    grid = [0.1, 0.5, 1.0, 2.0, 5.0]
    worst = 0.0
    for l1 in grid:
        for l2 in grid:
            ks = np.arange(0, int(poisson.ppf(1.0 - 1e-16, l1)) + 60)
            p = poisson.pmf(ks, l1)
            q = poisson.pmf(ks, l2)
            mask = p > 0
            oracle = float(np.sum(p[mask] * np.log(p[mask] / q[mask])))
            worst = max(worst, abs(kl_poisson(l1, l2) - oracle))
    return worst <= 1e-9, f"max |closed - sum| = {worst:.3e}"


def _selftest_process_bound() -> tuple[bool, str]:
    bad = 0
    for m in (0.5, 1.0, 2.0, 4.0, 8.0):
        for l1 in (0.2, 0.5, 1.0, 2.0, 5.0):
            for l2 in (0.2, 0.5, 1.0, 2.0, 5.0):
                lhs = kl_poisson(m * l1, m * l2)
                rhs = kl_process_bound(m, l1, l2)
                if lhs > rhs * (1 + 1e-12) + 1e-15:
                    bad += 1
    return bad == 0, f"violations = {bad}/125"


def _selftest_event_bounds(seed: int) -> tuple[bool, str]:
    rng = substream(seed, "selftest-events")
    bad = 0
    trials = 200
    for _ in range(trials):
        k = int(rng.integers(2, 5))
        p = rng.dirichlet(np.ones(k))
        q = rng.dirichlet(np.ones(k))
        kl = kl_discrete(p, q)
        for mask in range(1, 2**k - 1):
            sel = [(mask >> j) & 1 == 1 for j in range(k)]
            pa, qa = float(np.sum(p[sel])), float(np.sum(q[sel]))
            if abs(pa - qa) > pinsker_gap_bound(pa, qa, kl) + 1e-12:
                bad += 1
            if pa > 0 and qa > 0 and math.log(pa / qa) > log_ratio_bound(pa, kl) + 1e-12:
                bad += 1
    return bad == 0, f"violations = {bad} over {trials} law pairs"


def _selftest_stopped_identity(seed: int) -> tuple[bool, str]:
    rng = substream(seed, "selftest-stopped")

    def laws(n, sizes):
        lx, ly = [], []
        for s in sizes:
            lx.append(FiniteLaw(tuple(rng.dirichlet(np.ones(s)))))
            ly.append(FiniteLaw(tuple(rng.dirichlet(np.ones(s)))))
        return lx, ly

    worst = 0.0
    # fixed-order full reveal
    for sizes in ((2, 2), (3, 2, 2)):
        n = len(sizes)
        tree = DecisionTree(n, lambda pre: len(pre), lambda pre: len(pre) >= n)
        lx, ly = laws(n, sizes)
        rep = stopped_kl_identity_check(tree, lx, ly)
        worst = max(worst, abs(rep.lhs - rep.rhs))
    # adaptive order and adaptive stopping
    def sel3(pre):
        used = []
        vals = list(pre)
        for step in range(len(pre) + 1):
            avail = [i for i in range(3) if i not in used]
            pick = avail[(sum(vals[:step]) + step) % len(avail)]
            if step == len(pre):
                return pick
            used.append(pick)

    def stop3(pre):
        return len(pre) >= 3 or (len(pre) >= 1 and pre[0] == 0)

    for _ in range(3):
        lx, ly = laws(3, (2, 3, 2))
        rep = stopped_kl_identity_check(tree=DecisionTree(3, sel3, stop3),
                                        components_x=lx, components_y=ly)
        worst = max(worst, abs(rep.lhs - rep.rhs))
    return worst <= 1e-9, f"max |lhs - rhs| = {worst:.3e}"


def _cmd_entropy_selftest(cfg, out: Path, workers) -> int:
    seed = int(cfg["seed"])
    checks = [
        ("poisson_kl_closed_form", *_selftest_poisson_closed_form()),
        ("process_kl_bound", *_selftest_process_bound()),
        ("finite_event_bounds", *_selftest_event_bounds(seed)),
        ("stopped_sequence_identity", *_selftest_stopped_identity(seed)),
    ]
    rows = [{"check": name, "passed": ok, "detail": detail} for name, ok, detail in checks]
    width = max(len(r["check"]) for r in rows)
    for r in rows:
        print(f"{r['check']:<{width}}  {'PASS' if r['passed'] else 'FAIL'}  {r['detail']}")
    write_csv(out / "entropy-selftest.csv", "entropy-selftest", rows,
              ["check", "passed", "detail"])
    write_manifest(out / "entropy-selftest.json", "entropy-selftest", cfg,
                   {"rows": rows, "passed": all(r["passed"] for r in rows)},
                   ["entropy-selftest.csv"])
    return 0 if all(r["passed"] for r in rows) else 1


HANDLERS = {
    "sample": _cmd_sample,
    "explore": _cmd_explore,
    "reveal": _cmd_reveal,
    "estimate-theta": _cmd_estimate_theta,
    "estimate-chi": _cmd_estimate_chi,
    "estimate-tail": _cmd_estimate_tail,
    "estimate-magnetization": _cmd_estimate_magnetization,
    "find-lambda-c": _cmd_find_lambda_c,
    "check-susceptibility": _cmd_check_susceptibility,
    "check-tail": _cmd_check_tail,
    "check-magnetization": _cmd_check_magnetization,
    "check-entropic": _cmd_check_entropic,
    "entropy-selftest": _cmd_entropy_selftest,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="boolperc",
        description="Simulation laboratory for Poisson-Boolean continuum percolation.",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in HANDLERS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config value (dotted keys for nesting)")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker processes (default: BOOLPERC_WORKERS or 1)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    out_dir = args.out or os.environ.get("BOOLPERC_OUTDIR", ".")
    out = Path(out_dir)
    try:
        cfg = load_config(args.subcommand, args.config, args.set)
        out.mkdir(parents=True, exist_ok=True)
        return HANDLERS[args.subcommand](cfg, out, args.workers)
    except MomentConditionError as e:
        print(json.dumps({"error": {"type": "moment_condition", "message": str(e)}}),
              file=sys.stderr)
        return 2
    except (CLIConfigError, ValueError, OSError, json.JSONDecodeError) as e:
        print(json.dumps({"error": {"type": type(e).__name__, "message": str(e)}}),
              file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
