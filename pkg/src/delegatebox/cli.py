"""Command-line front end: eval | audit | repro | gen.

Environment overrides use the DELEGATEBOX_ prefix (FORMAT, MODE, LIMIT, SEED,
TRIALS) and are beaten by explicit flags. Errors print a machine-readable
record and exit 2; audit and repro exit 1 when a check fails.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import random
import sys
from fractions import Fraction
from pathlib import Path
from typing import Optional

from . import bounds, delegation, instances, pandora, repro
from .core import (
    DEFAULT_ENUMERATION_LIMIT,
    DelegateboxError,
    Instance,
    InvalidParameters,
    as_number,
    format_number,
    instance_digest,
    instance_from_json,
    instance_to_obj,
)

MECHANISMS = ("pnoi", "spmi", "maximal", "costly", "identical", "weitzman")
REGIMES = (bounds.COSTLESS, bounds.COSTLY, bounds.IDENTICAL)


def _env(name: str, default=None):
    return os.environ.get(f"DELEGATEBOX_{name}", default)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="delegatebox",
        description="Evaluate and audit delegation mechanisms with inspection costs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--instance", help="path to an instance JSON file")
        p.add_argument("--family", choices=instances.FAMILIES, help="generate instead of reading")
        p.add_argument("--n", type=int)
        p.add_argument("--p")
        p.add_argument("--v")
        p.add_argument("--c")
        p.add_argument("--eps")
        p.add_argument("--support-size", type=int, default=3)
        p.add_argument("--value-max", type=int, default=8)
        p.add_argument("--cost-max", type=int, default=2)
        p.add_argument("--cdel-max", type=int, default=0)
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--exact", action="store_true")
        mode.add_argument("--float", dest="float_mode", action="store_true")
        p.add_argument("--limit", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--format", choices=("table", "json"), default=None)

    p_eval = sub.add_parser("eval", help="evaluate one mechanism on an instance")
    common(p_eval)
    p_eval.add_argument("--mechanism", choices=MECHANISMS, required=True)
    p_eval.add_argument("--trials", type=int, default=None, help="Monte Carlo sample count")

    p_audit = sub.add_parser("audit", help="check a mechanism against its claimed factor")
    common(p_audit)
    p_audit.add_argument("--regime", choices=REGIMES, required=True)
    p_audit.add_argument("--alpha", default=None)
    p_audit.add_argument("--mechanism", choices=MECHANISMS, default=None)

    p_repro = sub.add_parser("repro", help="run the fixed suite of headline claims")
    p_repro.add_argument("--seed", type=int, default=None)
    p_repro.add_argument("--format", choices=("table", "json"), default=None)

    p_gen = sub.add_parser("gen", help="write an instance JSON")
    common(p_gen)
    p_gen.add_argument("--out", help="output path (default: stdout)")

    return parser


def _resolve_format(args) -> str:
    return getattr(args, "format", None) or _env("FORMAT", "table")


def _resolve_mode(args) -> str:
    if getattr(args, "float_mode", False):
        return "float"
    if getattr(args, "exact", False):
        return "exact"
    return _env("MODE", "exact")


def _resolve_limit(args) -> int:
    if getattr(args, "limit", None) is not None:
        return args.limit
    env = _env("LIMIT")
    return int(env) if env else DEFAULT_ENUMERATION_LIMIT


def _resolve_seed(args) -> Optional[int]:
    if getattr(args, "seed", None) is not None:
        return args.seed
    env = _env("SEED")
    return int(env) if env else None


def _generator_spec(args) -> instances.GeneratorSpec:
    family = args.family
    params: dict = {}
    if family == "identical_binary":
        params = {"n": args.n or 6, "p": args.p or "1/6", "v": args.v or 1, "c": args.c or "1/3"}
    elif family == "tightness":
        params = {"eps": args.eps or "1/100"}
    elif family == "inapprox_first_best":
        params = {"n": args.n or 10}
    elif family == "info_value":
        params = {"n": args.n or 5, "eps": args.eps or "1/100"}
    elif family == "spmi_fail":
        params = {"n": args.n or 2}
    elif family == "random":
        seed = _resolve_seed(args)
        if seed is None:
            raise InvalidParameters("random family needs --seed")
        params = {
            "seed": seed,
            "n": args.n or 3,
            "support_size": args.support_size,
            "value_max": args.value_max,
            "cost_max": args.cost_max,
            "cdel_max": args.cdel_max,
        }
    return instances.GeneratorSpec(family, params)


def _load_instance(args) -> tuple[Instance, Optional[dict]]:
    mode = _resolve_mode(args)
    if args.instance and args.family:
        raise InvalidParameters("give either --instance or --family, not both")
    if args.instance:
        text = Path(args.instance).read_text()
        return instance_from_json(text, mode), None
    if args.family:
        spec = _generator_spec(args)
        generated = instances.gen(spec)
        inst = generated.instance if mode == "exact" else generated.instance.to_float()
        meta = {"family": spec.family, "params": {k: str(v) for k, v in spec.params.items()}}
        return inst, meta
    raise InvalidParameters("need --instance PATH or --family NAME")


def _enc(x):
    if isinstance(x, Fraction):
        return format_number(x)
    if isinstance(x, dict):
        return {k: _enc(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_enc(v) for v in x]
    return x


def _emit(obj: dict, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(obj, sort_keys=True))
        return
    for key, value in obj.items():
        if key == "rows":
            for row in value:
                mark = "pass" if row["pass"] else "FAIL"
                print(f"[{mark}] {row['name']}")
                for k, v in row["details"].items():
                    print(f"        {k} = {v}")
        else:
            print(f"{key}: {value}")


def _mechanism_report(inst: Instance, name: str, limit: int):
    if name == "pnoi":
        value, _ = pandora.pnoi_optimal(inst)
        return {"mechanism": "pnoi", "value": value}
    if name == "weitzman":
        return {"mechanism": "weitzman", "value": pandora.weitzman_value(inst, limit)}
    if name == "spmi":
        spmi = delegation.build_spmi(inst)
        value = delegation.evaluate_spmi(inst, spmi, limit=limit)
        return {
            "mechanism": "spmi",
            "value": value,
            "threshold": spmi.threshold,
            "agent_model": "worst_case",
        }
    report = {
        "maximal": delegation.maximal_mechanism_costless,
        "costly": delegation.costly_mechanism,
        "identical": delegation.identical_cost_mechanism,
    }[name](inst)
    out = report.to_obj()
    out["mechanism"] = name
    return out


def _composed_report(inst: Instance, name: str):
    return {
        "maximal": delegation.maximal_mechanism_costless,
        "costly": delegation.costly_mechanism,
        "identical": delegation.identical_cost_mechanism,
    }[name](inst)


def _monte_carlo_value(inst: Instance, name: str, trials: int, seed: int) -> dict:
    # Sampling estimate for instances too large to enumerate; audits never
    # rely on this path.
    rng = random.Random(seed)
    if name == "spmi":
        spmi = delegation.build_spmi(inst)
        threshold = spmi.threshold
        costs = inst.singleton_costs()

        def payoff(values):
            eligible = [values[i] - costs[i] for i in range(inst.n)
                        if values[i] - costs[i] >= threshold]
            gross = min(eligible) if eligible else 0.0
            return gross - float(inst.delegation_cost)

    elif name == "weitzman":
        caps = pandora.instance_caps(inst)
        order = sorted(range(inst.n), key=lambda i: (-float(caps[i].sigma), i))
        costs = [float(alt.inspect_cost) for alt in inst.alternatives]

        def payoff(values):
            best, paid = 0.0, 0.0
            for i in order:
                if best >= float(caps[i].sigma):
                    break
                paid += costs[i]
                best = max(best, values[i])
            return best - paid

    else:
        raise InvalidParameters(f"no sampling evaluator for mechanism {name!r}")

    dists = [alt.dist for alt in inst.alternatives]
    supports = [[float(v) for v in d.values] for d in dists]
    weights = [[float(p) for p in d.probs] for d in dists]
    samples = []
    for _ in range(trials):
        values = tuple(
            rng.choices(supports[i], weights=weights[i])[0] for i in range(inst.n)
        )
        samples.append(payoff(values))
    mean = sum(samples) / trials
    var = sum((s - mean) ** 2 for s in samples) / max(trials - 1, 1)
    band = 3 * math.sqrt(var / trials)
    return {
        "mechanism": name,
        "value_estimate": mean,
        "three_se_band": [mean - band, mean + band],
        "trials": trials,
        "seed": seed,
    }


def _cmd_eval(args) -> int:
    inst, meta = _load_instance(args)
    fmt = _resolve_format(args)
    limit = _resolve_limit(args)
    if args.trials is not None:
        seed = _resolve_seed(args)
        if seed is None:
            raise InvalidParameters("Monte Carlo mode needs --seed")
        out = _monte_carlo_value(inst, args.mechanism, args.trials, seed)
    else:
        out = _mechanism_report(inst, args.mechanism, limit)
    out = _enc(out)
    out["schema"] = repro.SUITE_VERSION
    out["instance_digest"] = instance_digest(inst)
    out["arithmetic_mode"] = inst.mode
    if meta:
        out["generator"] = meta
    _emit(out, fmt)
    return 0


def _cmd_audit(args) -> int:
    inst, meta = _load_instance(args)
    fmt = _resolve_format(args)
    mechanism = args.mechanism or {
        bounds.COSTLESS: "maximal",
        bounds.COSTLY: "costly",
        bounds.IDENTICAL: "identical",
    }[args.regime]
    if mechanism not in ("maximal", "costly", "identical"):
        raise InvalidParameters("audit needs a composed mechanism (maximal|costly|identical)")
    report = _composed_report(inst, mechanism)
    alpha = as_number(args.alpha, inst.mode) if args.alpha is not None else None
    audit_report = bounds.audit(inst, report, args.regime, alpha)
    out = audit_report.to_obj()
    out["schema"] = repro.SUITE_VERSION
    out["mechanism"] = mechanism
    if meta:
        out["generator"] = meta
    _emit(_enc(out), fmt)
    return 0 if audit_report.passed else 1


def _cmd_repro(args) -> int:
    fmt = args.format or _env("FORMAT", "table")
    seed = args.seed if args.seed is not None else int(_env("SEED", "7"))
    result = repro.run_repro(seed)
    _emit(result, fmt)
    return 0 if result["all_pass"] else 1


def _cmd_gen(args) -> int:
    if not args.family:
        raise InvalidParameters("gen needs --family")
    spec = _generator_spec(args)
    generated = instances.gen(spec)
    obj = {
        "schema": repro.SUITE_VERSION,
        "generator": {"family": spec.family, "params": {k: str(v) for k, v in spec.params.items()}},
        "instance": instance_to_obj(generated.instance),
        "instance_digest": instance_digest(generated.instance),
    }
    if generated.mechanism is not None:
        obj["mechanism"] = delegation.mechanism_to_obj(generated.mechanism)
    text = json.dumps(obj, sort_keys=True, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
        print(f"wrote {args.out}")
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "eval": _cmd_eval,
        "audit": _cmd_audit,
        "repro": _cmd_repro,
        "gen": _cmd_gen,
    }
    try:
        return handlers[args.command](args)
    except DelegateboxError as exc:
        record = {"error": {"type": type(exc).__name__, "message": str(exc)}}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2
    except OSError as exc:
        record = {"error": {"type": "IOError", "message": str(exc)}}
        print(json.dumps(record, sort_keys=True), file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
