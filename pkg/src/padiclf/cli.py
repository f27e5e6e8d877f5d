"""Command-line driver.

Verbs: field validate, symbol build, symbol lift, lfun compute, lfun eval,
verify <suite>.  All outputs are canonical JSON with content hashes;
identical configurations reproduce bit-identical files, and lfun compute
reuses a persisted lift when the config hash matches.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .fields import FieldDataError, load_field
from .lifting import LiftReport
from .pipeline import ConfigError, JobConfig, build_symbol, lift_symbol, load_battery
from .rayclass import Modulus, build_ray_class_group
from .serialize import (
    dual_record,
    element_record,
    moments_from_record,
    moments_record,
    read_record,
    write_record,
)
from .symbols import ModularSymbol
from .verify import SUITES, run_suite


def _symbol_metadata(cfg: JobConfig, bundle) -> dict:
    return {
        "field": bundle.field.name,
        "p": bundle.field.p,
        "level": cfg.level,
        "weight_k": cfg.weight_k,
        "weight_v": cfg.weight_v,
        "M": cfg.M,
        "N": cfg.N,
        "uniformizers": [list(q.uniformizer_coords) for q in bundle.field.primes_above_p],
        "config_hash": cfg.config_hash(),
        "eigen": bundle.eigen_meta,
    }


def cmd_field_validate(args) -> int:
    cfg_path = Path(args.config)
    try:
        with open(cfg_path) as fh:
            data = json.load(fh)
        if "field" in data:
            from .pipeline import _resolve

            field_path = _resolve(data["field"], "fields")
        else:
            field_path = cfg_path
        field = load_field(field_path)
    except (FieldDataError, ConfigError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"INVALID: {exc}")
        return 2
    print(f"OK: {field.name} (degree {field.degree}, p = {field.p}, "
          f"{len(field.primes_above_p)} primes above p)")
    return 0


def cmd_symbol_build(args) -> int:
    cfg = JobConfig.load(args.config, precision=args.precision,
                         moments=args.moments, out=args.out, seed=args.seed)
    bundle = build_symbol(cfg)
    record = {
        "kind": "classical-symbol",
        "schema_version": 1,
        "metadata": _symbol_metadata(cfg, bundle),
        "eigenvalue": element_record(bundle.eigenvalue),
        "values": [dual_record(v) for v in bundle.phi.values],
    }
    out = cfg.out_dir / "symbol.json"
    h = write_record(out, record)
    print(f"wrote {out} ({h[:16]})")
    return 0


def _lift_record(cfg: JobConfig, bundle, lifted) -> dict:
    rep = lifted.report
    return {
        "kind": "overconvergent-lift",
        "schema_version": 1,
        "metadata": _symbol_metadata(cfg, bundle),
        "scale_exponent": lifted.scale_exponent,
        "working_N": lifted.working_N,
        "report": {
            "iterations": rep.iterations,
            "filtration_depth": rep.filtration_depth,
            "specialization_residual": rep.specialization_residual,
            "eigen_residuals": rep.eigen_residuals,
            "converged": rep.converged,
        },
        "eigenvalue": element_record(bundle.eigenvalue),
        "values": [moments_record(v) for v in lifted.psi.values],
    }


def cmd_symbol_lift(args) -> int:
    cfg = JobConfig.load(args.config, precision=args.precision,
                         moments=args.moments, out=args.out, seed=args.seed)
    bundle = build_symbol(cfg)
    lifted = lift_symbol(bundle, cfg)
    out = cfg.out_dir / "lift.json"
    h = write_record(out, _lift_record(cfg, bundle, lifted))
    rep = lifted.report
    print(f"wrote {out} ({h[:16]}); iterations {rep.iterations}, "
          f"filtration depth {rep.filtration_depth}, "
          f"residuals spec={rep.specialization_residual} eig={rep.eigen_residuals}")
    return 0


def _load_or_make_lift(cfg: JobConfig):
    bundle = build_symbol(cfg)
    lift_path = cfg.out_dir / "lift.json"
    if lift_path.exists():
        try:
            record = read_record(lift_path)
            if record["metadata"]["config_hash"] == cfg.config_hash():
                values = [moments_from_record(r) for r in record["values"]]
                psi = ModularSymbol(bundle.space, values, "moments")
                print(f"reusing persisted lift {lift_path}")
                scale = record["scale_exponent"]
                phi_scaled = bundle.phi.map_values(
                    lambda v: v.scale(bundle.field.p ** scale)
                ) if scale else bundle.phi
                from .pipeline import SymbolBundle

                scaled = SymbolBundle(bundle.field, bundle.weight, bundle.space,
                                      phi_scaled, bundle.eigenvalue, bundle.ctx,
                                      bundle.eigen_meta)
                from .pipeline import LiftBundle

                rep = LiftReport(**record["report"])
                return cfg, LiftBundle(scaled, psi, rep, scale, record["working_N"])
        except (ValueError, KeyError) as exc:
            print(f"persisted lift unusable ({exc}); recomputing")
    lifted = lift_symbol(bundle, cfg)
    write_record(cfg.out_dir / "lift.json", _lift_record(cfg, bundle, lifted))
    return cfg, lifted


def cmd_lfun_compute(args) -> int:
    cfg = JobConfig.load(args.config, precision=args.precision,
                         moments=args.moments, out=args.out, seed=args.seed)
    cfg, lifted = _load_or_make_lift(cfg)
    sym = lifted.symbol
    from .lfunction import build_mu

    group = build_ray_class_group(sym.field, Modulus(cfg.modulus))
    mu = build_mu(lifted.psi, sym.eigenvalue, Modulus(cfg.modulus), sym.ctx,
                  group=group, check_eigen=False)
    record = mu.to_record()
    record.update({
        "kind": "ray-class-distribution",
        "schema_version": 1,
        "metadata": _symbol_metadata(cfg, sym),
        "scale_exponent": lifted.scale_exponent,
        "growth_diagnostics": mu.growth_diagnostics(),
    })
    out = cfg.out_dir / "mu.json"
    h = write_record(out, record)
    print(f"wrote {out} ({h[:16]})")
    return 0


def cmd_lfun_eval(args) -> int:
    cfg = JobConfig.load(args.config, precision=args.precision,
                         moments=args.moments, out=args.out, seed=args.seed)
    cfg, lifted = _load_or_make_lift(cfg)
    sym = lifted.symbol
    from .lfunction import build_mu

    group = build_ray_class_group(sym.field, Modulus(cfg.modulus))
    mu = build_mu(lifted.psi, sym.eigenvalue, Modulus(cfg.modulus), sym.ctx,
                  group=group, check_eigen=False)
    chars, _ = load_battery(sym.field, cfg.characters_path, cfg.N + cfg.M + 8)
    rows = []
    for chi in chars:
        r = sum(chi.infinity_type.values())
        critical = 0 <= r - sym.weight.v[0] <= sym.weight.k[0]
        compatible = chi.conductor.divides(Modulus(cfg.modulus))
        if not (critical and compatible):
            rows.append({"character": chi.name, "status": "skipped",
                         "reason": "non-critical" if not critical else "conductor"})
            continue
        val = mu.evaluate_character(chi)
        rows.append({"character": chi.name, "status": "evaluated",
                     "value": element_record(val)})
        print(f"{chi.name}: v = {val.valuation()} (precision {val.prec})")
    record = {
        "kind": "evaluation-report",
        "schema_version": 1,
        "metadata": _symbol_metadata(cfg, sym),
        "scale_exponent": lifted.scale_exponent,
        "rows": rows,
    }
    out = cfg.out_dir / "eval.json"
    h = write_record(out, record)
    print(f"wrote {out} ({h[:16]})")
    return 0


def cmd_verify(args) -> int:
    checks = run_suite(args.suite, config_path=args.config, seed=args.seed or 0)
    failed = 0
    for name, passed, detail in checks:
        status = "PASS" if passed else "FAIL"
        line = f"{status} {name}"
        if detail:
            line += f" -- {detail}"
        print(line)
        if not passed:
            failed += 1
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="padiclf",
        description="exact p-adic L-functions of small-slope eigensymbols",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    def common(p):
        p.add_argument("--config", required=False)
        p.add_argument("--precision", type=int, default=None)
        p.add_argument("--moments", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--seed", type=int, default=None)

    p_field = sub.add_parser("field", help="field data commands")
    field_sub = p_field.add_subparsers(dest="action", required=True)
    pv = field_sub.add_parser("validate")
    common(pv)
    pv.set_defaults(fn=cmd_field_validate)

    p_sym = sub.add_parser("symbol", help="classical and overconvergent symbols")
    sym_sub = p_sym.add_subparsers(dest="action", required=True)
    pb = sym_sub.add_parser("build")
    common(pb)
    pb.set_defaults(fn=cmd_symbol_build)
    pl = sym_sub.add_parser("lift")
    common(pl)
    pl.set_defaults(fn=cmd_symbol_lift)

    p_lf = sub.add_parser("lfun", help="ray class distribution")
    lf_sub = p_lf.add_subparsers(dest="action", required=True)
    pc = lf_sub.add_parser("compute")
    common(pc)
    pc.set_defaults(fn=cmd_lfun_compute)
    pe = lf_sub.add_parser("eval")
    common(pe)
    pe.set_defaults(fn=cmd_lfun_eval)

    p_ver = sub.add_parser("verify", help="named verification suites")
    p_ver.add_argument("suite", choices=sorted(SUITES))
    common(p_ver)
    p_ver.set_defaults(fn=cmd_verify)

    args = parser.parse_args(argv)
    if getattr(args, "fn", None) is cmd_field_validate and not args.config:
        parser.error("field validate requires --config")
    if args.fn in (cmd_symbol_build, cmd_symbol_lift, cmd_lfun_compute, cmd_lfun_eval):
        if not args.config:
            parser.error("this command requires --config")
    try:
        return args.fn(args)
    except (ConfigError, FieldDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
