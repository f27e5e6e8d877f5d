#!/usr/bin/env python3
"""End-to-end demo: build, lift, and evaluate the ordinary level-55 system.

Prints the distribution's values on the shipped character battery together
with the classical cross-checks, then does the same for the non-ordinary
weight-four fixture.  Artifacts land under out/demo.
"""

import time

from padiclf.lfunction import build_mu, ev_phi, _to_ctx
from padiclf.pipeline import JobConfig, build_symbol, lift_symbol, load_battery, _DATA
from padiclf.rayclass import Modulus, build_ray_class_group


def run(config_name: str):
    print(f"=== {config_name} ===")
    cfg = JobConfig.load(_DATA / "configs" / f"{config_name}.json")
    t0 = time.time()
    bundle = build_symbol(cfg)
    print(f"classical eigensymbol built ({time.time() - t0:.1f}s); "
          f"eigenvalue valuation {bundle.eigenvalue.valuation()}")
    t0 = time.time()
    lifted = lift_symbol(bundle, cfg)
    rep = lifted.report
    print(f"lifted in {rep.iterations} iterations ({time.time() - t0:.1f}s); "
          f"filtration depth {rep.filtration_depth}, "
          f"denominator exponent {lifted.scale_exponent}")
    sym = lifted.symbol
    group = build_ray_class_group(sym.field, Modulus(cfg.modulus))
    mu = build_mu(lifted.psi, sym.eigenvalue, Modulus(cfg.modulus), sym.ctx,
                  group=group, check_eigen=False)
    chars, _ = load_battery(sym.field, cfg.characters_path, cfg.N + cfg.M + 8)
    for chi in chars:
        r = sum(chi.infinity_type.values())
        if not 0 <= r - sym.weight.v[0] <= sym.weight.k[0]:
            continue
        if not chi.conductor.divides(Modulus(cfg.modulus)):
            continue
        val = mu.evaluate_character(chi)
        v = val.valuation()
        print(f"  mu({chi.name}) valuation: {v}")
        # classical cross-check when the conductor matches the modulus support
        nexp = chi.conductor.exponents[0]
        if nexp:
            g = build_ray_class_group(sym.field, chi.conductor)
            mu_c = build_mu(lifted.psi, sym.eigenvalue, chi.conductor, sym.ctx,
                            group=g, check_eigen=False)
            rhs = _to_ctx(sym.eigenvalue ** nexp, chi.ctx).inverse() * ev_phi(
                sym.phi, chi, g, normalization=2)
            match = (mu_c.evaluate_character(chi) - rhs).is_zero_at_precision()
            print(f"    classical interpolation cross-check: {match}")


if __name__ == "__main__":
    run("control_11a_p5")
    run("wt4_lv5_p5")
