"""Named verification suites: each check returns (name, passed, detail).

These are the executable forms of the library's correctness claims: the
commuting diagram between overconvergent and classical evaluations, the
eigenvalue compatibility of the distribution across moduli, independence
of representative choices, Gauss-sum brute force, the constructive control
theorem, and the interpolation identities.
"""

from __future__ import annotations

import random
from functools import lru_cache

from .characters import DifferentChoice, HeckeCharacter, gauss_sum, twisted_gauss_sum
from .fields import load_builtin_field
from .lfunction import (
    build_mu,
    ev_classical_2,
    ev_phi,
    interpolation_multiplier,
    unramified_extension_identity,
    _to_ctx,
)
from .lifting import LiftNonConvergence, iterate_control, prepare_lift
from .padics import cyclotomic_context, qp_context
from .pipeline import JobConfig, build_symbol, lift_symbol, load_battery
from .rayclass import Modulus, build_ray_class_group, compatible_representatives


@lru_cache(maxsize=4)
def _pipeline(config_path: str, seed: int = 0):
    cfg = JobConfig.load(config_path, seed=seed)
    bundle = build_symbol(cfg)
    lifted = lift_symbol(bundle, cfg)
    return cfg, lifted


def _builtin_config(name: str) -> str:
    from .pipeline import _DATA

    return str(_DATA / "configs" / f"{name}.json")


def _mu_at(lifted, exponents, group=None):
    sym = lifted.symbol
    return build_mu(
        lifted.psi, sym.eigenvalue, Modulus(exponents), sym.ctx, group=group,
        check_eigen=False,
    )


def suite_diagram(config_path=None, seed=0):
    cfg, lifted = _pipeline(config_path or _builtin_config("control_11a_p5"), seed)
    sym = lifted.symbol
    k = sym.weight.k[0]
    checks = []
    for nexp in (1, 2):
        mod = Modulus((nexp,))
        group = build_ray_class_group(sym.field, mod)
        mu = _mu_at(lifted, (nexp,), group)
        ok = True
        for label in group.class_labels:
            aff = mu.affine_evaluator(label)
            alpha = group.representatives[label][0]
            for j in range(k + 1):
                lhs = aff.moment_element((k - j,), sym.ctx)
                rhs = ev_classical_2(sym.phi, mod, j, alpha)
                if not (lhs - rhs).is_zero_at_precision():
                    ok = False
        checks.append((
            f"diagram f=(p^{nexp}) all classes, all j",
            ok,
            f"{len(group.class_labels)} classes x {k + 1} slots, exact at precision",
        ))
    return checks


def suite_compatibility(config_path=None, seed=0):
    cfg, lifted = _pipeline(config_path or _builtin_config("control_11a_p5"), seed)
    sym = lifted.symbol
    group_f = build_ray_class_group(sym.field, Modulus((1,)))
    group_fp, _ = compatible_representatives(group_f, 0)
    mu_f = _mu_at(lifted, (1,), group_f)
    mu_fp = _mu_at(lifted, (2,), group_fp)
    checks = []
    count, ok = 0, True
    for label in group_f.class_labels:
        for m in range(6):
            a = mu_fp.coset_monomial(group_f, label, m)
            b = mu_f.coset_monomial(group_f, label, m)
            count += 1
            if not (a - b).is_zero_at_precision():
                ok = False
    checks.append((
        f"normalized coset-monomial battery ({count} inputs)", ok,
        "lam_fp^-1 mu^fp == lam_f^-1 mu^f at precision",
    ))
    if cfg.characters_path:
        chars, _ = load_battery(sym.field, cfg.characters_path, cfg.N + cfg.M + 8)
        okc, n = True, 0
        for chi in chars:
            r = sum(chi.infinity_type.values())
            if not 0 <= r - sym.weight.v[0] <= sym.weight.k[0]:
                continue
            if not chi.conductor.divides(Modulus((1,))):
                continue
            n += 1
            a = mu_fp.evaluate_character(chi)
            b = mu_f.evaluate_character(chi)
            if not (a - b).is_zero_at_precision():
                okc = False
        checks.append((f"fixture characters across moduli ({n})", okc,
                       "same normalized value from f and fp"))
    return checks


def suite_independence(config_path=None, seed=0):
    cfg, lifted = _pipeline(config_path or _builtin_config("control_11a_p5"), seed)
    sym = lifted.symbol
    group_a = build_ray_class_group(sym.field, Modulus((1,)))
    group_b = build_ray_class_group(
        sym.field, Modulus((1,)),
        rep_shifts={lab: 1 + (i % 2) for i, lab in
                    enumerate(sorted(build_ray_class_group(sym.field, Modulus((1,))).class_labels))},
    )
    mu_a = _mu_at(lifted, (1,), group_a)
    mu_b = _mu_at(lifted, (1,), group_b)
    checks = []
    factor_ok = True
    for lab in group_a.class_labels:
        data = group_a.factor_representative_change(lab, group_b.representatives[lab])
        if not data["same_class"]:
            factor_ok = False
    checks.append(("representative change factors through F^x U(f) F_inf^+",
                   factor_ok, "two tables, same classes"))
    chars, _ = load_battery(sym.field, cfg.characters_path, cfg.N + cfg.M + 8)
    ok_mu, ok_ev, n = True, True, 0
    for chi in chars:
        r = sum(chi.infinity_type.values())
        if not 0 <= r - sym.weight.v[0] <= sym.weight.k[0]:
            continue
        if not chi.conductor.divides(Modulus((1,))):
            continue
        n += 1
        if not (mu_a.evaluate_character(chi) - mu_b.evaluate_character(chi)).is_zero_at_precision():
            ok_mu = False
        e_a = ev_phi(sym.phi, chi, group_a, normalization=2)
        e_b = ev_phi(sym.phi, chi, group_b, normalization=2)
        if not (e_a - e_b).is_zero_at_precision():
            ok_ev = False
    checks.append((f"mu evaluations representative-independent ({n} chars)", ok_mu, ""))
    checks.append((f"Ev_phi representative-independent ({n} chars)", ok_ev, ""))
    return checks


def suite_gauss(seed=0):
    rng = random.Random(seed)
    checks = []
    # F = Q, p in {3, 5}, conductors (3), (9), (5), (25)
    for stem, p, exps in (("q_p3", 3, (1, 2)), ("q_p5", 5, (1, 2))):
        field = load_builtin_field(stem)
        for nexp in exps:
            level = nexp
            ctx = cyclotomic_context(p, level, 30 * (p - 1) * p ** (level - 1))
            gen = 2  # primitive root mod p^n for p in {3, 5}
            value = ctx.teichmuller(gen) if nexp == 1 else (
                ctx.teichmuller(gen) * _zeta(ctx, p, 1)
            )
            chi = HeckeCharacter(field, Modulus((nexp,)), {"r0": 0},
                                 [(((gen,),), value)], ctx)
            tau = gauss_sum(chi)
            ok_d = all(
                (gauss_sum(chi, d=d) - tau).is_zero_at_precision()
                for d in (DifferentChoice((-1,)),
                          DifferentChoice((1,), unit_twist=((gen,),)))
            )
            checks.append((f"{stem} f=(p^{nexp}) d-independence", ok_d, ""))
            ok_t = True
            for _ in range(25):
                z = rng.randrange(-4 * p ** nexp, 4 * p ** nexp) or 1
                tw = twisted_gauss_sum(chi, (z,))
                if z % p == 0:
                    expect = ctx.zero()
                else:
                    expect = chi.value_on_residue(((z % p ** nexp,),)).inverse() * tau
                if not (tw - expect).is_zero_at_precision():
                    ok_t = False
            checks.append((f"{stem} f=(p^{nexp}) twisted-sum identity (25 random)", ok_t, ""))
    # quadratic character mod 5: tau^2 = 5
    f5 = load_builtin_field("q_p5")
    ctx5 = cyclotomic_context(5, 1, 120)
    quad = HeckeCharacter(f5, Modulus((1,)), {"r0": 0},
                          [(((2,),), ctx5.from_int(-1))], ctx5)
    tau5 = gauss_sum(quad)
    checks.append(("tau(quadratic mod 5)^2 = 5",
                   (tau5 * tau5).eq_at_precision(ctx5.from_int(5)), ""))
    # Q(i), p = 5 split, conductor the declared second prime
    fi = load_builtin_field("q_i_p5")
    ctxi = cyclotomic_context(5, 1, 120)
    w = ctxi.teichmuller(2)
    chi_i = HeckeCharacter(fi, Modulus((0, 1)), {"c0": 1, "c0bar": 0},
                           [(((2,),), w)], ctxi, name="qi_quartic")
    tau_i = gauss_sum(chi_i)
    ok = True
    for _ in range(50):
        zc = (rng.randrange(-12, 13), rng.randrange(-12, 13))
        if zc == (0, 0):
            zc = (1, 0)
        red = chi_i.ring.reduce_global(zc)
        tw = twisted_gauss_sum(chi_i, zc)
        if chi_i.ring.is_unit(red):
            expect = chi_i.value_on_residue(red).inverse() * tau_i
        else:
            expect = ctxi.zero()
        if not (tw - expect).is_zero_at_precision():
            ok = False
    checks.append(("Q(i) p=5 split twisted-sum identity (50 random)", ok, ""))
    ok_d = (gauss_sum(chi_i, d=DifferentChoice((0, 2))) - tau_i).is_zero_at_precision()
    checks.append(("Q(i) d-independence (generator 2i vs 2)", ok_d, ""))
    return checks


def _zeta(ctx, p, level):
    from .padics import zeta_ppower

    return zeta_ppower(ctx, p, level)


def suite_control(config_path=None, seed=0):
    cfg, lifted = _pipeline(config_path or _builtin_config("control_11a_p5"), seed)
    sym = lifted.symbol
    checks = []
    rep = lifted.report
    checks.append(("lifting converged", rep.converged,
                   f"{rep.iterations} iterations, filtration depth {rep.filtration_depth}"))
    checks.append(("rho(Psi) = phi exactly", rep.specialization_residual is None, ""))
    eig_ok = all(v is None for v in rep.eigen_residuals.values())
    checks.append(("U_p Psi = lam Psi to filtration precision", eig_ok,
                   str(rep.eigen_residuals)))
    # uniqueness: a second, seeded initial lift
    lift2, phi_scaled, B2, _ = prepare_lift(
        sym.phi, cfg.M, cfg.N, sym.eigenvalue.valuation(), seed=seed + 17
    )
    psi2, rep2 = iterate_control(lift2, sym.eigenvalue, phi=phi_scaled)
    agree = all((a - b).is_zero() for a, b in zip(lifted.psi.values, psi2.values))
    checks.append(("two initial lifts agree to filtration precision", agree,
                   f"second run: {rep2.iterations} iterations"))
    # negative control: artificial eigenvalue of slope k + 1
    k = sym.weight.k[0]
    bad = sym.ctx.from_int(sym.field.p ** (k + 1))
    try:
        iterate_control(lift2, bad, enforce_small_slope=False,
                        budget=cfg.M + cfg.N)
        checks.append(("negative control raises non-convergence", False,
                       "no error raised"))
    except LiftNonConvergence as exc:
        checks.append(("negative control raises non-convergence", True,
                       str(exc)[:64]))
    return checks


def suite_interpolation(config_path=None, seed=0):
    cfg, lifted = _pipeline(config_path or _builtin_config("control_11a_p5"), seed)
    sym = lifted.symbol
    field, ctx = sym.field, sym.ctx
    lam = sym.eigenvalue
    checks = []
    chars, _ = load_battery(field, cfg.characters_path, cfg.N + cfg.M + 8)
    group1 = build_ray_class_group(field, Modulus((0,)))
    # fincor2 battery: conductor p and p^2 characters
    for nexp in (1, 2):
        group = build_ray_class_group(field, Modulus((nexp,)))
        mu = _mu_at(lifted, (nexp,), group)
        ok, n = True, 0
        for chi in chars:
            r = sum(chi.infinity_type.values())
            if not 0 <= r - sym.weight.v[0] <= sym.weight.k[0]:
                continue
            if chi.conductor.exponents[0] != nexp:
                continue
            n += 1
            val = mu.evaluate_character(chi)
            rhs = _to_ctx(lam ** nexp, chi.ctx).inverse() * ev_phi(
                sym.phi, chi, group, normalization=2
            )
            if not (val - rhs).is_zero_at_precision():
                ok = False
        checks.append((f"mu(chi) = lam_f^-1 Ev_2 for conductor p^{nexp} ({n} chars)",
                       ok, ""))
    # unramified multipliers at the trivial character and norm powers
    group_p = build_ray_class_group(field, Modulus((1,)))
    mu_p = _mu_at(lifted, (1,), group_p)
    ok_all, n = True, 0
    for chi in chars:
        if chi.conductor.exponents[0] != 0:
            continue
        r = sum(chi.infinity_type.values())
        if not 0 <= r - sym.weight.v[0] <= sym.weight.k[0]:
            continue
        n += 1
        val = mu_p.evaluate_character(chi)
        report = interpolation_multiplier(chi, {field.primes_above_p[0].name: lam},
                                          [0], sym.weight)
        ev1 = ev_phi(sym.phi, chi, group1, normalization=1)
        rhs = report.product * _to_ctx(ev1, chi.ctx)
        if not (_to_ctx(val, chi.ctx) - rhs).is_zero_at_precision():
            ok_all = False
        # explicit norm-power multiplier: 1 - p^j / lam
        j = r - sym.weight.v[0]
        lamc = _to_ctx(lam, chi.ctx)
        explicit = chi.ctx.one() - lamc.inverse() * field.p ** j
        if chi.name.startswith(("trivial", "norm")):
            if not (report.product - explicit).is_zero_at_precision():
                ok_all = False
    checks.append((f"unramified multiplier identities ({n} chars)", ok_all,
                   "mu = Z_p * Ev_1 with Z_p = phi_pfin(pi)(1 - lam^-1 phi(p)^-1)"))
    # unramified extension identity on the classical side
    ok_u, n_u = True, 0
    for chi in chars:
        if chi.conductor.exponents[0] != 0:
            continue
        r = sum(chi.infinity_type.values())
        if not 0 <= r - sym.weight.v[0] <= sym.weight.k[0]:
            continue
        n_u += 1
        lhs, rhs = unramified_extension_identity(
            sym.phi, chi, 0, {field.primes_above_p[0].name: lam}, group1, group_p
        )
        if not (lhs - rhs).is_zero_at_precision():
            ok_u = False
    checks.append((f"unramified prime extension identity ({n_u} chars)", ok_u,
                   "sum over Cl(fp) = (phi(p) lam - 1) sum over Cl(f)"))
    return checks


SUITES = {
    "diagram": suite_diagram,
    "independence": suite_independence,
    "compatibility": suite_compatibility,
    "gauss": lambda config_path=None, seed=0: suite_gauss(seed=seed),
    "control": suite_control,
    "interpolation": suite_interpolation,
}


def run_suite(name: str, config_path=None, seed=0):
    if name not in SUITES:
        raise ValueError(f"unknown suite {name}; choose from {sorted(SUITES)}")
    return SUITES[name](config_path=config_path, seed=seed)
