"""Configuration-driven assembly of the full computation.

Shared by the CLI and the verification suites: resolve a field file, build
the classical eigensymbol from a fixture description, lift it, build the
ray class distribution and evaluate a character battery.  Everything is
deterministic given the config.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

from .characters import HeckeCharacter
from .coefficients import Weight, is_small_slope
from .fields import NumberField, load_field
from .lifting import iterate_control, prepare_lift
from .padics import PadicContext, cyclotomic_context, qp_context, zeta_ppower
from .rayclass import Modulus
from .serialize import content_hash
from .symbols import (
    ModularSymbol,
    SymbolSpace,
    classical_basis,
    clear_denominators,
    combine_basis,
    joint_eigenspace,
    p_stabilize,
    unit_root_of_stabilization,
)


class ConfigError(ValueError):
    pass


_DATA = Path(__file__).parent / "data"


def _resolve(spec: str, subdir: str) -> Path:
    if spec.startswith("builtin:"):
        return _DATA / subdir / f"{spec.split(':', 1)[1]}.json"
    return Path(spec)


@dataclass
class JobConfig:
    field_path: Path
    level: int
    weight_k: dict
    weight_v: dict
    M: int
    N: int
    modulus: tuple
    eigen_path: Path
    characters_path: Path | None
    out_dir: Path
    seed: int = 0
    raw: dict | None = None

    @classmethod
    def load(cls, path: str | Path, precision=None, moments=None, out=None, seed=None):
        with open(path) as fh:
            data = json.load(fh)
        if data.get("schema_version") != 1:
            raise ConfigError("unsupported config schema version")
        return cls(
            field_path=_resolve(data["field"], "fields"),
            level=data["level"],
            weight_k=data["weight"]["k"],
            weight_v=data["weight"]["v"],
            M=moments or data["M"],
            N=precision or data["N"],
            modulus=tuple(data["modulus"]),
            eigen_path=_resolve(data["eigen"], "eigen"),
            characters_path=(
                _resolve(data["characters"], "characters")
                if data.get("characters") else None
            ),
            out_dir=Path(out or data.get("out", "out")),
            seed=seed if seed is not None else data.get("seed", 0),
            raw=data,
        )

    def config_hash(self) -> str:
        with open(self.field_path) as fh:
            field_data = json.load(fh)
        with open(self.eigen_path) as fh:
            eigen_data = json.load(fh)
        return content_hash({
            "field": field_data,
            "eigen": eigen_data,
            "level": self.level,
            "k": self.weight_k,
            "v": self.weight_v,
            "M": self.M,
            "N": self.N,
            "modulus": list(self.modulus),
        })


@dataclass
class SymbolBundle:
    field: NumberField
    weight: Weight
    space: SymbolSpace
    phi: ModularSymbol          # classical, p-adic coefficients
    eigenvalue: object
    ctx: PadicContext
    eigen_meta: dict


@dataclass
class LiftBundle:
    symbol: SymbolBundle
    psi: ModularSymbol
    report: object
    scale_exponent: int
    working_N: int


def build_symbol(cfg: JobConfig) -> SymbolBundle:
    field = load_field(cfg.field_path)
    weight = Weight.from_field(field, cfg.weight_k, cfg.weight_v)
    with open(cfg.eigen_path) as fh:
        eigen = json.load(fh)
    if eigen.get("schema_version") != 1:
        raise ConfigError("unsupported eigen fixture schema")
    src_level = eigen["source_level"]
    src_space = SymbolSpace(field, src_level, weight,
                            require_p_divides=(src_level % field.p == 0))
    basis = classical_basis(src_space)
    coords = joint_eigenspace(src_space, basis,
                              [tuple(c) for c in eigen["constraints"]],
                              weyl_sign=eigen.get("weyl_sign"))
    if len(coords) != 1:
        raise ConfigError(
            f"eigen constraints cut a {len(coords)}-dimensional space, not a line"
        )
    phi_src = clear_denominators(combine_basis(src_space, basis, coords[0]))
    for ell, a_ell in eigen.get("check_eigenvalues", {}).items():
        img = phi_src.hecke(int(ell))
        diff = img - phi_src.map_values(lambda val: val.scale(a_ell))
        if not all(v.is_zero() for v in diff.values):
            raise ConfigError(f"fixture eigenvalue at {ell} failed verification")
    k0 = weight.k[0]
    slope_pad = cfg.M + cfg.N
    ctx = qp_context(field.p, cfg.N + cfg.M + slope_pad + 4)
    if eigen.get("stabilization"):
        a_p = eigen["stabilization"]["a_p"]
        lam = unit_root_of_stabilization(ctx, a_p, k0)
        if cfg.level == src_level:
            raise ConfigError("stabilization requires a strictly larger level")
        space = SymbolSpace(field, cfg.level, weight)
        phi = p_stabilize(phi_src, space, lam, ctx)
    else:
        lam = ctx.from_int(eigen["u_p"])
        if cfg.level != src_level:
            space = SymbolSpace(field, cfg.level, weight)
            raise ConfigError("direct fixtures must live at the config level")
        space = src_space
        phi = phi_src.map_values(
            lambda val: val.map_values(lambda x: ctx.from_fraction(Fraction(x)), ctx)
        )
    img = phi.hecke(field.p)
    diff = img - phi.map_values(lambda val: val.scale(lam))
    if not all(v.is_zero() for v in diff.values):
        raise ConfigError("constructed symbol is not a U_p eigenvector")
    if not is_small_slope(field, weight, {field.primes_above_p[0].name: lam}):
        raise ConfigError("fixture eigenvalue is not small slope for this weight")
    return SymbolBundle(field, weight, space, phi, lam, ctx,
                        {"fixture": eigen.get("name", cfg.eigen_path.stem)})


def lift_symbol(bundle: SymbolBundle, cfg: JobConfig, seed=None) -> LiftBundle:
    slope = bundle.eigenvalue.valuation()
    lift, phi_scaled, B, n_work = prepare_lift(
        bundle.phi, cfg.M, cfg.N, slope, seed=seed
    )
    psi, report = iterate_control(lift, bundle.eigenvalue, phi=phi_scaled)
    scaled_bundle = SymbolBundle(
        bundle.field, bundle.weight, bundle.space, phi_scaled,
        bundle.eigenvalue, bundle.ctx, bundle.eigen_meta,
    )
    return LiftBundle(scaled_bundle, psi, report, B, n_work)


def character_context(field: NumberField, battery: dict, N: int) -> PadicContext:
    level = max(
        (spec.get("zeta_level", 0) for ch in battery["characters"]
         for spec in ch.get("generators", [])),
        default=0,
    )
    if level == 0:
        return qp_context(field.p, N)
    return cyclotomic_context(field.p, level, N * (field.p - 1) * field.p ** (level - 1))


def load_battery(field: NumberField, path: Path, N: int):
    with open(path) as fh:
        battery = json.load(fh)
    if battery.get("schema_version") != 1:
        raise ConfigError("unsupported battery schema")
    ctx = character_context(field, battery, N)
    out = []
    for ch in battery["characters"]:
        gen_values = []
        for spec in ch.get("generators", []):
            value = ctx.one()
            if spec.get("teich_exponent"):
                value = value * ctx.teichmuller(spec["teich_residue"]) ** spec["teich_exponent"]
            if spec.get("zeta_exponent"):
                z = zeta_ppower(ctx, field.p, spec["zeta_level"])
                value = value * z ** spec["zeta_exponent"]
            gen_values.append((
                tuple(tuple(part) for part in spec["residue"]),
                value,
            ))
        chi = HeckeCharacter(
            field, Modulus(tuple(ch["conductor"])), ch["infinity_type"],
            gen_values, ctx, name=ch["name"],
        )
        out.append(chi)
    return out, ctx
