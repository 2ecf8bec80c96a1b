"""Lifecycle energy per unit area and its delay-gated service variant.

Each tier contributes density * (operation power * lifetime + embodied
energy); edge data centers additionally pay a storage energy per cached
content.  Service effective energy multiplies the areal system energy by
a hard delay-QoS indicator, so an infeasible operating point scores zero
and must be excluded from minimisation rather than preferred.
"""

import warnings
from dataclasses import dataclass, fields

from .scenario import SECONDS_PER_YEAR, ScenarioError


@dataclass(frozen=True)
class EnergyModel:
    """Power-model coefficients, lifetimes (s) and embodied energies (J)."""

    a_m: float = 21.45
    b_m: float = 354.0
    a_s: float = 7.84
    b_s: float = 71.0
    a_e: float = 7.84
    b_e: float = 71.0
    t_life_m: float = 10 * SECONDS_PER_YEAR
    t_life_s: float = 5 * SECONDS_PER_YEAR
    t_life_e: float = 5 * SECONDS_PER_YEAR
    e_em_m: float = 0.0
    e_em_s: float = 0.0
    e_em_e: float = 0.0
    e_storage: float = 8e6  # J per stored content
    assumed_defaults: tuple = ()

    def __post_init__(self):
        for f in fields(self):
            if f.name == "assumed_defaults":
                continue
            if getattr(self, f.name) < 0:
                raise ScenarioError(f"constraint violated: {f.name} >= 0")
        for name in ("t_life_m", "t_life_s", "t_life_e"):
            if getattr(self, name) <= 0:
                raise ScenarioError(f"constraint violated: {name} > 0")


_ENERGY_FIELDS = frozenset(
    f.name for f in fields(EnergyModel) if f.name != "assumed_defaults")
ASSUMED_ENERGY_FIELDS = frozenset(["e_em_m", "e_em_s", "e_em_e"])

_YEAR_KEYS = {f"{name}_years": name for name in ("t_life_m", "t_life_s", "t_life_e")}


def normalize_energy_key(key, raw_value):
    """Map an energy config key to ``(field, SI value)``; None if unknown."""
    try:
        value = float(raw_value)
    except (TypeError, ValueError):
        raise ScenarioError(f"value for {key!r} is not numeric: {raw_value!r}")
    if key in _YEAR_KEYS:
        return _YEAR_KEYS[key], value * SECONDS_PER_YEAR
    if key in _ENERGY_FIELDS:
        return key, value
    warnings.warn(f"unknown energy config key {key!r} ignored", stacklevel=3)
    return None


def load_energy_model(text=None, overrides=None):
    """Build an energy model from flat key/value text plus overrides."""
    si = {}
    if text:
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            for sep in ("=", ":"):
                if sep in line:
                    key, _, value = line.partition(sep)
                    break
            else:
                raise ScenarioError(
                    f"line {lineno}: expected 'key = value', got {raw!r}")
            mapped = normalize_energy_key(key.strip(), value.strip())
            if mapped is not None:
                si[mapped[0]] = mapped[1]
    for key, value in (overrides or {}).items():
        mapped = normalize_energy_key(key, value)
        if mapped is not None:
            si[mapped[0]] = mapped[1]
    flagged = tuple(sorted(ASSUMED_ENERGY_FIELDS - set(si)))
    return EnergyModel(assumed_defaults=flagged, **si)


def load_energy_model_file(path, overrides=None):
    with open(path, "r", encoding="utf-8") as fh:
        return load_energy_model(fh.read(), overrides)


def qos_indicator(d_total, d_max):
    """1 if the delay meets the budget (inclusive), else 0."""
    if d_total < 0 or d_max < 0:
        raise ValueError("delays must be >= 0")
    return 1 if d_total <= d_max else 0


@dataclass(frozen=True)
class SystemEnergy:
    """Areal energy (J/m^2) split by tier; ``total`` is their sum."""

    mbs: float
    sbs: float
    edc: float
    storage: float
    total: float


def system_energy(s, em, psi, lambda_e=None):
    """Areal lifecycle energy with ``psi`` contents cached per edge node.

    ``lambda_e`` overrides the scenario's edge density (the optimiser
    evaluates candidate densities without rebuilding scenarios).
    """
    if not 0 <= psi <= s.k_total:
        raise ValueError(f"psi {psi} outside [0, {s.k_total}]")
    lam_e = s.lambda_e if lambda_e is None else lambda_e
    mbs = s.lambda_m * ((em.a_m * s.p_m + em.b_m) * em.t_life_m + em.e_em_m)
    sbs = s.lambda_s * ((em.a_s * s.p_s + em.b_s) * em.t_life_s + em.e_em_s)
    edc = lam_e * ((em.a_e * s.p_e + em.b_e) * em.t_life_e + em.e_em_e)
    storage = lam_e * psi * em.e_storage
    return SystemEnergy(mbs=mbs, sbs=sbs, edc=edc, storage=storage,
                        total=mbs + sbs + edc + storage)


def service_effective_energy(e_sys, qos):
    """Areal energy gated by the QoS indicator."""
    if qos not in (0, 1):
        raise ValueError(f"qos must be 0 or 1, got {qos!r}")
    return e_sys * qos


@dataclass(frozen=True)
class SeeResult:
    """Service-effective-energy evaluation at one operating point."""

    e_sys: float
    qos: int
    e_see: float
    breakdown: SystemEnergy


def see_result(s, em, psi, d_total, lambda_e=None):
    """Convenience composition of the three energy operations."""
    breakdown = system_energy(s, em, psi, lambda_e)
    qos = qos_indicator(d_total, s.d_max)
    return SeeResult(e_sys=breakdown.total, qos=qos,
                     e_see=service_effective_energy(breakdown.total, qos),
                     breakdown=breakdown)
