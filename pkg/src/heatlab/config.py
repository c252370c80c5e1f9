"""Flat key = value experiment configuration.

The file format is deliberately dumb: one `key = value` pair per line,
`#` starts a comment, keys are dotted paths, values are ints, floats,
booleans, bare strings or comma-separated lists of those.  No nesting, no
quoting, no interpolation.  parse_config_text -> ExperimentConfig.from_mapping
validates everything up front (naming the offending key) so a bad config
never reaches the numerics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

Scalar = Union[int, float, bool, str]
Value = Union[Scalar, Tuple[Scalar, ...]]


class ConfigError(ValueError):
    """Invalid configuration; .key names the offending entry."""

    def __init__(self, key: str, message: str):
        super().__init__(f"config key '{key}': {message}")
        self.key = key


def _parse_scalar(text: str) -> Scalar:
    low = text.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        pass
    return text


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines into a flat mapping with typed values."""
    out: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"line {lineno}", "empty key")
        if key in out:
            raise ConfigError(key, "duplicate key")
        if "," in value:
            out[key] = tuple(_parse_scalar(part.strip()) for part in value.split(","))
        else:
            out[key] = _parse_scalar(value)
    return out


def parse_config_file(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read())


def _fmt_value(value: Value) -> str:
    if isinstance(value, tuple):
        return ", ".join(_fmt_value(v) for v in value)
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


_KNOWN_KEYS = {
    "equation.regime",
    "equation.p",
    "equation.nonlinearity",
    "domain.kind",
    "domain.lower",
    "domain.upper",
    "grid.n",
    "operator.kind",
    "operator.sigma",
    "potential.kind",
    "potential.alpha",
    "potential.coupling",
    "potential.sign",
    "potential.depth",
    "potential.width",
    "initial.recipe",
    "initial.amplitude",
    "initial.center",
    "initial.width",
    "initial.lambda",
    "initial.k",
    "integrator.scheme",
    "integrator.t_max",
    "integrator.dt_init",
    "integrator.dt_min",
    "integrator.dt_max",
    "integrator.rel_tol",
    "integrator.sup_cap",
    "integrator.energy_cap",
    "integrator.sample_interval",
    "integrator.cutoff_radii",
    "diagnostics.alpha",
    "diagnostics.A",
    "diagnostics.R",
    "sweep.key",
    "sweep.values",
    "seed",
}


def _as_float_tuple(value: Value, key: str) -> Tuple[float, ...]:
    items = value if isinstance(value, tuple) else (value,)
    out = []
    for item in items:
        if isinstance(item, bool) or not isinstance(item, (int, float)):
            raise ConfigError(key, f"expected number(s), got {item!r}")
        out.append(float(item))
    return tuple(out)


def _as_int_tuple(value: Value, key: str) -> Tuple[int, ...]:
    items = value if isinstance(value, tuple) else (value,)
    out = []
    for item in items:
        if isinstance(item, bool) or not isinstance(item, int):
            raise ConfigError(key, f"expected integer(s), got {item!r}")
        out.append(int(item))
    return tuple(out)


def _as_float(value: Value, key: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(key, f"expected a number, got {value!r}")
    return float(value)


def _as_int(value: Value, key: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(key, f"expected an integer, got {value!r}")
    return int(value)


def _as_str(value: Value, key: str, choices: Optional[tuple] = None) -> str:
    if not isinstance(value, str):
        raise ConfigError(key, f"expected a string, got {value!r}")
    if choices is not None and value not in choices:
        raise ConfigError(key, f"expected one of {choices}, got {value!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated experiment description, still independent of any assembly."""

    regime: str
    p: Optional[float]
    nonlinearity: str
    domain_kind: str
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    n: Tuple[int, ...]
    operator_kind: str
    sigma: float
    potential_kind: str
    potential_alpha: float
    potential_coupling: float
    potential_sign: int
    potential_depth: float
    potential_width: float
    recipe: str
    amplitude: float
    center: Tuple[float, ...]
    width: Optional[float]
    lam: float
    mode_index: int
    scheme: str
    t_max: float
    dt_init: float
    dt_min: float
    dt_max: float
    rel_tol: float
    sup_cap: float
    energy_cap: float
    sample_interval: Optional[float]
    cutoff_radii: Tuple[float, ...]
    diag_alpha: float
    diag_A: Optional[float]
    diag_R: Optional[float]
    sweep_key: Optional[str]
    sweep_values: Tuple[Scalar, ...]
    seed: int
    raw: dict = field(repr=False)

    @property
    def dim(self) -> int:
        return len(self.lower)

    @staticmethod
    def from_mapping(raw: dict) -> "ExperimentConfig":
        unknown = sorted(set(raw) - _KNOWN_KEYS)
        if unknown:
            raise ConfigError(unknown[0], f"unknown key(s): {', '.join(unknown)}")

        def need(key: str) -> Value:
            if key not in raw:
                raise ConfigError(key, "required key is missing")
            return raw[key]

        regime = _as_str(need("equation.regime"), "equation.regime", ("subcritical", "critical"))
        domain_kind = _as_str(need("domain.kind"), "domain.kind", ("interval", "box", "halfline"))
        upper = _as_float_tuple(need("domain.upper"), "domain.upper")
        if domain_kind == "halfline":
            lower = _as_float_tuple(raw.get("domain.lower", 0.0), "domain.lower")
        else:
            lower = _as_float_tuple(need("domain.lower"), "domain.lower")
        if len(lower) != len(upper):
            raise ConfigError("domain.lower", "lower and upper have different lengths")
        dim = len(lower)
        if domain_kind == "interval" and dim != 1:
            raise ConfigError("domain.kind", "interval domains are one-dimensional")
        if domain_kind == "halfline" and (dim != 1 or lower[0] != 0.0):
            raise ConfigError("domain.kind", "halfline domains are 1-d starting at 0")
        for lo, up in zip(lower, upper):
            if not up > lo:
                raise ConfigError("domain.upper", "upper must exceed lower on every axis")

        n = _as_int_tuple(need("grid.n"), "grid.n")
        if len(n) == 1 and dim > 1:
            n = n * dim
        if len(n) != dim:
            raise ConfigError("grid.n", f"expected {dim} entries, got {len(n)}")
        for count in n:
            if count < 2:
                raise ConfigError("grid.n", "need at least 2 interior nodes per axis")

        if regime == "critical":
            if dim < 3:
                raise ConfigError("equation.regime", "critical requires d >= 3")
            p_star = (dim + 2.0) / (dim - 2.0)
            if "equation.p" in raw:
                p = _as_float(raw["equation.p"], "equation.p")
                if abs(p - p_star) > 1e-12:
                    raise ConfigError("equation.p", f"critical exponent in d={dim} is {p_star}")
            p: Optional[float] = p_star
        else:
            p = _as_float(need("equation.p"), "equation.p")
            if dim >= 3:
                p_star = (dim + 2.0) / (dim - 2.0)
                if not 1.0 < p < p_star:
                    raise ConfigError("equation.p", f"subcritical range in d={dim} is (1, {p_star})")
            elif p <= 1.0:
                raise ConfigError("equation.p", "need p > 1")

        nonlinearity = _as_str(
            raw.get("equation.nonlinearity", "source"),
            "equation.nonlinearity",
            ("source", "absorbing"),
        )

        operator_kind = _as_str(
            raw.get("operator.kind", "dirichlet_laplacian"),
            "operator.kind",
            ("dirichlet_laplacian", "schrodinger", "robin_halfline"),
        )
        if operator_kind == "robin_halfline" and domain_kind != "halfline":
            raise ConfigError("operator.kind", "robin_halfline needs domain.kind = halfline")
        sigma = _as_float(raw.get("operator.sigma", 0.0), "operator.sigma")
        if sigma < 0:
            raise ConfigError("operator.sigma", "Robin coefficient must be >= 0")

        potential_kind = _as_str(
            raw.get("potential.kind", "zero"),
            "potential.kind",
            ("zero", "inverse_power", "gaussian_well"),
        )
        if potential_kind != "zero" and operator_kind != "schrodinger":
            raise ConfigError("potential.kind", "potentials need operator.kind = schrodinger")
        potential_alpha = _as_float(raw.get("potential.alpha", 0.0), "potential.alpha")
        potential_coupling = _as_float(raw.get("potential.coupling", 0.0), "potential.coupling")
        potential_sign = _as_int(raw.get("potential.sign", 1), "potential.sign")
        if potential_sign not in (1, -1):
            raise ConfigError("potential.sign", "sign is +1 (repulsive) or -1 (attractive)")
        potential_depth = _as_float(raw.get("potential.depth", 1.0), "potential.depth")
        potential_width = _as_float(raw.get("potential.width", 1.0), "potential.width")
        if potential_kind == "inverse_power" and potential_alpha <= 0:
            raise ConfigError("potential.alpha", "inverse-power potential needs alpha > 0")
        if potential_kind == "gaussian_well" and potential_width <= 0:
            raise ConfigError("potential.width", "need width > 0")

        recipe = _as_str(
            need("initial.recipe"),
            "initial.recipe",
            ("zero", "gaussian", "scaled_ground_state", "eigenmode"),
        )
        if recipe == "scaled_ground_state" and regime == "critical":
            raise ConfigError(
                "initial.recipe", "scaled_ground_state is undefined in the critical regime"
            )
        amplitude = _as_float(raw.get("initial.amplitude", 1.0), "initial.amplitude")
        center = _as_float_tuple(raw.get("initial.center", (0.0,) * dim), "initial.center")
        if len(center) == 1 and dim > 1:
            center = center * dim
        if len(center) != dim:
            raise ConfigError("initial.center", f"expected {dim} entries, got {len(center)}")
        width = None
        if "initial.width" in raw:
            width = _as_float(raw["initial.width"], "initial.width")
            if width <= 0:
                raise ConfigError("initial.width", "need width > 0")
        lam = _as_float(raw.get("initial.lambda", 1.0), "initial.lambda")
        if lam < 0:
            raise ConfigError("initial.lambda", "need lambda >= 0")
        mode_index = _as_int(raw.get("initial.k", 0), "initial.k")
        if mode_index < 0:
            raise ConfigError("initial.k", "mode index must be >= 0")

        scheme = _as_str(
            raw.get("integrator.scheme", "etdrk2"),
            "integrator.scheme",
            ("exponential_euler", "etdrk2"),
        )
        t_max = _as_float(need("integrator.t_max"), "integrator.t_max")
        if t_max <= 0:
            raise ConfigError("integrator.t_max", "need t_max > 0")
        dt_init = _as_float(raw.get("integrator.dt_init", 1e-3), "integrator.dt_init")
        dt_min = _as_float(raw.get("integrator.dt_min", 1e-13), "integrator.dt_min")
        dt_max = _as_float(raw.get("integrator.dt_max", 0.5), "integrator.dt_max")
        rel_tol = _as_float(raw.get("integrator.rel_tol", 1e-6), "integrator.rel_tol")
        sup_cap = _as_float(raw.get("integrator.sup_cap", 1e6), "integrator.sup_cap")
        energy_cap = _as_float(raw.get("integrator.energy_cap", 1e12), "integrator.energy_cap")
        for key, val in (
            ("integrator.dt_init", dt_init),
            ("integrator.dt_min", dt_min),
            ("integrator.dt_max", dt_max),
            ("integrator.rel_tol", rel_tol),
            ("integrator.sup_cap", sup_cap),
            ("integrator.energy_cap", energy_cap),
        ):
            if val <= 0:
                raise ConfigError(key, "must be positive")
        sample_interval = None
        if "integrator.sample_interval" in raw:
            sample_interval = _as_float(
                raw["integrator.sample_interval"], "integrator.sample_interval"
            )
            if sample_interval <= 0:
                raise ConfigError("integrator.sample_interval", "must be positive")
        cutoff_radii = ()
        if "integrator.cutoff_radii" in raw:
            cutoff_radii = _as_float_tuple(raw["integrator.cutoff_radii"], "integrator.cutoff_radii")
            for radius in cutoff_radii:
                if radius <= 0:
                    raise ConfigError("integrator.cutoff_radii", "radii must be positive")

        diag_alpha = _as_float(raw.get("diagnostics.alpha", 0.1), "diagnostics.alpha")
        if diag_alpha <= 0:
            raise ConfigError("diagnostics.alpha", "need alpha > 0")
        diag_A = None
        if "diagnostics.A" in raw:
            diag_A = _as_float(raw["diagnostics.A"], "diagnostics.A")
            if diag_A <= 0:
                raise ConfigError("diagnostics.A", "need A > 0")
        diag_R = None
        if "diagnostics.R" in raw:
            diag_R = _as_float(raw["diagnostics.R"], "diagnostics.R")
            if diag_R <= 0:
                raise ConfigError("diagnostics.R", "need R > 0")

        sweep_key = None
        sweep_values: Tuple[Scalar, ...] = ()
        if "sweep.key" in raw:
            sweep_key = _as_str(raw["sweep.key"], "sweep.key")
            if sweep_key not in _KNOWN_KEYS or sweep_key.startswith("sweep."):
                raise ConfigError("sweep.key", f"cannot sweep over {sweep_key!r}")
        if "sweep.values" in raw:
            vals = raw["sweep.values"]
            if vals == "":
                sweep_values = ()  # an explicitly empty axis is legal
            else:
                sweep_values = vals if isinstance(vals, tuple) else (vals,)
        elif sweep_key is not None:
            raise ConfigError("sweep.values", "sweep.key set but sweep.values is missing")

        seed = _as_int(raw.get("seed", 0), "seed")

        return ExperimentConfig(
            regime=regime,
            p=p,
            nonlinearity=nonlinearity,
            domain_kind=domain_kind,
            lower=lower,
            upper=upper,
            n=n,
            operator_kind=operator_kind,
            sigma=sigma,
            potential_kind=potential_kind,
            potential_alpha=potential_alpha,
            potential_coupling=potential_coupling,
            potential_sign=potential_sign,
            potential_depth=potential_depth,
            potential_width=potential_width,
            recipe=recipe,
            amplitude=amplitude,
            center=center,
            width=width,
            lam=lam,
            mode_index=mode_index,
            scheme=scheme,
            t_max=t_max,
            dt_init=dt_init,
            dt_min=dt_min,
            dt_max=dt_max,
            rel_tol=rel_tol,
            sup_cap=sup_cap,
            energy_cap=energy_cap,
            sample_interval=sample_interval,
            cutoff_radii=cutoff_radii,
            diag_alpha=diag_alpha,
            diag_A=diag_A,
            diag_R=diag_R,
            sweep_key=sweep_key,
            sweep_values=sweep_values,
            seed=seed,
            raw=dict(raw),
        )

    def with_override(self, key: str, value: Value) -> "ExperimentConfig":
        """Re-validate with one key replaced (used by sweeps)."""
        raw = dict(self.raw)
        raw[key] = value
        return ExperimentConfig.from_mapping(raw)

    def echo_text(self) -> str:
        """Canonical `key = value` rendering of the raw mapping (round-trips)."""
        lines = [f"{key} = {_fmt_value(self.raw[key])}" for key in sorted(self.raw)]
        return "\n".join(lines) + "\n"


def load_experiment_config(path: str) -> ExperimentConfig:
    return ExperimentConfig.from_mapping(parse_config_file(path))
