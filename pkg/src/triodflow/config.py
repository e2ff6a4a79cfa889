"""Scenario configuration files (TOML) and the shipped presets."""

import os
from dataclasses import dataclass, field, fields
from importlib import resources

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import scenarios
from .errors import ConfigError
from .geometry import DomainShape
from .solver import SolverConfig

INITIAL_KINDS = ("steiner-exact", "perturbed", "hermite", "symmetric", "file")
PRESETS = ("equilateral", "obtuse150", "symmetric", "steiner-exact")


@dataclass
class ScenarioConfig:
    name: str
    domain: DomainShape
    endpoints: np.ndarray
    initial: dict
    solver: SolverConfig
    probes: list = field(default_factory=list)
    record_every: int = 50
    outputs: dict = field(default_factory=dict)
    source: str = ""

    def build_initial(self):
        """The initial triod described by ``initial``.

        Raises
        ------
        ConfigError
        """
        kind = self.initial["kind"]
        N = self.solver.n_nodes
        try:
            if kind == "steiner-exact":
                return scenarios.steiner_exact(self.endpoints, N, self.domain)
            if kind == "perturbed":
                return scenarios.perturbed(
                    self.endpoints, N, self.initial["amplitude"], self.initial["seed"], self.domain
                )
            if kind == "hermite":
                return scenarios.hermite_triod(self.initial["junction"], self.endpoints, N, self.domain)
            if kind == "symmetric":
                return scenarios.symmetric(N, self.initial["amplitude"], self.domain.radius)
            rows = np.loadtxt(self.initial["path"], comments="#", ndmin=2)
            return scenarios.from_node_rows(rows, self.domain)
        except (ValueError, OSError) as exc:
            raise ConfigError(f"cannot build initial triod: {exc}") from exc


def _req(table, key, where):
    if key not in table:
        raise ConfigError(f"missing key '{key}' in [{where}]")
    return table[key]


def _point(v, what):
    try:
        p = np.asarray(v, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what} must be a pair of numbers") from exc
    if p.shape != (2,) or not np.all(np.isfinite(p)):
        raise ConfigError(f"{what} must be a pair of finite numbers")
    return p


def _domain(table):
    kind = table.get("kind", "disc")
    try:
        if kind == "disc":
            return DomainShape.disc(tuple(_point(table.get("center", (0.0, 0.0)), "domain.center")),
                                    float(table.get("radius", 1.0)))
        if kind == "polygon":
            return DomainShape.polygon(_req(table, "vertices", "domain"))
    except ValueError as exc:
        raise ConfigError(f"invalid domain: {exc}") from exc
    raise ConfigError(f"unknown domain kind '{kind}'")


def _endpoints(table, domain):
    if "points" in table:
        P = np.array([_point(p, "endpoints.points entry") for p in table["points"]])
    elif "angles_deg" in table:
        if domain.kind != "disc":
            raise ConfigError("endpoints.angles_deg needs a disc domain")
        P = scenarios.endpoints_at_angles(domain, [float(a) for a in table["angles_deg"]])
    else:
        raise ConfigError("[endpoints] needs 'points' or 'angles_deg'")
    if P.shape != (3, 2):
        raise ConfigError("exactly three endpoints are required")
    tol = 1e-9 * max(1.0, domain.diameter)
    if np.any(np.abs(domain.signed_distance(P)) > tol):
        raise ConfigError("endpoints must lie on the domain boundary")
    return P


def _initial(table, base_dir):
    kind = _req(table, "kind", "initial")
    if kind not in INITIAL_KINDS:
        raise ConfigError(f"initial.kind must be one of {INITIAL_KINDS}")
    out = {"kind": kind}
    if kind == "perturbed":
        amp = float(_req(table, "amplitude", "initial"))
        if amp < 0:
            raise ConfigError("initial.amplitude must be nonnegative")
        seed = _req(table, "seed", "initial")
        if not isinstance(seed, int):
            raise ConfigError("initial.seed must be an integer")
        out.update(amplitude=amp, seed=seed)
    elif kind == "hermite":
        out["junction"] = _point(_req(table, "junction", "initial"), "initial.junction")
    elif kind == "symmetric":
        amp = float(table.get("amplitude", 0.1))
        if amp < 0:
            raise ConfigError("initial.amplitude must be nonnegative")
        out["amplitude"] = amp
    elif kind == "file":
        path = _req(table, "path", "initial")
        out["path"] = path if os.path.isabs(path) else os.path.join(base_dir, path)
    return out


def _solver(table, record_every):
    known = {f.name for f in fields(SolverConfig)}
    extra = set(table) - known
    if extra:
        raise ConfigError(f"unknown solver keys: {sorted(extra)}")
    try:
        return SolverConfig(**dict(table, record_every=record_every))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid solver settings: {exc}") from exc


def _probes(items):
    out = []
    for i, pr in enumerate(items):
        x0 = _point(_req(pr, "x0", f"probes.{i}"), f"probes[{i}].x0")
        T = pr.get("T_hat")
        if T is not None and not float(T) > 0:
            raise ConfigError(f"probes[{i}].T_hat must be positive")
        out.append({"x0": tuple(x0), "T_hat": None if T is None else float(T), "name": pr.get("name", f"p{i}")})
    return out


def parse_config(data, base_dir=".", source=""):
    """Validate a parsed TOML table and build the :class:`ScenarioConfig`."""
    if not isinstance(data, dict):
        raise ConfigError("configuration must be a table")
    record_every = data.get("record_every", 50)
    if not isinstance(record_every, int) or record_every < 1:
        raise ConfigError("record_every must be an integer >= 1")
    domain = _domain(data.get("domain", {}))
    initial = _initial(_req(data, "initial", "root"), base_dir)
    if initial["kind"] == "symmetric":
        r = domain.radius
        endpoints = np.array([[0.0, r], [-r * np.sqrt(3) / 2, -r / 2], [r * np.sqrt(3) / 2, -r / 2]])
    else:
        endpoints = _endpoints(_req(data, "endpoints", "root"), domain)
    solver = _solver(data.get("solver", {}), record_every)
    return ScenarioConfig(
        name=str(data.get("name", "scenario")),
        domain=domain,
        endpoints=endpoints,
        initial=initial,
        solver=solver,
        probes=_probes(data.get("probes", [])),
        record_every=record_every,
        outputs=dict(data.get("output", {})),
        source=source,
    )


def preset_text(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset '{name}'")
    return resources.files("triodflow").joinpath("presets", f"{name}.toml").read_text()


def load_config(path_or_preset):
    """Load a TOML file, or a shipped preset by name when no such file exists.

    Raises
    ------
    ConfigError
        On unreadable, malformed or invalid configuration.
    """
    if os.path.isfile(path_or_preset):
        try:
            with open(path_or_preset, "rb") as fh:
                data = tomllib.load(fh)
        except (OSError, tomllib.TOMLDecodeError) as exc:
            raise ConfigError(f"cannot read {path_or_preset}: {exc}") from exc
        return parse_config(data, os.path.dirname(os.path.abspath(path_or_preset)), path_or_preset)
    if path_or_preset in PRESETS:
        data = tomllib.loads(preset_text(path_or_preset))
        return parse_config(data, ".", f"preset:{path_or_preset}")
    raise ConfigError(f"no such config file or preset: {path_or_preset}")
