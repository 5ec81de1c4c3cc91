"""Run configuration: flat ``key = value`` files plus command-line overrides.

Recognised keys::

    n_opos                       number of cascaded OPOs
    gamma0_<k>, gamma_<k>        mirror couplings of OPO k (1-based)
    threshold_ratio_<k>          threshold of OPO k over OPO 1 (OPO 1: 1)
    sigma_first                  incident pump power over OPO 1's threshold
    omega_rel_first              analysis frequency over OPO 1's twin bandwidth
    loss                         output loss applied to every beam
    loss_<mode>                  output loss of one beam (e.g. loss_1A, loss_0)
    pump_loss                    pump power loss between consecutive OPOs
    scan_param, scan_from, scan_to, scan_steps
    grid_param, grid_from, grid_to, grid_steps
    format                       csv | json
    out                          output path ("-" for stdout)
    entangle_tol, purity_tol
    jobs                         worker processes for scans and grids
"""

from dataclasses import dataclass, field, replace
import math
import re

from .covariance import ChainSpec, MirrorSet, chain_modes
from .errors import ConfigError

TRIPARTITE = {"n_opos": 1, "sigma_first": 1.5, "omega_rel_first": 0.5}
PENTAPARTITE = {"n_opos": 2, "sigma_first": 1.5, "omega_rel_first": 0.1}
DEFAULT_OPOS = {1: (0.05, 0.01, 1.0), 2: (0.04, 0.0075, 0.45)}

PRESETS = {
    "tripartite": dict(TRIPARTITE),
    "pentapartite": dict(PENTAPARTITE),
    "pump-scan": dict(
        PENTAPARTITE,
        scan_param="sigma_first", scan_from=1.02, scan_to=2.4, scan_steps=200,
    ),
    "threshold-grid": dict(
        PENTAPARTITE,
        sigma_first=1.1,
        scan_param="omega_rel_first", scan_from=0.01, scan_to=1.0, scan_steps=100,
        grid_param="threshold_ratio_2", grid_from=0.1, grid_to=1.0, grid_steps=100,
    ),
}

_INDEXED = re.compile(r"^(gamma0|gamma|threshold_ratio)_(\d+)$")
_LOSS = re.compile(r"^loss_(\w+)$")
_PLAIN = {
    "n_opos": int,
    "sigma_first": float,
    "omega_rel_first": float,
    "loss": float,
    "pump_loss": float,
    "scan_param": str,
    "scan_from": float,
    "scan_to": float,
    "scan_steps": int,
    "grid_param": str,
    "grid_from": float,
    "grid_to": float,
    "grid_steps": int,
    "format": str,
    "out": str,
    "entangle_tol": float,
    "purity_tol": float,
    "jobs": int,
}


@dataclass(frozen=True)
class Axis:
    param: str
    start: float
    stop: float
    steps: int

    def values(self):
        if self.steps == 1:
            return [self.start]
        h = (self.stop - self.start) / (self.steps - 1)
        return [self.start + i * h for i in range(self.steps)]


@dataclass(frozen=True)
class RunConfig:
    opos: tuple = (MirrorSet(*DEFAULT_OPOS[1]),)
    sigma_first: float = 1.5
    omega_rel_first: float = 0.5
    loss: float = 0.0
    mode_loss: dict = field(default_factory=dict)
    pump_loss: float = 0.0
    scan: Axis = None
    grid: Axis = None
    format: str = "json"
    out: str = "-"
    entangle_tol: float = 1e-6
    purity_tol: float = 1e-3
    jobs: int = 1

    @property
    def n_opos(self):
        return len(self.opos)

    def modes(self):
        return list(chain_modes(self.n_opos))

    def output_losses(self):
        compact = {m.replace("_", ""): m for m in self.modes()}
        per_mode = {compact.get(k, k): v for k, v in self.mode_loss.items()}
        return tuple(per_mode.get(m, self.loss) for m in self.modes())

    def chain_spec(self):
        losses = self.output_losses()
        return ChainSpec(
            opos=self.opos,
            sigma_first=self.sigma_first,
            omega_rel_first=self.omega_rel_first,
            output_loss=losses if any(losses) else None,
            pump_loss=self.pump_loss,
        )

    def with_param(self, name, value):
        """Copy with one scannable parameter replaced."""
        if name in ("sigma_first", "omega_rel_first", "loss", "pump_loss"):
            return replace(self, **{name: float(value)})
        match = _INDEXED.match(name)
        if match:
            kind, k = match.group(1), int(match.group(2))
            opos = list(self.opos)
            opos[k - 1] = replace(opos[k - 1], **{kind: float(value)})
            return replace(self, opos=tuple(opos))
        raise ConfigError(f"{name}: not a scannable parameter")

    def summary(self):
        return {
            "n_opos": self.n_opos,
            "opos": [
                {"gamma0": o.gamma0, "gamma": o.gamma, "threshold_ratio": o.threshold_ratio}
                for o in self.opos
            ],
            "sigma_first": self.sigma_first,
            "omega_rel_first": self.omega_rel_first,
            "output_loss": list(self.output_losses()),
            "pump_loss": self.pump_loss,
            "entangle_tol": self.entangle_tol,
            "purity_tol": self.purity_tol,
        }


def parse_text(text, source="<config>"):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values, problems = {}, []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
            continue
        key, value = (s.strip() for s in line.split("=", 1))
        if key in values:
            problems.append(f"{key}: given twice ({source}:{lineno})")
        values[key] = value
    if problems:
        raise ConfigError(problems)
    return values


def parse_overrides(pairs):
    values, problems = {}, []
    for pair in pairs or ():
        if "=" not in pair:
            problems.append(f"--set {pair!r}: expected key=value")
            continue
        key, value = (s.strip() for s in pair.split("=", 1))
        values[key] = value
    if problems:
        raise ConfigError(problems)
    return values


def _convert(key, raw, kind, problems):
    if not isinstance(raw, str):
        return raw
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            value = float(raw)
            if not math.isfinite(value):
                raise ValueError
            return value
        return raw
    except ValueError:
        problems.append(f"{key}: expected {kind.__name__}, got {raw!r}")
        return None


def _scannable(name, n_opos):
    if name in ("sigma_first", "omega_rel_first", "loss", "pump_loss"):
        return True
    match = _INDEXED.match(name or "")
    return bool(match) and 1 <= int(match.group(2)) <= n_opos and not (
        match.group(1) == "threshold_ratio" and match.group(2) == "1"
    )


def build_config(file_values=None, overrides=None, preset="tripartite"):
    """Merge preset defaults, file values and overrides (later wins) and validate.

    Raises ConfigError listing every offending key.
    """
    merged = dict(PRESETS[preset])
    merged.update(file_values or {})
    merged.update(overrides or {})
    problems = []
    typed = {}
    mode_loss = {}
    indexed = {}
    for key, raw in merged.items():
        if key in _PLAIN:
            typed[key] = _convert(key, raw, _PLAIN[key], problems)
        elif _INDEXED.match(key):
            kind, k = _INDEXED.match(key).groups()
            indexed[(kind, int(k))] = _convert(key, raw, float, problems)
        elif _LOSS.match(key):
            mode_loss[_LOSS.match(key).group(1)] = _convert(key, raw, float, problems)
        else:
            problems.append(f"{key}: unknown key")

    n = typed.get("n_opos")
    if n is None or n < 1:
        if n is not None:
            problems.append(f"n_opos: must be >= 1, got {n}")
        n = 1
    for kind, k in indexed:
        if k < 1 or k > n:
            problems.append(f"{kind}_{k}: OPO index outside 1..{n}")

    opos = []
    for k in range(1, n + 1):
        defaults = DEFAULT_OPOS.get(k)
        entry = []
        for j, kind in enumerate(("gamma0", "gamma", "threshold_ratio")):
            value = indexed.get((kind, k))
            if value is None and (kind, k) not in indexed:
                if defaults is None:
                    problems.append(f"{kind}_{k}: required for OPO {k}")
                    value = 1.0
                else:
                    value = defaults[j]
            entry.append(value)
        g0, g, ratio = entry
        for kind, value in (("gamma0", g0), ("gamma", g)):
            if value is not None and not 0.0 < value <= 0.5:
                problems.append(f"{kind}_{k}: must lie in (0, 0.5], got {value!r}")
        if ratio is not None:
            if k == 1 and ratio != 1.0:
                problems.append(f"threshold_ratio_1: must be 1, got {ratio!r}")
            elif not ratio > 0.0:
                problems.append(f"threshold_ratio_{k}: must be > 0, got {ratio!r}")
        opos.append(MirrorSet(g0, g, ratio))

    sigma = typed.get("sigma_first")
    if sigma is not None and not sigma > 0.0:
        problems.append(f"sigma_first: must be > 0, got {sigma!r}")
    omega = typed.get("omega_rel_first")
    if omega is not None and not omega > 0.0:
        problems.append(f"omega_rel_first: must be > 0, got {omega!r}")
    for key in ("loss", "pump_loss"):
        value = typed.get(key)
        if value is not None and not 0.0 <= value < 1.0:
            problems.append(f"{key}: must lie in [0, 1), got {value!r}")
    known = {m.replace("_", "") for m in RunConfig(opos=tuple(opos)).modes()}
    for label, value in mode_loss.items():
        if label not in known:
            problems.append(f"loss_{label}: no beam named {label!r}")
        elif value is not None and not 0.0 <= value < 1.0:
            problems.append(f"loss_{label}: must lie in [0, 1), got {value!r}")
    fmt = typed.get("format", "json")
    if fmt not in ("csv", "json"):
        problems.append(f"format: must be csv or json, got {fmt!r}")
    for key in ("entangle_tol", "purity_tol"):
        value = typed.get(key)
        if value is not None and not 0.0 < value < 1.0:
            problems.append(f"{key}: must lie in (0, 1), got {value!r}")
    jobs = typed.get("jobs", 1)
    if jobs is not None and jobs < 1:
        problems.append(f"jobs: must be >= 1, got {jobs!r}")

    axes = {}
    for prefix in ("scan", "grid"):
        parts = {s: typed.get(f"{prefix}_{s}") for s in ("param", "from", "to", "steps")}
        if all(v is None for v in parts.values()):
            axes[prefix] = None
            continue
        missing = [s for s in ("param", "from", "to") if f"{prefix}_{s}" not in typed]
        for s in missing:
            problems.append(f"{prefix}_{s}: required when {prefix} axis is used")
        if parts["param"] is not None and not _scannable(parts["param"], n):
            problems.append(f"{prefix}_param: cannot scan {parts['param']!r}")
        steps = parts["steps"] if parts["steps"] is not None else (200 if prefix == "scan" else 100)
        if steps < 2:
            problems.append(f"{prefix}_steps: must be >= 2, got {steps}")
        if problems:
            axes[prefix] = None
        else:
            axes[prefix] = Axis(parts["param"], parts["from"], parts["to"], steps)

    if problems:
        raise ConfigError(problems)
    return RunConfig(
        opos=tuple(opos),
        sigma_first=typed["sigma_first"],
        omega_rel_first=typed["omega_rel_first"],
        loss=typed.get("loss", 0.0),
        mode_loss=mode_loss,
        pump_loss=typed.get("pump_loss", 0.0),
        scan=axes["scan"],
        grid=axes["grid"],
        format=fmt,
        out=typed.get("out", "-"),
        entangle_tol=typed.get("entangle_tol", 1e-6),
        purity_tol=typed.get("purity_tol", 1e-3),
        jobs=jobs,
    )


def parse_config(path=None, overrides=None, preset="tripartite"):
    """Read a config file (optional), apply ``key=value`` overrides, validate."""
    file_values = {}
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        file_values = parse_text(text, source=str(path))
    if isinstance(overrides, (list, tuple)):
        overrides = parse_overrides(overrides)
    return build_config(file_values, overrides, preset)
