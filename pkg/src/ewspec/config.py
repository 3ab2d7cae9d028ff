"""Scenario configuration: flat INI documents with a fixed schema.

Example::

    [model]
    kind = DJC
    deformation = linear_kerr
    chi = 0.0125
    selective_m = 4
    Omega0 = 0.125

    [state]
    kind = fock_excited
    n = 4

    [time]
    periods = 2, 4, 8, 16, 32, 64
    reference_n = 4

    [spectrum]
    Gamma = 0.01

    [run]
    method = both

Keys are case-insensitive. Unknown sections or keys are rejected. A JSON
metadata sidecar written by the runner is also accepted; its ``config``
block is read back with the same rules.
"""
from __future__ import annotations

import configparser
import json
import math
import re
from dataclasses import dataclass, field

from .dynamics import STATE_KINDS
from .errors import ConfigError
from .hamiltonians import ModelKind, ModelParams, selective_cavity_frequency
from .operators import DEFORMATION_KINDS, DeformationSpec

__all__ = ["SCHEMA", "ScenarioConfig", "parse_config", "load_config"]

# section -> key -> (type, default); a default of REQUIRED must be given
REQUIRED = object()
_DEFORMATION_PARAMS = sorted({p for ps in DEFORMATION_KINDS.values() for p in ps})

SCHEMA = {
    "model": {
        "kind": ("str", REQUIRED),
        "omega_a": ("float", 1.0),
        "omega_c": ("float", None),
        "selective_m": ("int", None),
        "omega0": ("float", 0.0),
        "deformation": ("str", "identity"),
        "cutoff": ("int", None),
        **{p: ("float", None) for p in _DEFORMATION_PARAMS},
    },
    "state": {
        "kind": ("str", "fock_excited"),
        "n": ("int", 0),
        "alpha": ("float", 0.0),
        "alpha_im": ("float", 0.0),
        "nbar": ("float", None),
        "excited": ("bool", True),
    },
    "time": {
        "periods": ("floats", None),
        "reference_n": ("int", None),
        "t_final": ("floats", None),
        "gamma_t": ("floats", None),
        "samples_per_period": ("int", 20),
    },
    "spectrum": {
        "gamma": ("float", 0.01),
        "omega_min": ("float", None),
        "omega_max": ("float", None),
        "points": ("int", 2001),
        "frame_shift": ("float", None),
        "quadrature_order": ("int", 8),
        "path": ("str", "gram"),
    },
    "run": {
        "probe": ("str", None),
        "method": ("str", "numeric"),
    },
    "sweep": {
        "coupling_min": ("float", 0.0),
        "coupling_max": ("float", 0.3),
        "points": ("int", 61),
        "levels": ("int", 12),
        "rtol": ("float", 1e-8),
    },
    "correlation": {
        "samples": ("int", 32),
    },
    "output": {
        "directory": ("str", None),
        "name": ("str", "scenario"),
    },
}

_DEFAULT_PERIODS = 16.0


@dataclass
class ScenarioConfig:
    """Resolved scenario. ``sections`` keeps the user-level values (with
    defaults) in schema form; it is what the metadata sidecar echoes."""

    kind: ModelKind
    params: ModelParams
    state: dict
    times: list
    time_spec: dict
    Gamma: float
    omega_min: float | None
    omega_max: float | None
    points: int
    frame_shift: float | None
    quadrature_order: int
    path: str
    probe: str
    method: str
    cutoff: int | None
    sweep: dict
    correlation_samples: int
    output_directory: str | None
    name: str
    sections: dict = field(default_factory=dict)

    def to_dict(self):
        return {s: dict(v) for s, v in self.sections.items()}


def _line_index(text):
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        m = re.match(r"\[([^\]]+)\]", line)
        if m:
            section = m.group(1).strip().lower()
            lines.setdefault((section, None), lineno)
            continue
        m = re.match(r"([^=:]+)[=:]", line)
        if m and section is not None:
            lines.setdefault((section, m.group(1).strip().lower()), lineno)
    return lines


def _convert(kind, raw, where, line):
    raw = raw.strip()
    try:
        if kind == "str":
            return raw
        if kind == "int":
            value = float(raw)
            if value != int(value):
                raise ValueError
            return int(value)
        if kind == "float":
            value = float(raw)
            if not math.isfinite(value):
                raise ConfigError(f"value {raw!r} is not finite", where, line)
            return value
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind == "floats":
            values = [float(x) for x in re.split(r"[,\s]+", raw) if x]
            if not values or not all(math.isfinite(v) for v in values):
                raise ValueError
            return values
    except ConfigError:
        raise
    except (TypeError, ValueError):
        raise ConfigError(f"cannot read {raw!r} as {kind}", where, line) from None
    raise AssertionError(kind)


def _from_json(text):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    block = doc.get("config", doc) if isinstance(doc, dict) else None
    if not isinstance(block, dict):
        raise ConfigError("JSON document has no config block")
    out = []
    for section, values in block.items():
        if not isinstance(values, dict):
            raise ConfigError("config sections must be objects", section)
        out.append(f"[{section}]")
        for key, value in values.items():
            if value is None:
                continue
            if isinstance(value, list):
                value = ", ".join(repr(float(v)) for v in value)
            elif isinstance(value, float):
                value = repr(value)
            out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"


def parse_config(text: str) -> ScenarioConfig:
    """Parse and resolve a scenario document (INI, or a JSON sidecar)."""
    if text.lstrip().startswith("{"):
        text = _from_json(text)
    lines = _line_index(text)
    parser = configparser.ConfigParser(interpolation=None, strict=True, empty_lines_in_values=False)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed document: {exc.message.splitlines()[0]}",
                          line=getattr(exc, "lineno", None)) from None

    raw = {}
    for section in parser.sections():
        sec = section.lower()
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]", sec, lines.get((sec, None)))
        for key, value in parser.items(section):
            if key not in SCHEMA[sec]:
                raise ConfigError(f"unknown key {key!r}", f"{sec}.{key}", lines.get((sec, key)))
            kind = SCHEMA[sec][key][0]
            raw[(sec, key)] = (_convert(kind, value, f"{sec}.{key}", lines.get((sec, key))),
                               lines.get((sec, key)))

    sections = {}
    for sec, keys in SCHEMA.items():
        sections[sec] = {}
        for key, (_, default) in keys.items():
            if (sec, key) in raw:
                sections[sec][key] = raw[(sec, key)][0]
            elif default is REQUIRED:
                raise ConfigError("missing required key", f"{sec}.{key}")
            else:
                sections[sec][key] = default

    def err(msg, sec, key):
        line = raw.get((sec, key), (None, lines.get((sec, None))))[1]
        return ConfigError(msg, f"{sec}.{key}" if key else sec, line)

    m = sections["model"]
    try:
        kind = ModelKind.parse(m["kind"])
    except ValueError as exc:
        raise err(str(exc), "model", "kind") from None

    dkind = m["deformation"]
    if dkind not in DEFORMATION_KINDS:
        raise err(f"unknown deformation {dkind!r}", "model", "deformation")
    needed = DEFORMATION_KINDS[dkind]
    for p in _DEFORMATION_PARAMS:
        if p in needed and m[p] is None:
            raise err(f"{dkind} needs parameter {p}", "model", p)
        if p not in needed and m[p] is not None:
            raise err(f"parameter {p} does not apply to {dkind}", "model", p)
    spec = DeformationSpec(dkind, {p: m[p] for p in needed})

    if m["omega_c"] is not None and m["selective_m"] is not None:
        raise err("omega_c and selective_m are mutually exclusive", "model", "selective_m")
    omega_c = m["omega_c"] if m["omega_c"] is not None else 1.0
    if m["selective_m"] is not None:
        if dkind != "linear_kerr":
            raise err("selective_m needs a linear_kerr deformation", "model", "selective_m")
        if m["selective_m"] < 0:
            raise err("selective_m must be >= 0", "model", "selective_m")
        omega_c = m["omega_a"] * selective_cavity_frequency(m["selective_m"], spec.params["chi"])
    for key, value in (("omega_a", m["omega_a"]), ("omega0", m["omega0"]), ("omega_c", omega_c)):
        if value < 0:
            raise err("must be >= 0", "model", key)
    if m["cutoff"] is not None and m["cutoff"] < 3:
        raise err("cutoff must be >= 3", "model", "cutoff")
    params = ModelParams(m["omega_a"], omega_c, m["omega0"], spec)

    s = sections["state"]
    if s["kind"] not in STATE_KINDS:
        raise err(f"unknown state kind {s['kind']!r}", "state", "kind")
    field_state = s["kind"].endswith("_field")
    if field_state != (kind is ModelKind.FIELD_ONLY):
        raise err(f"state {s['kind']} does not live on the {kind.value} Hilbert space", "state", "kind")
    if s["n"] < 0:
        raise err("n must be >= 0", "state", "n")
    if s["nbar"] is not None and s["nbar"] < 0:
        raise err("nbar must be >= 0", "state", "nbar")
    state = {
        "kind": s["kind"],
        "n": s["n"],
        "alpha": complex(s["alpha"], s["alpha_im"]),
        "nbar": s["nbar"],
        "excited": s["excited"],
    }

    sp = sections["spectrum"]
    if sp["gamma"] <= 0:
        raise err("Gamma must be > 0", "spectrum", "gamma")
    if sp["points"] < 1:
        raise err("empty omega grid", "spectrum", "points")
    if (sp["omega_min"] is None) != (sp["omega_max"] is None):
        raise err("give both omega_min and omega_max or neither", "spectrum", "omega_min")
    if sp["omega_min"] is not None and not sp["omega_min"] < sp["omega_max"]:
        raise err("omega_min must be below omega_max", "spectrum", "omega_max")
    if sp["quadrature_order"] not in (2, 4, 6, 8):
        raise err("quadrature_order must be 2, 4, 6 or 8", "spectrum", "quadrature_order")
    if sp["path"] not in ("gram", "trapezoid"):
        raise err("path must be gram or trapezoid", "spectrum", "path")

    r = sections["run"]
    probe = r["probe"] or ("field" if kind is ModelKind.FIELD_ONLY else "atom")
    if probe not in ("atom", "field"):
        raise err("probe must be atom or field", "run", "probe")
    if kind is ModelKind.FIELD_ONLY and probe != "field":
        raise err("the bare field model only has a field probe", "run", "probe")
    if r["method"] not in ("numeric", "closed_form", "both"):
        raise err("method must be numeric, closed_form or both", "run", "method")

    t = sections["time"]
    given = [k for k in ("periods", "t_final", "gamma_t") if t[k] is not None]
    if len(given) > 1:
        raise err(f"give only one of periods, t_final, gamma_t (got {', '.join(given)})", "time", given[1])
    if t["samples_per_period"] < 2:
        raise err("samples_per_period must be >= 2", "time", "samples_per_period")
    time_spec = {"samples_per_period": t["samples_per_period"]}
    if t["t_final"] is not None:
        times = list(t["t_final"])
        time_spec.update(mode="t_final")
    elif t["gamma_t"] is not None:
        times = [g / sp["gamma"] for g in t["gamma_t"]]
        time_spec.update(mode="gamma_t", gamma_t=t["gamma_t"])
    elif t["periods"] is None and params.Omega0 == 0:
        # no default time without a Rabi period; commands that need one complain
        times = []
        time_spec.update(mode="unset")
    else:
        periods = t["periods"] or [_DEFAULT_PERIODS]
        ref = t["reference_n"] if t["reference_n"] is not None else s["n"]
        if ref < 0:
            raise err("reference_n must be >= 0", "time", "reference_n")
        if params.Omega0 == 0:
            raise err("Rabi periods are undefined for Omega0 = 0; give t_final or gamma_t", "time", "periods")
        tau = 2 * math.pi / (params.Omega0 * math.sqrt(ref + 1))
        times = [p * tau for p in periods]
        time_spec.update(mode="periods", periods=periods, reference_n=ref, tau=tau)
    if any(not (x >= 0 and math.isfinite(x)) for x in times):
        raise err("observation times must be finite and >= 0", "time", given[0] if given else "periods")

    sw = sections["sweep"]
    if sw["points"] < 1:
        raise err("sweep needs at least one point", "sweep", "points")
    if sw["levels"] < 1:
        raise err("levels must be >= 1", "sweep", "levels")
    if sections["correlation"]["samples"] < 1:
        raise err("samples must be >= 1", "correlation", "samples")

    return ScenarioConfig(
        kind=kind,
        params=params,
        state=state,
        times=times,
        time_spec=time_spec,
        Gamma=sp["gamma"],
        omega_min=sp["omega_min"],
        omega_max=sp["omega_max"],
        points=sp["points"],
        frame_shift=sp["frame_shift"],
        quadrature_order=sp["quadrature_order"],
        path=sp["path"],
        probe=probe,
        method=r["method"],
        cutoff=m["cutoff"],
        sweep=dict(sw),
        correlation_samples=sections["correlation"]["samples"],
        output_directory=sections["output"]["directory"],
        name=sections["output"]["name"],
        sections=sections,
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())
