"""Experiment configuration: YAML (or JSON) file plus ``--set`` overrides.

Schema (keys mirror the solver dataclasses)::

    mode: nash | sep | ses | bayes | multi | reproduce
    target: <name>                       # reproduce only
    params:                              # two-player block
      a, b, c, gamma_bar, beta, p0_max, p1_max: positive numbers
      epsilon: positive number           # default 1e-3
    params:                              # multi block
      a, gamma_bar, p0_max, epsilon
      sus: [{id, b, c, p_max, beta}, ...]
      order: [id, ...]                   # optional, highest priority first
    sweep:                               # optional
      variable: name of a scalar params key (or b_bar in bayes mode)
      start, stop: numbers
      steps: integer >= 2                # or ``values: [...]`` instead
    bayes:                               # bayes only
      c_values: [...]                    # default [params.c]
      b_bar_values: [...]                # or a sweep over b_bar
    mc: {n_samples: int >= 1, seed: int}
    output: {format: csv | json, path: PATH}
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

MODES = ("nash", "sep", "ses", "bayes", "multi", "reproduce")
FORMATS = ("csv", "json")
PAIR_KEYS = ("a", "b", "c", "gamma_bar", "beta", "p0_max", "p1_max")
MULTI_KEYS = ("a", "gamma_bar", "p0_max")
SU_KEYS = ("id", "b", "c", "p_max", "beta")
TOP_KEYS = ("mode", "target", "params", "sweep", "bayes", "mc", "output")


class ConfigError(ValueError):
    """Malformed configuration; ``where`` names the field and, if known, the line."""

    def __init__(self, message: str, path: str = "", line: Optional[int] = None):
        self.path = path
        self.line = line
        where = path or "<config>"
        if line is not None:
            where = f"line {line}: {where}"
        super().__init__(f"{where}: {message}")


@dataclass
class Sweep:
    variable: str
    values: Tuple[float, ...]


@dataclass
class ExperimentConfig:
    mode: str
    params: Dict[str, Any]
    sweep: Optional[Sweep] = None
    n_samples: int = 10_000
    seed: int = 0
    out_format: str = "csv"
    out_path: Optional[str] = None
    target: Optional[str] = None
    c_values: Tuple[float, ...] = ()
    b_bar_values: Tuple[float, ...] = ()
    raw: Dict[str, Any] = field(default_factory=dict)


def _line_map(text: str) -> Dict[str, int]:
    """Dotted key path -> 1-based line of its value in the YAML text."""
    lines: Dict[str, int] = {}
    try:
        root = yaml.compose(text)
    except yaml.YAMLError:
        return lines

    def walk(node, path):
        if node is None:
            return
        lines.setdefault(path, node.start_mark.line + 1)
        if isinstance(node, yaml.MappingNode):
            for k, v in node.value:
                key = normalize_key(str(k.value))
                walk(v, f"{path}.{key}" if path else key)
        elif isinstance(node, yaml.SequenceNode):
            for i, v in enumerate(node.value):
                walk(v, f"{path}[{i}]")

    walk(root, "")
    return lines


def normalize_key(key: str) -> str:
    return key.strip().replace("-", "_")


def apply_override(data: Dict[str, Any], assignment: str) -> None:
    """Apply one ``dotted.key=value`` override; the value is parsed as YAML."""
    if "=" not in assignment:
        raise ConfigError(f"override {assignment!r} is not of the form key=value", "--set")
    key, raw = assignment.split("=", 1)
    parts = [normalize_key(p) for p in key.split(".") if p.strip()]
    if not parts:
        raise ConfigError("empty override key", "--set")
    try:
        value = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse value {raw!r}: {exc}", f"--set {key}") from None
    node = data
    for p in parts[:-1]:
        if not isinstance(node.get(p), dict):
            node[p] = {}
        node = node[p]
    node[parts[-1]] = value


def _normalize(obj):
    if isinstance(obj, dict):
        return {normalize_key(str(k)): _normalize(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_normalize(v) for v in obj]
    return obj


def _num(value, path, lines, positive=True) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", path, lines.get(path))
    v = float(value)
    if not np.isfinite(v) or (positive and v <= 0):
        raise ConfigError(f"must be a positive finite number, got {value!r}", path, lines.get(path))
    return v


def _int(value, path, lines, minimum) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"expected an integer >= {minimum}, got {value!r}", path, lines.get(path))
    return int(value)


def _num_list(value, path, lines) -> Tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise ConfigError("expected a non-empty list of numbers", path, lines.get(path))
    return tuple(_num(v, f"{path}[{i}]", lines) for i, v in enumerate(value))


def _check_unknown(block: Dict[str, Any], allowed, path: str, lines) -> None:
    for k in block:
        if k not in allowed:
            p = f"{path}.{k}" if path else k
            raise ConfigError(f"unknown key (allowed: {', '.join(allowed)})", p, lines.get(p))


def _params_pair(block, lines) -> Dict[str, Any]:
    _check_unknown(block, PAIR_KEYS + ("epsilon",), "params", lines)
    out = {}
    for k in PAIR_KEYS:
        if k not in block:
            raise ConfigError("required field missing", f"params.{k}", lines.get("params"))
        out[k] = _num(block[k], f"params.{k}", lines)
    out["epsilon"] = _num(block.get("epsilon", 1e-3), "params.epsilon", lines)
    return out


def _params_multi(block, lines) -> Dict[str, Any]:
    _check_unknown(block, MULTI_KEYS + ("epsilon", "sus", "order"), "params", lines)
    out: Dict[str, Any] = {}
    for k in MULTI_KEYS:
        if k not in block:
            raise ConfigError("required field missing", f"params.{k}", lines.get("params"))
        out[k] = _num(block[k], f"params.{k}", lines)
    out["epsilon"] = _num(block.get("epsilon", 1e-3), "params.epsilon", lines)
    sus = block.get("sus")
    if not isinstance(sus, list):
        raise ConfigError("expected a list of SU profiles", "params.sus", lines.get("params"))
    parsed = []
    for i, su in enumerate(sus):
        path = f"params.sus[{i}]"
        if not isinstance(su, dict):
            raise ConfigError("expected a mapping", path, lines.get(path))
        _check_unknown(su, SU_KEYS, path, lines)
        for k in SU_KEYS:
            if k not in su:
                raise ConfigError("required field missing", f"{path}.{k}", lines.get(path))
        entry = {"id": str(su["id"])}
        for k in SU_KEYS[1:]:
            entry[k] = _num(su[k], f"{path}.{k}", lines)
        parsed.append(entry)
    ids = [s["id"] for s in parsed]
    if len(set(ids)) != len(ids):
        raise ConfigError("SU ids must be unique", "params.sus", lines.get("params.sus"))
    out["sus"] = parsed
    order = block.get("order")
    if order is not None:
        if not isinstance(order, list) or sorted(map(str, order)) != sorted(ids):
            raise ConfigError("order must be a permutation of the SU ids", "params.order", lines.get("params.order"))
        out["order"] = [str(o) for o in order]
    return out


def _sweep(block, mode, params, lines) -> Sweep:
    _check_unknown(block, ("variable", "start", "stop", "steps", "values"), "sweep", lines)
    var = block.get("variable")
    if not isinstance(var, str):
        raise ConfigError("required field missing", "sweep.variable", lines.get("sweep"))
    var = normalize_key(var)
    scalars = [k for k, v in params.items() if isinstance(v, float)]
    if mode == "bayes":
        scalars.append("b_bar")
    if var not in scalars:
        raise ConfigError(f"cannot sweep {var!r} (choose from {', '.join(scalars)})", "sweep.variable",
                          lines.get("sweep.variable"))
    if "values" in block:
        vals = _num_list(block["values"], "sweep.values", lines)
        if len(vals) < 2:
            raise ConfigError("a sweep needs at least 2 values", "sweep.values", lines.get("sweep.values"))
        return Sweep(var, vals)
    for k in ("start", "stop", "steps"):
        if k not in block:
            raise ConfigError("required field missing", f"sweep.{k}", lines.get("sweep"))
    start = _num(block["start"], "sweep.start", lines)
    stop = _num(block["stop"], "sweep.stop", lines)
    steps = _int(block["steps"], "sweep.steps", lines, 2)
    return Sweep(var, tuple(float(v) for v in np.linspace(start, stop, steps)))


def build_config(data: Any, lines: Optional[Dict[str, int]] = None) -> ExperimentConfig:
    lines = lines or {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping")
    data = _normalize(data)
    _check_unknown(data, TOP_KEYS, "", lines)
    mode = data.get("mode")
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {', '.join(MODES)}, got {mode!r}", "mode", lines.get("mode"))

    out_block = data.get("output") or {}
    if not isinstance(out_block, dict):
        raise ConfigError("expected a mapping", "output", lines.get("output"))
    _check_unknown(out_block, ("format", "path"), "output", lines)
    fmt = out_block.get("format", "csv")
    if fmt not in FORMATS:
        raise ConfigError(f"format must be csv or json, got {fmt!r}", "output.format", lines.get("output.format"))

    mc = data.get("mc") or {}
    if not isinstance(mc, dict):
        raise ConfigError("expected a mapping", "mc", lines.get("mc"))
    _check_unknown(mc, ("n_samples", "seed"), "mc", lines)
    n_samples = _int(mc.get("n_samples", 10_000), "mc.n_samples", lines, 1)
    seed = _int(mc.get("seed", 0), "mc.seed", lines, 0)

    cfg = ExperimentConfig(
        mode=mode,
        params={},
        n_samples=n_samples,
        seed=seed,
        out_format=fmt,
        out_path=out_block.get("path"),
        raw=copy.deepcopy(data),
    )
    if mode == "reproduce":
        target = data.get("target")
        if not isinstance(target, str):
            raise ConfigError("required field missing", "target", lines.get("mode"))
        cfg.target = target
        return cfg

    block = data.get("params")
    if not isinstance(block, dict):
        raise ConfigError("required mapping missing", "params", lines.get("params"))
    if mode == "multi":
        cfg.params = _params_multi(block, lines)
    elif mode == "bayes":
        # b is drawn from the belief, so it may be omitted
        block = dict(block)
        block.setdefault("b", 1.0)
        cfg.params = _params_pair(block, lines)
    else:
        cfg.params = _params_pair(block, lines)

    if data.get("sweep") is not None:
        if not isinstance(data["sweep"], dict):
            raise ConfigError("expected a mapping", "sweep", lines.get("sweep"))
        cfg.sweep = _sweep(data["sweep"], mode, cfg.params, lines)

    if mode == "bayes":
        bblock = data.get("bayes") or {}
        _check_unknown(bblock, ("c_values", "b_bar_values"), "bayes", lines)
        cfg.c_values = (
            _num_list(bblock["c_values"], "bayes.c_values", lines) if "c_values" in bblock else (cfg.params["c"],)
        )
        if "b_bar_values" in bblock:
            cfg.b_bar_values = _num_list(bblock["b_bar_values"], "bayes.b_bar_values", lines)
        elif cfg.sweep is not None and cfg.sweep.variable == "b_bar":
            cfg.b_bar_values = cfg.sweep.values
        else:
            raise ConfigError("bayes mode needs bayes.b_bar_values or a sweep over b_bar", "bayes",
                              lines.get("bayes"))
        if cfg.sweep is not None and cfg.sweep.variable not in ("b_bar", "c"):
            raise ConfigError("bayes mode sweeps b_bar (use bayes.c_values for c)", "sweep.variable",
                              lines.get("sweep.variable"))
        if cfg.sweep is not None and cfg.sweep.variable == "c":
            cfg.c_values = cfg.sweep.values
    return cfg


def load_config(path: str, overrides: List[str] = ()) -> ExperimentConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigError(f"not valid YAML/JSON: {getattr(exc, 'problem', exc)}", path, line) from None
    lines = _line_map(text)
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("top level must be a mapping", path, 1)
    data = _normalize(data)
    for ov in overrides:
        apply_override(data, ov)
        key = ".".join(normalize_key(k) for k in ov.split("=", 1)[0].split(".") if k.strip())
        # values set on the command line have no line in the file
        for path in [p for p in lines if p == key or p.startswith(key + ".") or p.startswith(key + "[")]:
            del lines[path]
    return build_config(data, lines)
