"""Experiment configuration: a line-oriented ``key = value`` format with sections.

Grammar::

    # comment               (also after a value)
    [family]                section header; sections: family, truncation, task
    key = value             one assignment per line

Values are numbers, booleans (``true``/``false``), bare words, or comma
separated lists. Complex numbers use a ``j`` or ``i`` suffix (``0.5+1j``).
Unknown sections or keys are errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from . import nonlinearity as nl
from .errors import ConfigError
from .families import (
    BarutGirardello,
    Binomial,
    Canonical,
    EntireSeries,
    FamilyDescriptor,
    GilmorePerelomov,
    Hypergeometric,
    PhotonAdded,
    Rescaled,
    Squeezed,
)
from .fock import TruncationPolicy

TASKS = ("eval", "verify", "moments", "scan", "dual-compare")

FAMILY_KEYS = {
    "canonical": set(),
    "rescaled": {"nonlinearity", "kappa", "q", "eta", "variant", "alpha", "beta", "values", "invert"},
    "photon_added": {"lambda", "g", "dual_form"},
    "binomial": {"mu"},
    "gp": {"kappa"},
    "bg": {"kappa"},
    "hypergeometric": {"alpha", "beta", "inverse"},
    "squeezed": {"u", "v"},
}

COMMON_TASK_KEYS = {"kind", "epsilon", "output"}
TASK_KEYS = {
    "eval": {"z", "allow_boundary"},
    "verify": {"z"},
    "moments": {"max_n", "n_nodes", "tol", "n_theta"},
    "scan": {"r_min", "r_max", "n_r", "n_theta", "allow_boundary"},
    "dual-compare": {"z"},
}

TRUNCATION_KEYS = {"n_max", "tail_tol", "edge_margin"}


@dataclass(frozen=True)
class ExperimentConfig:
    family: FamilyDescriptor
    trunc: TruncationPolicy
    task: str
    params: dict = field(default_factory=dict)
    epsilon: float = 1e-3
    output: str | None = None


@dataclass
class _Entry:
    value: str
    line: int


def _parse_lines(text: str, need_task: bool = True) -> dict[str, dict[str, _Entry]]:
    sections: dict[str, dict[str, _Entry]] = {}
    current = None
    header_line = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("malformed section header", lineno)
            name = line[1:-1].strip()
            if name not in ("family", "truncation", "task"):
                raise ConfigError(f"unknown section [{name}]", lineno)
            if name in sections:
                raise ConfigError(f"section [{name}] appears twice", lineno)
            sections[name] = {}
            header_line[name] = lineno
            current = name
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", lineno)
        if current is None:
            raise ConfigError("assignment before any section header", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError("empty key", lineno)
        if key in sections[current]:
            raise ConfigError("duplicate key", lineno, key)
        sections[current][key] = _Entry(value, lineno)
    for name in ("family", "task") if need_task else ("family",):
        if name not in sections:
            raise ConfigError(f"missing section [{name}]")
    for name, entries in sections.items():
        entries["__line__"] = _Entry("", header_line[name])
    return sections


def _float(e: _Entry, key: str) -> float:
    try:
        return float(e.value)
    except ValueError:
        raise ConfigError(f"expected a real number, got {e.value!r}", e.line, key) from None


def _int(e: _Entry, key: str) -> int:
    try:
        return int(e.value)
    except ValueError:
        raise ConfigError(f"expected an integer, got {e.value!r}", e.line, key) from None


def _bool(e: _Entry, key: str) -> bool:
    v = e.value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise ConfigError(f"expected true or false, got {e.value!r}", e.line, key)


def parse_complex(text: str) -> complex:
    s = text.strip().replace(" ", "")
    if s.endswith("i"):
        s = s[:-1] + "j"
    # a bare unit like "j" or "-j"
    if s.endswith("j") and (len(s) == 1 or s[-2] in "+-"):
        s = s[:-1] + "1j"
    return complex(s)


def _complex_list(e: _Entry, key: str) -> list[complex]:
    try:
        return [parse_complex(p) for p in e.value.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"expected complex numbers like 0.5+1j, got {e.value!r}", e.line, key) from None


def _float_list(e: _Entry, key: str) -> list[float]:
    try:
        return [float(p) for p in e.value.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"expected a list of reals, got {e.value!r}", e.line, key) from None


def _check_keys(entries: dict, allowed: set, section: str) -> None:
    for key, e in entries.items():
        if key != "__line__" and key not in allowed:
            raise ConfigError(f"unknown key in [{section}]", e.line, key)


def _build_family(entries: dict) -> FamilyDescriptor:
    if "kind" not in entries:
        raise ConfigError("[family] needs 'kind'", entries["__line__"].line, "kind")
    kind_e = entries["kind"]
    kind = kind_e.value
    if kind not in FAMILY_KEYS:
        raise ConfigError(f"unknown family kind {kind!r}; choose from {', '.join(FAMILY_KEYS)}", kind_e.line, "kind")
    _check_keys(entries, FAMILY_KEYS[kind] | {"kind"}, "family")
    get = entries.get
    try:
        if kind == "canonical":
            return Canonical()
        if kind == "photon_added":
            lam = _float(get("lambda", _Entry("0", kind_e.line)), "lambda")
            G = EntireSeries(tuple(_float_list(entries["g"], "g"))) if "g" in entries else EntireSeries()
            dual_form = _bool(entries["dual_form"], "dual_form") if "dual_form" in entries else False
            return PhotonAdded(lam, G, dual_form)
        if kind == "binomial":
            return Binomial(_float(_require(entries, "mu"), "mu"))
        if kind in ("gp", "bg"):
            kappa = _float(get("kappa", _Entry("1", kind_e.line)), "kappa")
            return GilmorePerelomov(kappa) if kind == "gp" else BarutGirardello(kappa)
        if kind == "hypergeometric":
            alpha = _float_list(get("alpha", _Entry("", kind_e.line)), "alpha")
            beta = _float_list(_require(entries, "beta"), "beta")
            inverse = _bool(entries["inverse"], "inverse") if "inverse" in entries else False
            return Hypergeometric(tuple(alpha), tuple(beta), inverse)
        if kind == "squeezed":
            return Squeezed(_float(_require(entries, "u"), "u"), _float(get("v", _Entry("0", kind_e.line)), "v"))
        return Rescaled(_build_spec(entries))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc), kind_e.line, "kind") from None


def _require(entries: dict, key: str) -> _Entry:
    if key not in entries:
        raise ConfigError("required key is missing", entries["__line__"].line, key)
    return entries[key]


def _build_spec(entries: dict) -> nl.NonlinearitySpec:
    name_e = _require(entries, "nonlinearity")
    name = name_e.value
    get = entries.get
    if name == "canonical":
        spec = nl.canonical()
    elif name in ("gp", "bg"):
        kappa = _float(get("kappa", _Entry("1", name_e.line)), "kappa")
        spec = nl.gp(kappa) if name == "gp" else nl.bg(kappa)
    elif name == "q_osc":
        spec = nl.q_osc(_float(_require(entries, "q"), "q"))
    elif name == "trapped_ion":
        variant = get("variant", _Entry("standard", name_e.line)).value
        spec = nl.trapped_ion(_float(_require(entries, "eta"), "eta"), variant)
    elif name == "hypergeometric":
        spec = nl.hypergeometric(_float_list(get("alpha", _Entry("", name_e.line)), "alpha"), _float_list(_require(entries, "beta"), "beta"))
    elif name == "table":
        spec = nl.table(_float_list(_require(entries, "values"), "values"))
    else:
        raise ConfigError(f"unknown nonlinearity {name!r}", name_e.line, "nonlinearity")
    if "invert" in entries and _bool(entries["invert"], "invert"):
        spec = spec.reciprocal()
    return spec


def _build_trunc(entries: dict | None) -> TruncationPolicy:
    if entries is None:
        return TruncationPolicy()
    _check_keys(entries, TRUNCATION_KEYS, "truncation")
    kw = {}
    if "n_max" in entries:
        kw["n_max"] = _int(entries["n_max"], "n_max")
    if "tail_tol" in entries:
        kw["tail_tol"] = _float(entries["tail_tol"], "tail_tol")
    if "edge_margin" in entries:
        kw["edge_margin"] = _int(entries["edge_margin"], "edge_margin")
    try:
        return TruncationPolicy(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc), entries["__line__"].line) from None


_PARAM_TYPES = {
    "z": _complex_list,
    "allow_boundary": _bool,
    "max_n": _int,
    "n_nodes": _int,
    "tol": _float,
    "n_theta": _int,
    "r_min": _float,
    "r_max": _float,
    "n_r": _int,
}


def parse_config(text: str, task: str | None = None) -> ExperimentConfig:
    """Parse and validate an experiment configuration.

    ``task`` (from the command line) may stand in for a missing ``kind`` in
    ``[task]``; when both are given they must agree.

    Raises
    ------
    ConfigError
        With the offending line and key.
    """
    sections = _parse_lines(text, need_task=task is None)
    family = _build_family(sections["family"])
    trunc = _build_trunc(sections.get("truncation"))
    task_entries = sections.get("task") or {"__line__": _Entry("", None)}
    if task is not None and task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; choose from {', '.join(TASKS)}")
    if "kind" in task_entries:
        kind_e = task_entries["kind"]
        if kind_e.value not in TASKS:
            raise ConfigError(f"unknown task {kind_e.value!r}; choose from {', '.join(TASKS)}", kind_e.line, "kind")
        if task is not None and kind_e.value != task:
            raise ConfigError(f"config declares task {kind_e.value!r} but {task!r} was requested", kind_e.line, "kind")
        task = kind_e.value
    elif task is None:
        raise ConfigError("required key is missing", task_entries["__line__"].line, "kind")
    kind_e = task_entries.get("kind", task_entries["__line__"])
    _check_keys(task_entries, TASK_KEYS[task] | COMMON_TASK_KEYS, "task")
    params = {}
    for key, e in task_entries.items():
        if key in _PARAM_TYPES:
            params[key] = _PARAM_TYPES[key](e, key)
    epsilon = _float(task_entries["epsilon"], "epsilon") if "epsilon" in task_entries else 1e-3
    if not 0 <= epsilon < 1:
        raise ConfigError("epsilon must lie in [0, 1)", task_entries["epsilon"].line, "epsilon")
    for key in ("max_n", "n_nodes", "n_theta", "n_r"):
        if key in params and params[key] < (0 if key == "max_n" else 1):
            raise ConfigError("value out of range", task_entries[key].line, key)
    if task == "eval" and not params.get("z"):
        raise ConfigError("eval needs a non-empty 'z' list", kind_e.line, "z")
    output = task_entries["output"].value if "output" in task_entries else None
    return ExperimentConfig(family, trunc, task, params, epsilon, output)
