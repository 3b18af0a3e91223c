"""Experiment config files (TOML) and their validation.

Example::

    experiment = "bell-scan"
    seed = 7
    trials = 100000

    [phases]
    phi_a = ["deg:0", "deg:60", "deg:90", "deg:180"]
    phi_b = ["deg:0", "deg:60", "deg:90", "deg:180"]
    pairing = "zip"          # or "grid" (default): every phi_a with every phi_b

    [output]
    path = "out/scan"
    format = "csv"

Angles are radians unless written as ``"deg:<value>"``. A range may be given
as ``{start = ..., stop = ..., num = ...}`` (inclusive, evenly spaced).
"""

from __future__ import annotations

import math
import os
import sys
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

EXPERIMENTS = ("entangle", "teleport", "teleport-entangled", "bell-scan", "mz-single")
FORMATS = ("csv", "json")
TOP_LEVEL_KEYS = {"experiment", "seed", "trials", "qubit", "bs", "phases", "output"}
QUBIT_KEYS = ("a_re", "a_im", "b_re", "b_im")
BS_KEYS = ("t_re", "t_im", "r_re", "r_im")
QUBIT_TOL = 1e-9
BS_TOL = 1e-12


class ConfigError(ValueError):
    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    seed: int
    trials: int
    output_path: Path
    output_format: str
    qubit: tuple[complex, complex] | None = None
    bs: tuple[complex, complex] | None = None
    phi_a: tuple[float, ...] | None = None
    phi_b: tuple[float, ...] | None = None
    pairing: str = "grid"

    def phase_pairs(self) -> list[tuple[float, float]]:
        if self.phi_a is None or self.phi_b is None:
            return []
        if self.pairing == "zip":
            return list(zip(self.phi_a, self.phi_b))
        return [(a, b) for a in self.phi_a for b in self.phi_b]


def load(path: str | Path) -> dict[str, Any]:
    """Read a TOML config; raises ``ConfigError`` if unreadable or malformed."""
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc.strerror or exc}"]) from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"config {path} is not valid TOML: {exc}"]) from None


def parse_angle(value: Any) -> float:
    if isinstance(value, bool):
        raise ValueError(f"angle must be a number, got {value!r}")
    if isinstance(value, (int, float)):
        angle = float(value)
    elif isinstance(value, str):
        text = value.strip()
        if text.startswith("deg:"):
            angle = math.radians(float(text[4:]))
        elif text.startswith("rad:"):
            angle = float(text[4:])
        else:
            raise ValueError(f"angle string must start with 'deg:' or 'rad:', got {value!r}")
    else:
        raise ValueError(f"cannot read an angle from {value!r}")
    if not math.isfinite(angle):
        raise ValueError(f"angle must be finite, got {value!r}")
    return angle


def parse_angles(spec: Any) -> tuple[float, ...]:
    """Scalar, list, or ``{start, stop, num}`` range."""
    if isinstance(spec, Mapping):
        missing = [k for k in ("start", "stop", "num") if k not in spec]
        if missing:
            raise ValueError(f"range needs start, stop and num (missing {', '.join(missing)})")
        num = spec["num"]
        if isinstance(num, bool) or not isinstance(num, int) or num < 1:
            raise ValueError(f"range num must be a positive integer, got {num!r}")
        grid = np.linspace(parse_angle(spec["start"]), parse_angle(spec["stop"]), num)
        return tuple(float(x) for x in grid)
    if isinstance(spec, list):
        if not spec:
            raise ValueError("angle list is empty")
        return tuple(parse_angle(v) for v in spec)
    return (parse_angle(spec),)


def _is_int(v: Any) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _complex_pair(block: Any, keys: tuple[str, ...], name: str, problems: list[str]):
    if not isinstance(block, Mapping):
        problems.append(f"[{name}] must be a table with keys {', '.join(keys)}")
        return None
    vals = []
    for k in keys:
        v = block.get(k)
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            problems.append(f"[{name}] {k} must be a finite number")
            return None
        vals.append(float(v))
    extra = set(block) - set(keys) - {"normalize"}
    if extra:
        problems.append(f"[{name}] has unknown keys {sorted(extra)}")
    return complex(vals[0], vals[1]), complex(vals[2], vals[3])


def _check_norm(pair, block: Mapping, name: str, tol: float, problems: list[str]):
    norm2 = abs(pair[0]) ** 2 + abs(pair[1]) ** 2
    if norm2 == 0:
        problems.append(f"[{name}] amplitudes are all zero")
        return None
    if block.get("normalize", False) is True:
        n = math.sqrt(norm2)
        return pair[0] / n, pair[1] / n
    if abs(norm2 - 1) > tol:
        problems.append(f"[{name}] squared amplitudes sum to {norm2!r}, not 1 (set normalize = true)")
        return None
    return pair


def _unwritable(path: Path) -> str | None:
    """Reason the output directory cannot be created or written, if any."""
    probe = path
    while not probe.exists():
        if probe.parent == probe:
            break
        probe = probe.parent
    if probe.exists() and not probe.is_dir():
        return f"[output] path {path} is blocked by the file {probe}"
    if not os.access(probe, os.W_OK | os.X_OK):
        return f"[output] path {path} is not writable"
    return None


def _check(raw: Mapping[str, Any]) -> tuple[list[str], dict[str, Any]]:
    problems: list[str] = []
    out: dict[str, Any] = {}

    unknown = set(raw) - TOP_LEVEL_KEYS
    if unknown:
        problems.append(f"unknown top-level keys {sorted(unknown)}")

    exp = raw.get("experiment")
    if exp not in EXPERIMENTS:
        problems.append(f"experiment must be one of {', '.join(EXPERIMENTS)}; got {exp!r}")
    out["experiment"] = exp

    seed = raw.get("seed")
    if seed is None:
        problems.append("seed is required (no entropy default)")
    elif not _is_int(seed) or not 0 <= seed < 2**64:
        problems.append(f"seed must be an integer in [0, 2**64), got {seed!r}")
    out["seed"] = seed

    trials = raw.get("trials")
    if not _is_int(trials) or trials < 1:
        problems.append(f"trials must be an integer >= 1, got {trials!r}")
    out["trials"] = trials

    if exp == "teleport":
        if "qubit" not in raw:
            problems.append("teleport needs a [qubit] block (a_re, a_im, b_re, b_im)")
        else:
            pair = _complex_pair(raw["qubit"], QUBIT_KEYS, "qubit", problems)
            if pair is not None:
                out["qubit"] = _check_norm(pair, raw["qubit"], "qubit", QUBIT_TOL, problems)

    if exp == "teleport-entangled":
        if "bs" not in raw:
            problems.append("teleport-entangled needs a [bs] block (t_re, t_im, r_re, r_im)")
        else:
            pair = _complex_pair(raw["bs"], BS_KEYS, "bs", problems)
            if pair is not None:
                out["bs"] = _check_norm(pair, raw["bs"], "bs", BS_TOL, problems)

    if exp in ("bell-scan", "mz-single"):
        phases = raw.get("phases")
        if not isinstance(phases, Mapping):
            problems.append(f"{exp} needs a [phases] block with phi_a and phi_b")
        else:
            for key in ("phi_a", "phi_b"):
                if key not in phases:
                    problems.append(f"[phases] {key} is required")
                    continue
                try:
                    out[key] = parse_angles(phases[key])
                except ValueError as exc:
                    problems.append(f"[phases] {key}: {exc}")
            pairing = phases.get("pairing", "grid")
            if pairing not in ("grid", "zip"):
                problems.append(f"[phases] pairing must be 'grid' or 'zip', got {pairing!r}")
            out["pairing"] = pairing
            a, b = out.get("phi_a"), out.get("phi_b")
            if pairing == "zip" and a is not None and b is not None and len(a) != len(b):
                problems.append(f"[phases] zip pairing needs equal lengths, got {len(a)} and {len(b)}")
            if exp == "mz-single" and a is not None and b is not None and (len(a) != 1 or len(b) != 1):
                problems.append("mz-single takes exactly one phi_a and one phi_b")
            extra = set(phases) - {"phi_a", "phi_b", "pairing"}
            if extra:
                problems.append(f"[phases] has unknown keys {sorted(extra)}")

    output = raw.get("output")
    if not isinstance(output, Mapping):
        problems.append("an [output] block with path and format is required")
    else:
        path = output.get("path")
        if not isinstance(path, str) or not path:
            problems.append("[output] path must be a non-empty string")
        elif (problem := _unwritable(Path(path))) is not None:
            problems.append(problem)
        fmt = output.get("format", "json")
        if fmt not in FORMATS:
            problems.append(f"[output] format must be one of {', '.join(FORMATS)}, got {fmt!r}")
        out["output_path"] = path
        out["output_format"] = fmt

    return problems, out


def validate(raw: Mapping[str, Any]) -> list[str]:
    """Human-readable problems with a config; empty means it will run."""
    return _check(raw)[0]


def parse(raw: Mapping[str, Any]) -> ExperimentConfig:
    problems, v = _check(raw)
    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(
        experiment=v["experiment"],
        seed=v["seed"],
        trials=v["trials"],
        output_path=Path(v["output_path"]),
        output_format=v["output_format"],
        qubit=v.get("qubit"),
        bs=v.get("bs"),
        phi_a=v.get("phi_a"),
        phi_b=v.get("phi_b"),
        pairing=v.get("pairing", "grid"),
    )
