"""Unit-cell configuration files.

The file is JSON with two sections, every value in SI units::

    {
      "cell": {
        "cell_pitch": 0.0135,
        "substrate_permittivity": 3.55,
        "substrate_loss_tangent": 0.0027,
        "layer1_height": 0.001524,
        "layer2_height": 0.000813,
        "patch_lengths": [0.0042, 0.01, 0.0085],
        "gap": 0.0002,
        "via_radius": 0.0004,
        "total_thickness": 0.0039,
        "fixed_inductance": 5e-11,
        "fixed_capacitance": 1e-13,
        "sheet_impedance_ratio": 11.27,
        "middle_patch_enabled": true
      },
      "varactor": {
        "junction_capacitance_zero_bias": 1.8891e-12,
        "grading_exponent": 5.1636,
        "junction_potential": 10.3416,
        "parasitic_capacitance": 4.6e-13,
        "series_resistance": 0.49,
        "series_inductance": 4.5e-10,
        "bias_range": [0.0, 14.0]
      }
    }

Omitted keys take the built-in defaults; unknown keys are rejected.
"""

from __future__ import annotations

import dataclasses
import json
from importlib import resources
from pathlib import Path

from .circuit import UnitCellParams, VaractorModel
from .errors import ConfigError, RisError

_CELL_FIELDS = {f.name for f in dataclasses.fields(UnitCellParams)} - {"varactor"}
_VARACTOR_FIELDS = {f.name for f in dataclasses.fields(VaractorModel)}
_SEQUENCE_LENGTHS = {"patch_lengths": 3, "bias_range": 2}

DEFAULT_CONFIG_NAME = "default_cell.json"


def _number(section: str, key: str, value):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}: expected a number, got {value!r}", field=f"{section}.{key}")
    return float(value)


def _coerce(section: str, key: str, value):
    if key == "middle_patch_enabled":
        if not isinstance(value, bool):
            raise ConfigError(f"{section}.{key}: expected true/false, got {value!r}", field=f"{section}.{key}")
        return value
    if key in _SEQUENCE_LENGTHS:
        n = _SEQUENCE_LENGTHS[key]
        if not isinstance(value, list) or len(value) != n:
            raise ConfigError(f"{section}.{key}: expected a list of {n} numbers", field=f"{section}.{key}")
        return tuple(_number(section, key, v) for v in value)
    return _number(section, key, value)


def params_from_dict(data: dict) -> UnitCellParams:
    if not isinstance(data, dict):
        raise ConfigError("configuration root must be an object")
    unknown = set(data) - {"cell", "varactor"}
    if unknown:
        name = sorted(unknown)[0]
        raise ConfigError(f"unknown section {name!r}", field=name)

    sections = {"cell": _CELL_FIELDS, "varactor": _VARACTOR_FIELDS}
    values: dict[str, dict] = {}
    for section, allowed in sections.items():
        raw = data.get(section, {})
        if not isinstance(raw, dict):
            raise ConfigError(f"section {section!r} must be an object", field=section)
        extra = set(raw) - allowed
        if extra:
            name = sorted(extra)[0]
            raise ConfigError(f"unknown key {section}.{name}", field=f"{section}.{name}")
        values[section] = {k: _coerce(section, k, v) for k, v in raw.items()}

    try:
        varactor = VaractorModel(**values["varactor"])
        return UnitCellParams(varactor=varactor, **values["cell"])
    except RisError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc


def params_to_dict(params: UnitCellParams) -> dict:
    cell = {name: getattr(params, name) for name in sorted(_CELL_FIELDS)}
    cell["patch_lengths"] = list(params.patch_lengths)
    varactor = {name: getattr(params.varactor, name) for name in sorted(_VARACTOR_FIELDS)}
    varactor["bias_range"] = list(params.varactor.bias_range)
    return {"cell": cell, "varactor": varactor}


def load_params(path) -> UnitCellParams:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return params_from_dict(data)


def save_params(params: UnitCellParams, path) -> None:
    Path(path).write_text(json.dumps(params_to_dict(params), indent=2) + "\n")


def default_config_path():
    return resources.files("varactor_ris") / "data" / DEFAULT_CONFIG_NAME


def default_params() -> UnitCellParams:
    """Calibrated parameters shipped with the package."""
    return params_from_dict(json.loads(default_config_path().read_text()))
