import json
import logging
from dataclasses import dataclass, field, fields
from importlib.resources import files
from pathlib import Path
from typing import Any, Dict, Literal, Tuple
import numpy as np
from jsonschema import Draft7Validator
from ..errors import ValidationError
from .grid import uniform_nodes
from .map_model import MapModel, validate_model_arrays
from .omega import OMEGA_KINDS, OmegaFn, omega_from_dict

logger = logging.getLogger(__name__)

CannedName = Literal["fig1", "fig2", "fig3_step", "omega_model", "scalar_bm"]
CANNED_NAMES = ("fig1", "fig2", "fig3_step", "omega_model", "scalar_bm")

_number_list = {"type": "array", "items": {"type": "number"}, "minItems": 1}

CONFIG_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["n_states", "Q", "sigma", "mu"],
    "additionalProperties": False,
    "properties": {
        "n_states": {"type": "integer", "minimum": 1},
        "Q": {"type": "array", "items": _number_list, "minItems": 1},
        "sigma": _number_list,
        "mu": _number_list,
        "omega": {
            "type": "object",
            "required": ["kind"],
            "properties": {"kind": {"enum": list(OMEGA_KINDS)}},
            "allOf": [
                {
                    "if": {"properties": {"kind": {"const": "constant"}}},
                    "then": {"required": ["beta"], "properties": {"beta": {"type": "number"}}},
                },
                {
                    "if": {"properties": {"kind": {"const": "per_state"}}},
                    "then": {"required": ["values"], "properties": {"values": _number_list}},
                },
                {
                    "if": {"properties": {"kind": {"const": "step"}}},
                    "then": {
                        "required": ["levels", "values"],
                        "properties": {"levels": _number_list, "values": _number_list},
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "affine_band"}}},
                    "then": {
                        "required": ["gamma0", "gamma1", "d"],
                        "properties": {
                            "gamma0": {"type": "number"},
                            "gamma1": {"type": "number"},
                            "d": {"type": "number"},
                        },
                    },
                },
                {
                    "if": {"properties": {"kind": {"const": "tabulated"}}},
                    "then": {
                        "required": ["x", "values"],
                        "properties": {
                            "x": _number_list,
                            "values": {"type": "array", "items": _number_list, "minItems": 1},
                        },
                    },
                },
            ],
        },
        "grid": {
            "type": "object",
            "required": ["x_min", "x_max", "h"],
            "additionalProperties": False,
            "properties": {
                "x_min": {"type": "number"},
                "x_max": {"type": "number"},
                "h": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "seed": {"type": "integer", "minimum": 0},
        "q": {"type": "number", "minimum": 0},
        "delta": {"type": "number", "minimum": 0},
        "x": {"type": "number"},
        "c": {"type": "number"},
        "d": {"type": "number"},
        "paths": {"type": "integer", "minimum": 1},
        "dt": {"type": "number", "exclusiveMinimum": 0},
        "t_max": {"type": "number", "exclusiveMinimum": 0},
    },
}


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    h: float

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """
        Parse a "min:max:h" grid override.

        Args:
            text (str): Colon-separated bounds and step.

        Returns:
            GridSpec: The parsed grid.
        """
        parts = text.split(":")
        try:
            x_min, x_max, h = (float(p) for p in parts)
        except ValueError:
            raise ValidationError(f"Invalid grid '{text}', expected min:max:h", code="invalid_grid")
        if not h > 0 or x_max < x_min:
            raise ValidationError(f"Invalid grid '{text}': need h > 0 and min <= max", code="invalid_grid")
        return cls(x_min, x_max, h)

    def nodes(self) -> np.ndarray:
        return uniform_nodes(self.x_min, self.x_max, self.h)


@dataclass(frozen=True)
class RunOptions:
    """
    Run parameters a configuration may carry and the CLI may override.
    """

    grid: GridSpec | None = None
    seed: int | None = None
    q: float | None = None
    delta: float | None = None
    x: float | None = None
    c: float | None = None
    d: float | None = None
    paths: int = 100_000
    dt: float = 1e-3
    t_max: float = 200.0
    overrides: Dict[str, Any] = field(default_factory=dict, compare=False, repr=False)

    def with_overrides(self, **kwargs: Any) -> "RunOptions":
        """Copy with every non-None keyword applied."""
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        applied = {k: v for k, v in kwargs.items() if v is not None}
        values.update(applied)
        values["overrides"] = {**self.overrides, **applied}
        return RunOptions(**values)


def _schema_errors(doc: Any) -> list:
    validator = Draft7Validator(CONFIG_SCHEMA)
    errors = []
    for err in sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path)):
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        errors.append(f"{where}: {err.message}")
    return errors


def load_config(text: bytes | str) -> Tuple[MapModel, OmegaFn, RunOptions]:
    """
    Parse and validate a JSON configuration document.

    Args:
        text (bytes | str): The document.

    Returns:
        Tuple[MapModel, OmegaFn, RunOptions]: Validated model, killing intensity and run options.
    """
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ValidationError(f"Invalid configuration JSON: {e}", code="parse_error")

    errors = _schema_errors(doc)
    if errors:
        raise ValidationError(errors, code="invalid_config")

    n = doc["n_states"]
    q_gen = np.array(doc["Q"], dtype=float) if _is_square(doc["Q"], n) else None
    sigma = np.array(doc["sigma"], dtype=float)
    mu = np.array(doc["mu"], dtype=float)
    if q_gen is None:
        errors.append(f"Q must be a {n} x {n} matrix")
    if sigma.shape != (n,):
        errors.append(f"sigma has length {sigma.shape[0]}, expected {n}")
    if mu.shape != (n,):
        errors.append(f"mu has length {mu.shape[0]}, expected {n}")
    if not errors:
        errors.extend(validate_model_arrays(q_gen, sigma, mu))

    omega = None
    try:
        omega = omega_from_dict(doc.get("omega"), n)
    except ValidationError as e:
        errors.extend(e.errors)

    grid = None
    if "grid" in doc:
        g = doc["grid"]
        if g["x_max"] < g["x_min"]:
            errors.append(f"grid x_max = {g['x_max']} is below x_min = {g['x_min']}")
        else:
            grid = GridSpec(float(g["x_min"]), float(g["x_max"]), float(g["h"]))

    if errors:
        raise ValidationError(errors, code="invalid_config")

    options = RunOptions(
        grid=grid,
        **{k: doc[k] for k in ("seed", "q", "delta", "x", "c", "d", "paths", "dt", "t_max") if k in doc},
    )
    model = MapModel(q_gen, sigma, mu)
    logger.debug(f"Loaded configuration: N={n}, omega={omega.kind}")
    return model, omega, options


def _is_square(rows: list, n: int) -> bool:
    return len(rows) == n and all(len(r) == n for r in rows)


def load_config_file(path: str | Path) -> Tuple[MapModel, OmegaFn, RunOptions]:
    """
    Read and parse a configuration file.

    Args:
        path (str | Path): Path to the JSON document.

    Returns:
        Tuple[MapModel, OmegaFn, RunOptions]: As `load_config`.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"Configuration file not found: {path}", code="config_not_found")
    return load_config(path.read_bytes())


def load_canned(name: CannedName) -> Tuple[MapModel, OmegaFn, RunOptions]:
    """
    Load one of the bundled configurations.

    Args:
        name (CannedName): One of "fig1", "fig2", "fig3_step", "omega_model", "scalar_bm".

    Returns:
        Tuple[MapModel, OmegaFn, RunOptions]: As `load_config`.
    """
    if name not in CANNED_NAMES:
        raise ValidationError(
            f"Invalid canned configuration: {name}. Valid names are: {', '.join(CANNED_NAMES)}",
            code="config_not_found",
        )
    asset = files("omegamap.assets").joinpath(f"{name}.json")
    return load_config(asset.read_bytes())


def serialize(model: MapModel, omega: OmegaFn, options: RunOptions | None = None) -> str:
    """
    Render a configuration document that `load_config` parses back to equal objects.

    Args:
        model (MapModel): The model.
        omega (OmegaFn): The killing intensity.
        options (RunOptions, optional): Run options. Defaults to None.

    Returns:
        str: JSON text.
    """
    doc: Dict[str, Any] = {
        "n_states": model.n_states,
        "Q": model.q_gen.tolist(),
        "sigma": model.sigma.tolist(),
        "mu": model.mu.tolist(),
        "omega": omega.to_dict(),
    }
    if options is not None:
        if options.grid is not None:
            doc["grid"] = {"x_min": options.grid.x_min, "x_max": options.grid.x_max, "h": options.grid.h}
        for f in fields(options):
            if f.name in ("grid", "overrides"):
                continue
            value = getattr(options, f.name)
            if value is not None:
                doc[f.name] = value
    return json.dumps(doc, indent=2)
