"""
JSON encodings for matrices, grid functions, weights and operators.

File formats:

* matrix: ``{"d": int, "re": [[...]], "im": [[...]]}`` row-major
* weight: ``{"d": int, "depth": int, "leaves": [matrix, ...]}``
* function: ``{"d": int, "depth": int, "leaves": [{"re": [...], "im": [...]}, ...]}``
* shift: ``{"m": int, "n": int, "coeffs": [{"L": [level, index], "I": [...],
  "J": [...], "re": float, "im": float}, ...]}``

``encode_value``/``decode_value`` wrap these in ``{"__type__": tag, ...}``
objects so counterexample inputs can hold any mix of them. Floats survive a
round trip exactly because ``json`` writes them with ``repr``.
"""

import json
from pathlib import Path
from typing import Any, Callable, Dict, Tuple, Union

import numpy as np

from .dyadic import DyadicInterval, GridFunction, MatrixWeight
from .exceptions import ReportIOError, ValidationError
from .linalg import HermMatrix, HpdMatrix, MatrixLike, as_array
from .operators import HaarShiftSpec, MartingaleSymbol

TYPE_KEY = "__type__"


def _require(data: Dict[str, Any], *keys: str) -> None:
    missing = [key for key in keys if key not in data]
    if missing:
        raise ValidationError(
            f"JSON object is missing {', '.join(missing)}",
            field_name=missing[0],
            expected_type="object with keys " + ", ".join(keys),
        )


def matrix_to_json(a: MatrixLike) -> Dict[str, Any]:
    arr = as_array(a)
    return {"d": int(arr.shape[0]), "re": arr.real.tolist(), "im": arr.imag.tolist()}


def matrix_from_json(data: Dict[str, Any]) -> np.ndarray:
    _require(data, "re", "im")
    arr = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("Matrix JSON must be square", field_name="re")
    if "d" in data and int(data["d"]) != arr.shape[0]:
        raise ValidationError(
            f"Matrix JSON declares d={data['d']} but holds {arr.shape[0]} rows",
            field_name="d",
            field_value=data["d"],
        )
    return arr


def weight_to_json(weight: MatrixWeight) -> Dict[str, Any]:
    return {
        "d": weight.dim,
        "depth": weight.depth,
        "leaves": [matrix_to_json(leaf) for leaf in weight.leaf_values],
    }


def weight_from_json(data: Dict[str, Any]) -> MatrixWeight:
    _require(data, "leaves")
    weight = MatrixWeight(np.array([matrix_from_json(leaf) for leaf in data["leaves"]]))
    _check_header(data, weight.dim, weight.depth)
    return weight


def function_to_json(f: GridFunction) -> Dict[str, Any]:
    return {
        "d": f.dim,
        "depth": f.depth,
        "leaves": [
            {"re": leaf.real.tolist(), "im": leaf.imag.tolist()} for leaf in f.leaf_values
        ],
    }


def function_from_json(data: Dict[str, Any]) -> GridFunction:
    _require(data, "leaves")
    leaves = [
        np.asarray(leaf["re"], dtype=float) + 1j * np.asarray(leaf["im"], dtype=float)
        for leaf in data["leaves"]
    ]
    f = GridFunction(np.array(leaves))
    _check_header(data, f.dim, f.depth)
    return f


def _check_header(data: Dict[str, Any], dim: int, depth: int) -> None:
    for key, actual in (("d", dim), ("depth", depth)):
        if key in data and int(data[key]) != actual:
            raise ValidationError(
                f"Declared {key}={data[key]} does not match the leaves ({actual})",
                field_name=key,
                field_value=data[key],
            )


def shift_to_json(spec: HaarShiftSpec) -> Dict[str, Any]:
    coeffs = []
    for node, block in spec.coefficients.items():
        sources = node.descendants(spec.m)
        targets = node.descendants(spec.n)
        for a, source in enumerate(sources):
            for b, target in enumerate(targets):
                value = complex(block[a, b])
                if value == 0:
                    continue
                coeffs.append(
                    {
                        "L": [node.level, node.index],
                        "I": [source.level, source.index],
                        "J": [target.level, target.index],
                        "re": value.real,
                        "im": value.imag,
                    }
                )
    return {"m": spec.m, "n": spec.n, "coeffs": coeffs}


def shift_from_json(data: Dict[str, Any]) -> HaarShiftSpec:
    _require(data, "m", "n", "coeffs")
    m, n = int(data["m"]), int(data["n"])
    blocks: Dict[DyadicInterval, np.ndarray] = {}
    for entry in data["coeffs"]:
        _require(entry, "L", "I", "J", "re", "im")
        node = DyadicInterval(*entry["L"])
        source = DyadicInterval(*entry["I"])
        target = DyadicInterval(*entry["J"])
        if source.level != node.level + m or target.level != node.level + n:
            raise ValidationError(
                f"Coefficient at {node.key} pairs {source.key} with {target.key}, "
                f"expected levels {node.level + m} and {node.level + n}",
                field_name="coeffs",
            )
        if not (node.contains(source) and node.contains(target)):
            raise ValidationError(
                f"{source.key} or {target.key} does not lie below {node.key}",
                field_name="coeffs",
            )
        block = blocks.setdefault(node, np.zeros((1 << m, 1 << n), dtype=np.complex128))
        block[source.index - (node.index << m), target.index - (node.index << n)] = complex(
            entry["re"], entry["im"]
        )
    return HaarShiftSpec(m, n, blocks)


def symbol_to_json(sigma: MartingaleSymbol) -> Dict[str, Any]:
    return {
        "d": sigma.dim,
        "depth": sigma.depth,
        "levels": [[matrix_to_json(m) for m in level] for level in sigma.levels],
    }


def symbol_from_json(data: Dict[str, Any]) -> MartingaleSymbol:
    _require(data, "levels")
    return MartingaleSymbol(
        tuple(np.array([matrix_from_json(m) for m in level]) for level in data["levels"])
    )


def array_to_json(arr: np.ndarray) -> Dict[str, Any]:
    arr = np.asarray(arr)
    return {
        "shape": list(arr.shape),
        "re": np.real(arr).ravel().tolist(),
        "im": np.imag(arr).ravel().tolist(),
        "complex": bool(np.iscomplexobj(arr)),
    }


def array_from_json(data: Dict[str, Any]) -> np.ndarray:
    _require(data, "shape", "re", "im")
    shape = tuple(data["shape"])
    real = np.asarray(data["re"], dtype=float).reshape(shape)
    if not data.get("complex", True):
        return real
    return real + 1j * np.asarray(data["im"], dtype=float).reshape(shape)


Codec = Tuple[type, Callable[[Any], Dict[str, Any]], Callable[[Dict[str, Any]], Any]]

# Order matters: HpdMatrix is checked before its base class.
_CODECS: Dict[str, Codec] = {
    "hpd": (HpdMatrix, matrix_to_json, lambda d: HpdMatrix(matrix_from_json(d))),
    "herm": (HermMatrix, matrix_to_json, lambda d: HermMatrix(matrix_from_json(d))),
    "weight": (MatrixWeight, weight_to_json, weight_from_json),
    "function": (GridFunction, function_to_json, function_from_json),
    "shift": (HaarShiftSpec, shift_to_json, shift_from_json),
    "symbol": (MartingaleSymbol, symbol_to_json, symbol_from_json),
    "array": (np.ndarray, array_to_json, array_from_json),
}


def encode_value(value: Any) -> Any:
    """JSON-ready form of a value, tagging every non-primitive type."""
    for tag, (cls, encode, _) in _CODECS.items():
        if isinstance(value, cls):
            return {TYPE_KEY: tag, **encode(value)}
    if isinstance(value, DyadicInterval):
        return {TYPE_KEY: "node", "level": value.level, "index": value.index}
    if isinstance(value, (complex, np.complexfloating)):
        return {TYPE_KEY: "complex", "re": float(value.real), "im": float(value.imag)}
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, dict):
        return {str(key): encode_value(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [encode_value(item) for item in value]
    if value is None or isinstance(value, str):
        return value
    raise ValidationError(
        f"Cannot encode value of type {type(value).__name__}",
        field_value=type(value).__name__,
    )


def decode_value(data: Any) -> Any:
    if isinstance(data, list):
        return [decode_value(item) for item in data]
    if not isinstance(data, dict):
        return data
    tag = data.get(TYPE_KEY)
    if tag is None:
        return {key: decode_value(item) for key, item in data.items()}
    payload = {key: item for key, item in data.items() if key != TYPE_KEY}
    if tag == "complex":
        return complex(payload["re"], payload["im"])
    if tag == "node":
        return DyadicInterval(payload["level"], payload["index"])
    if tag not in _CODECS:
        raise ValidationError(f"Unknown encoded type {tag!r}", field_name=TYPE_KEY)
    return _CODECS[tag][2](payload)


def read_json(path: Union[str, Path]) -> Any:
    try:
        with open(path, "r") as handle:
            return json.load(handle)
    except FileNotFoundError as e:
        raise ReportIOError(f"File not found: {path}", path=str(path)) from e
    except (OSError, json.JSONDecodeError) as e:
        raise ReportIOError(f"Cannot read JSON from {path}: {e}", path=str(path)) from e


def load_weight(path: Union[str, Path]) -> MatrixWeight:
    return weight_from_json(read_json(path))


def load_function(path: Union[str, Path]) -> GridFunction:
    return function_from_json(read_json(path))


def load_shift(path: Union[str, Path]) -> HaarShiftSpec:
    return shift_from_json(read_json(path))
