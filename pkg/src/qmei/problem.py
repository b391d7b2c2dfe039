"""Problem-file parsing (schema ``qmei-problem/1``).

Complex matrices are nested arrays of two-element ``[re, im]`` pairs,
which is unambiguous across languages.  Validation failures carry the
JSON path and, for matrices, the offending entry's indices.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .config import DEFAULT, ToleranceConfig, resolve
from .errors import ValidationError
from .operators import DensityOperator, HermitianOperator, density, hermitian

SCHEMA_VERSION = "qmei-problem/1"


def parse_matrix(node, where: str) -> np.ndarray:
    """Nested [re, im] pairs -> complex ndarray; errors name the entry."""
    if not isinstance(node, list) or not node:
        raise ValidationError(f"{where}: expected a non-empty list of rows")
    n = len(node)
    out = np.empty((n, n), dtype=complex)
    for i, row in enumerate(node):
        if not isinstance(row, list) or len(row) != n:
            raise ValidationError(f"{where}: row {i} must have {n} entries")
        for j, entry in enumerate(row):
            if (
                not isinstance(entry, list)
                or len(entry) != 2
                or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in entry)
            ):
                raise ValidationError(
                    f"{where}: entry ({i}, {j}) must be a [re, im] pair of numbers"
                )
            out[i, j] = complex(entry[0], entry[1])
    return out


def serialize_matrix(matrix: np.ndarray) -> list:
    arr = np.asarray(matrix, dtype=complex)
    return [[[float(x.real), float(x.imag)] for x in row] for row in arr]


def parse_vector(node, where: str) -> np.ndarray:
    if not isinstance(node, list) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in node
    ):
        raise ValidationError(f"{where}: expected a list of numbers")
    return np.asarray(node, dtype=float)


@dataclass
class Problem:
    """A parsed problem file with typed accessors."""

    raw: dict
    config: ToleranceConfig
    seed: int | None = None
    path: str = "<memory>"
    states: dict = field(default_factory=dict)
    distributions: dict = field(default_factory=dict)

    def state(self, name: str, required: bool = True) -> DensityOperator | None:
        if name in self.states:
            return self.states[name]
        node = self.raw.get("states", {}).get(name)
        if node is None:
            if required:
                raise ValidationError(f"problem file is missing states.{name}")
            return None
        mat = parse_matrix(node, f"states.{name}")
        self.states[name] = density(mat, self.config, f"states.{name}")
        return self.states[name]

    def distribution_vector(self, name: str, required: bool = True) -> np.ndarray | None:
        node = self.raw.get("distributions", {}).get(name)
        if node is None:
            if required:
                raise ValidationError(f"problem file is missing distributions.{name}")
            return None
        return parse_vector(node, f"distributions.{name}")

    def observables(self, key: str = "observables", required: bool = True) -> list[HermitianOperator]:
        node = self.raw.get(key)
        if node is None:
            if required:
                raise ValidationError(f"problem file is missing {key}")
            return []
        if not isinstance(node, list):
            raise ValidationError(f"{key}: expected a list of matrices")
        return [
            hermitian(parse_matrix(m, f"{key}[{k}]"), self.config, f"{key}[{k}]")
            for k, m in enumerate(node)
        ]

    def targets(self) -> tuple[float, np.ndarray]:
        node = self.raw.get("targets")
        if not isinstance(node, dict):
            raise ValidationError("problem file is missing the targets block")
        iota = node.get("iota", 1.0)
        if not isinstance(iota, (int, float)) or isinstance(iota, bool):
            raise ValidationError("targets.iota must be a number")
        g = parse_vector(node.get("g", []), "targets.g")
        return float(iota), g

    def section(self, key: str) -> dict:
        node = self.raw.get(key)
        if not isinstance(node, dict):
            raise ValidationError(f"problem file is missing the {key} block")
        return node


def load_problem(
    path: str | None,
    overrides: dict | None = None,
    base: ToleranceConfig | None = None,
) -> Problem:
    """Read and validate a problem file; a missing path gives an empty
    problem carrying only the resolved configuration."""
    raw: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ValidationError(f"cannot read problem file {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path} is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ValidationError(f"{path}: top level must be an object")
        version = raw.get("version", SCHEMA_VERSION)
        if version != SCHEMA_VERSION:
            raise ValidationError(f"{path}: unsupported version {version!r}")
    file_config = raw.get("config")
    if file_config is not None and not isinstance(file_config, dict):
        raise ValidationError("config block must be an object")
    cfg = resolve(file_config, overrides, base)
    seed = raw.get("seed")
    if seed is not None and (not isinstance(seed, int) or isinstance(seed, bool)):
        raise ValidationError("seed must be an integer")
    return Problem(raw=raw, config=cfg, seed=seed, path=path or "<none>")
