"""Declarative construction of rank-n projection maps.

A map spec is a small JSON object::

    {"type": "conjugation", "matrix": "V.json" | {...inline...}, "antiunitary": false}
    {"type": "complement"}
    {"type": "identity"}
    {"type": "noisy", "base": {...}, "sigma": 0.001, "seed": 42}
    {"type": "compose", "maps": [...]}        # rightmost applies first

The noisy wrapper conjugates the base map's output by a near-identity
unitary drawn from a hash of the input, so outputs remain exact
projections and the only property it can break is angle preservation
across different inputs.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import BadRank, MatrixFormatError, UnknownInput
from .linalg import COMPLEX, REAL, as_complex, frobenius, is_exactly_real
from .matio import canonical_key, matrix_from_obj, matrix_to_obj
from .extension import RankNMap
from .projections import Projection
from .tolerances import DEFAULT_TOL, ToleranceConfig


@dataclass(frozen=True)
class MapSpec:
    kind: str
    matrix: np.ndarray | None = None
    antiunitary: bool = False
    base: "MapSpec | None" = None
    sigma: float = 0.0
    seed: int = 0
    parts: tuple["MapSpec", ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "noisy" and self.sigma < 0:
            raise MatrixFormatError(f"sigma must be >= 0, got {self.sigma}")
        if self.kind == "compose" and not self.parts:
            raise MatrixFormatError("compose requires a nonempty map list")


def parse_map_spec(obj, base_dir: str = ".") -> MapSpec:
    """Parse the MapSpec JSON schema; matrix paths resolve against base_dir."""
    if not isinstance(obj, dict) or "type" not in obj:
        raise MatrixFormatError("map spec must be an object with a \"type\" key")
    kind = obj["type"]
    if kind == "identity":
        return MapSpec("identity")
    if kind == "complement":
        return MapSpec("complement")
    if kind == "conjugation":
        raw = obj.get("matrix")
        if isinstance(raw, str):
            path = raw if os.path.isabs(raw) else os.path.join(base_dir, raw)
            with open(path, encoding="utf-8") as fh:
                raw = json.load(fh)
        if not isinstance(raw, dict):
            raise MatrixFormatError("conjugation needs a \"matrix\" (inline object or file path)")
        m, _ = matrix_from_obj(raw)
        return MapSpec("conjugation", matrix=m, antiunitary=bool(obj.get("antiunitary", False)))
    if kind == "noisy":
        if "base" not in obj:
            raise MatrixFormatError("noisy needs a \"base\" map spec")
        sigma = obj.get("sigma", 0.0)
        if isinstance(sigma, bool) or not isinstance(sigma, (int, float)):
            raise MatrixFormatError(f"sigma must be a number, got {sigma!r}")
        return MapSpec(
            "noisy",
            base=parse_map_spec(obj["base"], base_dir),
            sigma=float(sigma),
            seed=int(obj.get("seed", 0)),
        )
    if kind == "compose":
        raw_parts = obj.get("maps")
        if not isinstance(raw_parts, list) or not raw_parts:
            raise MatrixFormatError("compose needs a nonempty \"maps\" list")
        return MapSpec("compose", parts=tuple(parse_map_spec(p, base_dir) for p in raw_parts))
    raise MatrixFormatError(f"unknown map type {kind!r}")


def load_map_spec(path) -> MapSpec:
    with open(path, encoding="utf-8") as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise MatrixFormatError(f"{path}: not valid JSON ({exc})") from exc
    return parse_map_spec(obj, base_dir=os.path.dirname(os.path.abspath(path)))


def _describe(spec: MapSpec) -> str:
    if spec.kind == "conjugation":
        return f"conjugation(antiunitary={spec.antiunitary})"
    if spec.kind == "noisy":
        return f"noisy(sigma={spec.sigma}, seed={spec.seed}, base={_describe(spec.base)})"
    if spec.kind == "compose":
        return "compose[" + ", ".join(_describe(p) for p in spec.parts) + "]"
    return spec.kind


def _noise_unitary(p: Projection, sigma: float, seed: int, field: str) -> np.ndarray:
    """Near-identity unitary specific to this input.

    Seeded from a hash of the canonical input bytes so the wrapped map stays
    deterministic per input while different inputs get independent kicks.
    In real mode the generator is skew-symmetric, keeping the rotation real.
    """
    digest = hashlib.blake2b(
        canonical_key(p.matrix) + seed.to_bytes(8, "little", signed=True),
        digest_size=8,
    ).digest()
    rng = np.random.default_rng(int.from_bytes(digest, "little"))
    d = p.ambient_dim
    g = rng.standard_normal((d, d))
    if field == REAL:
        generator = sigma * (g - g.T) / 2.0
    else:
        h = g + 1j * rng.standard_normal((d, d))
        generator = 1j * sigma * (h + h.conj().T) / 2.0
    return np.asarray(scipy.linalg.expm(generator), dtype=np.complex128)


def instantiate(spec: MapSpec, d: int, n: int, field: str = COMPLEX, tol: ToleranceConfig = DEFAULT_TOL) -> RankNMap:
    """Build the RankNMap a spec describes, validating it against (d, n, field)."""
    if spec.kind == "identity":
        fn = lambda p: p
    elif spec.kind == "complement":
        if d != 2 * n:
            raise BadRank(f"complement maps rank n to rank d - n; need d = 2n, got d={d}, n={n}")
        eye = np.eye(d, dtype=np.complex128)
        fn = lambda p: Projection(eye - p.matrix, rank=n, tol=tol)
    elif spec.kind == "conjugation":
        v = as_complex(spec.matrix)
        if v.shape != (d, d):
            raise MatrixFormatError(f"conjugation matrix is {v.shape}, expected ({d}, {d})")
        defect = frobenius(v.conj().T @ v - np.eye(d))
        if defect > tol.eq_tol * d:
            raise MatrixFormatError(f"conjugation matrix is not unitary (defect {defect:.3e})")
        if field == REAL:
            if not is_exactly_real(v):
                raise MatrixFormatError("real-field conjugation requires a real orthogonal matrix")
            if spec.antiunitary:
                raise MatrixFormatError("antiunitary has no meaning over the reals")
        if spec.antiunitary:
            fn = lambda p: Projection(v @ p.matrix.conj() @ v.conj().T, rank=n, tol=tol)
        else:
            fn = lambda p: Projection(v @ p.matrix @ v.conj().T, rank=n, tol=tol)
    elif spec.kind == "noisy":
        base_map = instantiate(spec.base, d, n, field, tol)
        if spec.sigma == 0.0:
            fn = base_map.evaluate
        else:
            def fn(p, _base=base_map, _sigma=spec.sigma, _seed=spec.seed, _field=field):
                u = _noise_unitary(p, _sigma, _seed, _field)
                out = _base.evaluate(p).matrix
                return Projection(u @ out @ u.conj().T, rank=n, tol=tol)
    elif spec.kind == "compose":
        stages = [instantiate(part, d, n, field, tol) for part in spec.parts]
        def fn(p, _stages=stages):
            for stage in reversed(_stages):
                p = stage.evaluate(p)
            return p
    else:
        raise MatrixFormatError(f"unknown map type {spec.kind!r}")
    return RankNMap(d, n, fn, descriptor=_describe(spec), field=field, tol=tol)


def map_to_table(phi: RankNMap, inputs: list[Projection]) -> list[dict]:
    """Capture input/output pairs as JSON-ready fixtures."""
    return [
        {
            "input": matrix_to_obj(p.matrix),
            "output": matrix_to_obj(phi.evaluate(p).matrix),
        }
        for p in inputs
    ]


def map_from_table(
    d: int,
    n: int,
    entries: list[dict],
    field: str = COMPLEX,
    tol: ToleranceConfig = DEFAULT_TOL,
) -> RankNMap:
    """Table-backed map: known inputs replay, unknown inputs raise.

    Lookup matches at the same 12-decimal canonical rounding the cache uses.
    """
    table: dict[bytes, Projection] = {}
    for entry in entries:
        pin, _ = matrix_from_obj(entry["input"])
        pout, _ = matrix_from_obj(entry["output"])
        table[canonical_key(pin)] = Projection(pout, rank=n, tol=tol)

    def fn(p: Projection) -> Projection:
        hit = table.get(canonical_key(p.matrix))
        if hit is None:
            raise UnknownInput("table-backed map has no entry for this projection")
        return hit

    return RankNMap(d, n, fn, descriptor="table", field=field, tol=tol)
