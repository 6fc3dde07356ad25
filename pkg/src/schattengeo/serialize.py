"""JSON encodings for matrices, vectors, groups, norms and certificates.

Matrices travel as {"n": ..., "re": [[...]], "im": [[...]]} with the
imaginary block omitted when it vanishes. Groups are {"p": ...,
"generators": [matrix, ...]} plus an optional "includes_inverses" flag.
Norm specs are a tagged union on "kind": "hilbert" carries a form "a",
"max" carries a list "bs", "pushforward" carries a map "g" and a nested
"inner" spec. A certificate is {"lower": matrix, "upper": matrix}.

Every malformed input is reported as a ValidationError so the command line
can map it to its input-error exit code.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Union

import numpy as np

from .action import GroupPresentation
from .exceptions import ValidationError
from .norms import HilbertNorm, MaxHilbertNorm, NormSpec, PushforwardNorm


def _real_block(obj: Any, n_rows: int, name: str) -> np.ndarray:
    try:
        arr = np.asarray(obj, dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is not a rectangular numeric block") from exc
    if arr.ndim != 2 or arr.shape[0] != n_rows:
        raise ValidationError(f"{name} must be a {n_rows}-row nested list")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} has non-finite entries")
    return arr


def matrix_to_json(m) -> dict:
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValidationError("matrix payload must be square")
    out: dict = {"n": int(arr.shape[0]), "re": arr.real.tolist()}
    if np.any(arr.imag != 0.0):
        out["im"] = arr.imag.tolist()
    return out


def matrix_from_json(obj: Any, name: str = "matrix") -> np.ndarray:
    if not isinstance(obj, dict):
        raise ValidationError(f"{name} must be an object with n/re[/im]")
    try:
        n = int(obj["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"{name} is missing an integer 'n'") from exc
    if n < 1:
        raise ValidationError(f"{name} has nonpositive dimension {n}")
    if "re" not in obj:
        raise ValidationError(f"{name} is missing 're'")
    re = _real_block(obj["re"], n, f"{name}.re")
    if re.shape != (n, n):
        raise ValidationError(f"{name}.re is not {n}x{n}")
    if "im" in obj:
        im = _real_block(obj["im"], n, f"{name}.im")
        if im.shape != (n, n):
            raise ValidationError(f"{name}.im is not {n}x{n}")
    else:
        im = np.zeros((n, n))
    return re + 1j * im


def vector_to_json(v) -> dict:
    arr = np.asarray(v, dtype=np.complex128).reshape(-1)
    out: dict = {"n": int(arr.size), "re": arr.real.tolist()}
    if np.any(arr.imag != 0.0):
        out["im"] = arr.imag.tolist()
    return out


def vector_from_json(obj: Any, name: str = "vector") -> np.ndarray:
    if not isinstance(obj, dict) or "n" not in obj or "re" not in obj:
        raise ValidationError(f"{name} must be an object with n/re[/im]")
    n = int(obj["n"])
    try:
        re = np.asarray(obj["re"], dtype=np.float64).reshape(-1)
        im = (
            np.asarray(obj["im"], dtype=np.float64).reshape(-1)
            if "im" in obj
            else np.zeros(n)
        )
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"{name} blocks are not numeric lists") from exc
    if re.size != n:
        raise ValidationError(f"{name}.re has size {re.size}, expected {n}")
    if im.size != n:
        raise ValidationError(f"{name}.im has size {im.size}, expected {n}")
    v = re + 1j * im
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite entries")
    return v


def group_to_json(group: GroupPresentation) -> dict:
    out = {
        "p": group.p,
        "generators": [matrix_to_json(g) for g in group.generators],
    }
    if group.includes_inverses:
        out["includes_inverses"] = True
    return out


def group_from_json(obj: Any) -> GroupPresentation:
    if not isinstance(obj, dict):
        raise ValidationError("group must be an object with p/generators")
    if "p" not in obj or "generators" not in obj:
        raise ValidationError("group is missing 'p' or 'generators'")
    gens = obj["generators"]
    if not isinstance(gens, list) or not gens:
        raise ValidationError("group generators must be a nonempty list")
    mats = tuple(
        matrix_from_json(g, name=f"generator {i}") for i, g in enumerate(gens)
    )
    try:
        p = float(obj["p"])
    except (TypeError, ValueError) as exc:
        raise ValidationError("group exponent p must be a number") from exc
    return GroupPresentation(
        mats, p, includes_inverses=bool(obj.get("includes_inverses", False))
    )


def normspec_to_json(spec: NormSpec) -> dict:
    if isinstance(spec, HilbertNorm):
        return {"kind": "hilbert", "a": matrix_to_json(spec.a)}
    if isinstance(spec, MaxHilbertNorm):
        return {"kind": "max", "bs": [matrix_to_json(b) for b in spec.forms]}
    if isinstance(spec, PushforwardNorm):
        return {
            "kind": "pushforward",
            "g": matrix_to_json(spec.g),
            "inner": normspec_to_json(spec.inner),
        }
    raise ValidationError(f"unknown norm spec {type(spec).__name__}")


def normspec_from_json(obj: Any, depth: int = 0) -> NormSpec:
    if depth > 16:
        raise ValidationError("norm spec nesting is too deep")
    if not isinstance(obj, dict) or "kind" not in obj:
        raise ValidationError("norm spec must be an object with a 'kind' tag")
    kind = obj["kind"]
    if kind == "hilbert":
        if "a" not in obj:
            raise ValidationError("hilbert spec is missing 'a'")
        return HilbertNorm(matrix_from_json(obj["a"], name="hilbert form"))
    if kind == "max":
        bs = obj.get("bs")
        if not isinstance(bs, list) or not bs:
            raise ValidationError("max spec needs a nonempty 'bs' list")
        return MaxHilbertNorm(
            tuple(matrix_from_json(b, name=f"form {i}") for i, b in enumerate(bs))
        )
    if kind == "pushforward":
        if "g" not in obj or "inner" not in obj:
            raise ValidationError("pushforward spec needs 'g' and 'inner'")
        return PushforwardNorm(
            matrix_from_json(obj["g"], name="pushforward map"),
            normspec_from_json(obj["inner"], depth + 1),
        )
    raise ValidationError(f"unknown norm spec kind {kind!r}")


def cert_to_json(lower, upper) -> dict:
    return {"lower": matrix_to_json(lower), "upper": matrix_to_json(upper)}


def cert_from_json(obj: Any) -> tuple[np.ndarray, np.ndarray]:
    if not isinstance(obj, dict) or "lower" not in obj or "upper" not in obj:
        raise ValidationError("certificate must carry 'lower' and 'upper'")
    return (
        matrix_from_json(obj["lower"], name="cert lower"),
        matrix_from_json(obj["upper"], name="cert upper"),
    )


def scenario_from_json(obj: Any) -> dict:
    """Rigidity scenario: spec, isometries, cert pair and the exponent."""
    if not isinstance(obj, dict):
        raise ValidationError("scenario must be an object")
    for key in ("p", "spec", "isometries", "cert"):
        if key not in obj:
            raise ValidationError(f"scenario is missing {key!r}")
    isos = obj["isometries"]
    if not isinstance(isos, list) or not isos:
        raise ValidationError("scenario isometries must be a nonempty list")
    lower, upper = cert_from_json(obj["cert"])
    expected = obj.get("expected_verdict")
    if expected is not None and not isinstance(expected, str):
        raise ValidationError("expected_verdict must be a string when present")
    return {
        "p": float(obj["p"]),
        "spec": normspec_from_json(obj["spec"]),
        "isometries": [
            matrix_from_json(h, name=f"isometry {i}") for i, h in enumerate(isos)
        ],
        "lower": lower,
        "upper": upper,
        "expected_verdict": expected,
    }


def load_json(path: Union[str, Path]) -> Any:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path} is not valid JSON: {exc}") from exc


def dump_json(obj: Any, path: Union[str, Path]) -> None:
    Path(path).write_text(
        json.dumps(obj, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
