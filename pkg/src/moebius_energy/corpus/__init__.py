"""Bundled example curves, domains and curve pairs.

Each entry is stored as JSON next to this module.  The builders below are
the source of truth; ``write_corpus`` regenerates the files.
"""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from ..curves import ClosedCurve, PlanarDomain, SchemaError


def _tilted_ellipse():
    a = 0.5
    R = np.array([[1, 0, 0], [0, np.cos(a), -np.sin(a)], [0, np.sin(a), np.cos(a)]])
    return ClosedCurve(np.array([1.0, 0.2, 0.1]), [R @ [1.5, 0, 0]], [R @ [0, 0, 0.7]])


def _conjugate():
    from ..moebius import conjugate_pair

    return list(conjugate_pair(None))


BUILDERS = {
    "unit_circle": ("curve", lambda: ClosedCurve.circle(1.0)),
    "unit_disk": ("domain", lambda: PlanarDomain.disk(1.0)),
    "ellipse_2_1": ("domain", lambda: PlanarDomain(ClosedCurve.ellipse(2.0, 1.0))),
    "ellipse_3_1": ("domain", lambda: PlanarDomain(ClosedCurve.ellipse(3.0, 1.0))),
    "annulus_1_4": ("domain", lambda: PlanarDomain.annulus(1.0, 4.0)),
    "two_hole": (
        "domain",
        lambda: PlanarDomain(
            ClosedCurve.circle(4.0), [ClosedCurve.circle(1.0, (-1.8, 0.0)), ClosedCurve.circle(1.0, (1.8, 0.0))]
        ),
    ),
    "star3": ("domain", lambda: PlanarDomain(ClosedCurve.star([(3, 0.3, 0.0)]))),
    "trefoil": ("curve", lambda: ClosedCurve.trefoil()),
    "trefoil_mirror": ("curve", lambda: ClosedCurve.trefoil().mirrored()),
    "hopf_pair": (
        "curves",
        lambda: [ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1)), ClosedCurve.circle(1.0, (1, 0, 0), (0, 1, 0))],
    ),
    "circle_ellipse_link": ("curves", lambda: [ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1)), _tilted_ellipse()]),
    "coaxial_circles": (
        "curves",
        lambda: [ClosedCurve.circle(1.0, (0, 0, 0), (0, 0, 1)), ClosedCurve.circle(1.0, (0, 0, 2), (0, 0, 1))],
    ),
    "conjugate_pair": ("curves", _conjugate),
}


def to_record(obj, name: str | None = None) -> dict:
    if isinstance(obj, PlanarDomain):
        rec = {"kind": "domain", "data": obj.to_dict()}
    elif isinstance(obj, ClosedCurve):
        rec = {"kind": "curve", "data": obj.to_dict()}
    else:
        rec = {"kind": "curves", "data": [c.to_dict() for c in obj]}
    if name:
        rec["name"] = name
    return rec


def from_record(rec: dict):
    """Object from a record ``{"kind": ..., "data": ...}`` or a bare curve/domain dict."""
    if not isinstance(rec, dict):
        raise SchemaError("top-level JSON value must be an object")
    kind = rec.get("kind")
    data = rec.get("data", rec)
    if kind is None:
        if "coeffs" in rec:
            kind = "curve"
        elif "outer" in rec or "components" in rec:
            kind = "domain"
        elif "curves" in rec:
            kind, data = "curves", rec["curves"]
        else:
            raise SchemaError("cannot tell whether the record is a curve, a domain or a curve list")
    if kind == "curve":
        return ClosedCurve.from_dict(data)
    if kind == "domain":
        return PlanarDomain.from_dict(data)
    if kind == "curves":
        if not isinstance(data, list) or not data:
            raise SchemaError("'curves' record needs a non-empty list")
        return [ClosedCurve.from_dict(d) for d in data]
    raise SchemaError(f"unknown record kind {kind!r}")


def names() -> list[str]:
    return sorted(BUILDERS)


def load(name: str):
    """Load a bundled entry by name."""
    if name not in BUILDERS:
        raise KeyError(f"no corpus entry {name!r}; have {names()}")
    text = resources.files(__name__).joinpath(f"{name}.json").read_text()
    return from_record(json.loads(text))


def build(name: str):
    return BUILDERS[name][1]()


def dumps(rec: dict) -> str:
    return json.dumps(rec, indent=1, sort_keys=True) + "\n"


def write_corpus(directory: str | Path | None = None) -> list[Path]:
    """Write every entry as ``<name>.json``; defaults to this package directory."""
    d = Path(directory) if directory is not None else Path(__file__).parent
    d.mkdir(parents=True, exist_ok=True)
    out = []
    for name in names():
        p = d / f"{name}.json"
        p.write_text(dumps(to_record(build(name), name)))
        out.append(p)
    return out
