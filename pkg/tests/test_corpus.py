import json

import numpy as np
import pytest

from moebius_energy import corpus
from moebius_energy.curves import ClosedCurve, PlanarDomain, SchemaError


def _curves(obj):
    if isinstance(obj, PlanarDomain):
        return obj.boundaries
    if isinstance(obj, ClosedCurve):
        return [obj]
    return list(obj)


@pytest.mark.parametrize("name", corpus.names())
def test_bundled_file_matches_builder(name):
    stored, built = _curves(corpus.load(name)), _curves(corpus.build(name))
    assert len(stored) == len(built)
    t = np.linspace(0, 2 * np.pi, 101)
    for a, b in zip(stored, built):
        assert np.abs(a.evaluate(t) - b.evaluate(t)).max() < 1e-14 * max(1.0, b.diameter)


@pytest.mark.parametrize("name", corpus.names())
def test_record_roundtrip(name):
    rec = corpus.to_record(corpus.build(name), name)
    assert json.loads(corpus.dumps(rec)) == json.loads(corpus.dumps(corpus.to_record(corpus.from_record(rec), name)))


def test_unknown_entry():
    with pytest.raises(KeyError):
        corpus.load("dodecahedron")


@pytest.mark.parametrize("rec", [[], {"kind": "curves", "data": []}, {"foo": 1}, {"kind": "shape", "data": {}}])
def test_bad_records(rec):
    with pytest.raises(SchemaError):
        corpus.from_record(rec)
