import json

import pytest

from banach_forge.errors import DegenerateSpace, DimensionMismatch, ParseError
from banach_forge.formats import dump_operator, dump_space, parse_operator, parse_space, parse_spaces
from banach_forge.fraisse import ComplexityBudget, GenericRun, extend_generic
from banach_forge.manifest import (RunLocked, canonical_json, load_run, run_lock, save_run, sha256,
                                   verify_run_dir)
from banach_forge.rational import Matrix, Q
from banach_forge.spaces import Operator, PolyBanachSpace
from generators import random_matrix, random_space, rng_for


@pytest.mark.parametrize("seed", range(5))
def test_space_round_trip(seed):
    rng = rng_for("fmt", seed)
    X = random_space(rng, rng.randint(0, 3))
    text = dump_space(X, "X")
    assert parse_space(text) == X
    assert parse_space(text, canonical=True) == X


def test_operator_round_trip():
    rng = rng_for("op", 0)
    X, Y = random_space(rng, 2), random_space(rng, 3)
    T = Operator(X, Y, random_matrix(rng, 3, 2))
    name, back = parse_operator(dump_operator(T, "T", "X", "Y"), {"X": X, "Y": Y})
    assert name == "T" and back == T
    Z = PolyBanachSpace.trivial()
    _, e = parse_operator(dump_operator(Operator.zero(Z, X), "e", "Z", "X"), {"Z": Z, "X": X})
    assert e.matrix.shape == (2, 0)


def test_parse_errors():
    with pytest.raises(ParseError):
        parse_space("space X dim 2\nvertex 1 0.5\n")
    with pytest.raises(ParseError):
        parse_space("vertex 1 0\n")
    with pytest.raises(DimensionMismatch):
        parse_space("space X dim 2\nvertex 1\n")
    with pytest.raises(DegenerateSpace):
        parse_space("space X dim 2\nvertex 1 1\n")
    with pytest.raises(ParseError):
        parse_operator("operator T X Q\nrow 1\n", {"X": PolyBanachSpace.cube(1)})
    assert len(parse_spaces("# two\nspace A dim 0\nspace B dim 1\nvertex 1/2\n")) == 2


@pytest.fixture()
def saved(tmp_path):
    run = extend_generic(GenericRun.fresh(4, ComplexityBudget(3, 2)), 8)
    save_run(run, tmp_path)
    return run, tmp_path


def test_save_load_round_trip(saved):
    run, d = saved
    assert load_run(d) == run
    rep = verify_run_dir(d)
    assert rep.ok and rep.checked > 50


def _reseal(d, rel):
    m = json.loads((d / "manifest.json").read_text())
    for b in m["bonds"]:
        for part in ("embed", "proj"):
            if b[part]["file"] == rel:
                b[part]["sha256"] = sha256((d / rel).read_bytes())
    (d / "manifest.json").write_text(canonical_json(m))


def test_semantic_check_survives_resealed_digest(saved):
    run, d = saved
    k = 3
    rel = f"bonds/p{k}.op"
    lines = (d / rel).read_text().splitlines()
    fields = lines[1].split()
    fields[1] = "1/2" if fields[1] != "1/2" else "1/3"
    lines[1] = " ".join(fields)
    (d / rel).write_text("\n".join(lines) + "\n")
    _reseal(d, rel)
    rep = verify_run_dir(d)
    assert not rep.ok
    assert not any("digest" in f for f in rep.failures)
    assert any(f.startswith(f"stage {k}: bond {k}->{k + 1}") for f in rep.failures)


def test_ledger_entry_tamper_is_named(saved):
    run, d = saved
    m = json.loads((d / "manifest.json").read_text())
    r = next(r for r in m["ledger"] if r["status"] == "realized" and r["g_embed"] and r["g_embed"][0])
    r["g_embed"][0][0] = "7/3"
    (d / "manifest.json").write_text(canonical_json(m))
    rep = verify_run_dir(d)
    assert f"stage {r['stage']}: requirement #{r['index']} digest mismatch" in rep.failures
    assert "ledger: digest mismatch" in rep.failures


def test_lock_is_exclusive_and_stale_locks_are_taken(tmp_path):
    import os
    (tmp_path / ".lock").write_text(str(os.getpid()))
    with pytest.raises(RunLocked):
        with run_lock(tmp_path):
            pass
    (tmp_path / ".lock").write_text("999999999")
    with run_lock(tmp_path):
        assert (tmp_path / ".lock").read_text() == str(os.getpid())
    assert not (tmp_path / ".lock").exists()
