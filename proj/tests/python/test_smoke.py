"""End-to-end smoke tests for the _mezzo extension module."""

import os

import pytest

_mezzo = pytest.importorskip("_mezzo")

PROGRAMS = os.path.join(os.path.dirname(__file__), "..", "programs")


def load(name):
    with open(os.path.join(PROGRAMS, name)) as f:
        return f.read()


def test_check_ok():
    r = _mezzo.check_source(load("fig1.mz"))
    assert r["ok"]
    assert "append" in r["value_types"]
    assert "appendAux" in r["value_types"]


def test_facts():
    r = _mezzo.dump_facts_source(load("fig1.mz"))
    assert "fact list: duplicable a => duplicable" in r
    assert "fact mlist: exclusive" in r


def test_run_append():
    r = _mezzo.run_source(load("append_main.mz"))
    assert r["ok"]
    assert r["result"] == (
        "Cons {head = 1; tail = Cons {head = 2; tail = Cons {head = 3; tail = Nil}}}"
    )


def test_run_bag_fifo():
    r = _mezzo.run_source(load("bag_main.mz"))
    assert r["ok"]
    assert r["result"] == "(Some {value = 1}, Some {value = 2}, None)"


def test_abandon_failure():
    r = _mezzo.run_source(load("doubletake.mz"))
    assert not r["ok"]
    assert r["abort"] == "AbandonFailure"
    assert r["line"] == 12


def test_type_error_reported():
    r = _mezzo.check_source(load("negative/write_immutable.mz"))
    assert not r["ok"]
    assert r["rule"] == "Write"
    assert r["line"] == 5


def test_dump_perms_has_points():
    d = _mezzo.dump_perms_source(load("fig1.mz"))
    assert "at " in d
    assert "xs @ list a" in d


def test_seed_determinism():
    a = _mezzo.dump_perms_source(load("fig1.mz"), seed=7)
    b = _mezzo.dump_perms_source(load("fig1.mz"), seed=7)
    c = _mezzo.dump_perms_source(load("fig1.mz"), seed=8)
    assert a == b
    assert a != c
