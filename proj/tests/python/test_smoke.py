import os
import pathlib

import pytest

import sla

CORPUS = pathlib.Path(os.environ.get("SLA_CORPUS_DIR", pathlib.Path(__file__).parents[2] / "corpus"))


def source(name):
    return (CORPUS / name).read_text()


def test_dlist_checks_with_expected_skeleton():
    dump = sla.check(source("dlist.sla"))
    assert dump["decls"][-1]["skeleton"].startswith("fix(lam(lamInt(ifz(")


def test_dlist_runs_to_empty_heap():
    assert sla.run(source("dlist.sla"), "[1->0]", "i=1") == ("{[]}", False)


def test_alloc_choice_outcomes():
    assert sla.run(source("alloc_choice.sla"), "[1->0]")[0] == "{[1->5], [1->6]}"
    assert sla.run(source("alloc_choice.sla"), "[1->0, 2->0]")[0] == "{[1->6, 2->0]}"


def test_client_mfree_links():
    assert sla.run(source("client_mfree.sla"), "[1->0, 2->0]", "j=1, l=2")[0] == "{[1->0, 2->1]}"


def test_precision_gate():
    with pytest.raises(sla.SlaError, match="not precise"):
        sla.check(source("mode/frame_true.sla"))
    sla.check(source("mode/frame_true.sla"), mode="unrestricted")
    assert sla.is_precise("emp")[0]
    precise, heap, subs = sla.is_precise("true")
    assert not precise and len(subs) == 2


def test_harness_normalize_passes():
    reports, code = sla.harness("normalize", str(CORPUS))
    assert code == 0 and reports and all(r["status"] == "pass" for r in reports)


def test_heap_literals_are_canonical():
    assert sla.normalize_heap("[2->0,1->5]") == "[1->5, 2->0]"
