"""Job parsing and report assembly."""

import pytest

from tiltlab.reporting import (JobError, algebra_presentation, parse_job,
                               render_report, run_pipeline)

A2_DATA = {
    "field": "rational",
    "quiver": {"vertices": 2,
               "arrows": [{"from": 1, "to": 2, "label": "a"}]},
    "relations": [],
    "objects": "simples",
    "window": 2,
}


def test_parse_fills_defaults_and_builds_stalks():
    job = parse_job(dict(A2_DATA))
    assert job["window"] == 2 and job["budget"] == 64
    assert job["arity_cap"] == 4 and job["policy"] == "proceed"
    assert [X.describe() for X in job["objects"]] == ["[0: S1]", "[0: S2]"]
    assert job["algebra"].dim == 3
    assert job["field_text"] == "rational"


def test_parse_accepts_prime_fields():
    job = parse_job({**A2_DATA, "field": {"prime": 5}})
    assert job["field_text"] == "GF(5)"
    assert repr(job["field"]) == "GF(5)"


def test_parse_accepts_the_shifted_preset():
    job = parse_job({**A2_DATA,
                     "objects": {"preset": "shifted", "shifts": [0, -1]}})
    assert [X.describe() for X in job["objects"]] == ["[0: S1]", "[-1: S2]"]


def test_parse_accepts_fractional_coefficients():
    data = {**A2_DATA,
            "quiver": {"vertices": 3,
                       "arrows": [{"from": 1, "to": 2, "label": "a"},
                                  {"from": 2, "to": 3, "label": "b"}]},
            "relations": [{"terms": [{"coeff": "1/2",
                                      "path": ["a", "b"]}]}]}
    job = parse_job(data)
    assert job["algebra"].dim == 5  # the length-two path is killed


def test_parse_finds_a_nilpotency_bound_for_bounded_cycles():
    data = {**A2_DATA,
            "quiver": {"vertices": 1,
                       "arrows": [{"from": 1, "to": 1, "label": "x"}]},
            "relations": [{"terms": [{"coeff": 1, "path": ["x", "x", "x"]}]}]}
    job = parse_job(data)
    assert job["algebra"].dim == 3
    assert job["algebra"].bound_certified


def test_parse_honors_an_explicit_bound():
    data = {**A2_DATA,
            "quiver": {"vertices": 1,
                       "arrows": [{"from": 1, "to": 1, "label": "x"}]},
            "relations": [{"terms": [{"coeff": 1, "path": ["x", "x"]}]}],
            "nilpotency_bound": 2}
    assert parse_job(data)["algebra"].dim == 2


def test_parse_overrides_beat_the_file():
    job = parse_job(dict(A2_DATA), overrides={"window": 5, "budget": None})
    assert job["window"] == 5
    assert job["budget"] == 64


@pytest.mark.parametrize("mutate, needle", [
    (lambda d: d.pop("field"), "field"),
    (lambda d: d.update(extra=1), "unknown job field"),
    (lambda d: d.update(policy="maybe"), "policy"),
    (lambda d: d.update(window=0), "window"),
    (lambda d: d.update(objects=[]), "objects"),
    (lambda d: d.update(objects=[{"module": "Q", "vertex": 1}]), "kind"),
    (lambda d: d.update(relations=[{"terms": [{"coeff": 1,
                                               "path": ["z", "z"]}]}]),
     "unknown arrow label"),
    (lambda d: d.update(relations=[{"terms": [{"coeff": 1,
                                               "path": ["a"]}]}]),
     "length >= 2"),
    (lambda d: d.update(quiver={"vertices": 2,
                                "arrows": [{"from": 1, "to": 9,
                                            "label": "a"}]}),
     "outside"),
])
def test_parse_rejects_malformed_jobs(mutate, needle):
    data = {k: (dict(v) if isinstance(v, dict) else v)
            for k, v in A2_DATA.items()}
    mutate(data)
    with pytest.raises(JobError, match=needle):
        parse_job(data)


def test_unbounded_cycle_is_rejected_with_advice():
    data = {**A2_DATA,
            "quiver": {"vertices": 1,
                       "arrows": [{"from": 1, "to": 1, "label": "x"}]},
            "relations": []}
    with pytest.raises(JobError, match="nilpotency_bound"):
        parse_job(data)


def test_presentation_recovers_quiver_and_relations():
    job = parse_job(dict(A2_DATA))
    rep = run_pipeline(job, upto="gamma")
    g = rep["gamma"]
    assert g["status"] == "computed"
    assert g["arrows"] == [("a", 1, 2)]
    assert g["relations"] == []
    assert g["radical_layers"] == [1]


def test_presentation_of_the_heart_over_a_prime_field():
    data = {**A2_DATA,
            "field": {"prime": 5},
            "quiver": {"vertices": 2,
                       "arrows": [{"from": 1, "to": 2, "label": "a"},
                                  {"from": 2, "to": 1, "label": "b"}]},
            "relations": [{"terms": [{"coeff": 1, "path": ["a", "b"]}]},
                          {"terms": [{"coeff": 1, "path": ["b", "a"]}]}]}
    rep = run_pipeline(parse_job(data), upto="gamma")
    g = rep["gamma"]
    assert g["dim"] == 4
    assert sorted(g["relations"]) == ["a*b", "b*a"]


def test_presentation_raw_algebra_roundtrip():
    # feed the heart back in as a fresh job: same dimensions both times
    job = parse_job(dict(A2_DATA))
    rep = run_pipeline(job, upto="gamma")
    g = rep["gamma"]
    data2 = {
        "field": "rational",
        "quiver": {"vertices": g["vertices"],
                   "arrows": [{"from": i, "to": j, "label": lab}
                              for lab, i, j in g["arrows"]]},
        "relations": [],
        "objects": "simples",
        "window": 2,
    }
    rep2 = run_pipeline(parse_job(data2), upto="gamma")
    assert rep2["gamma"]["dim"] == g["dim"]
    assert rep2["gamma"]["cartan"] == g["cartan"]


def test_render_is_pure_text_with_stable_sections():
    job = parse_job(dict(A2_DATA))
    rep = run_pipeline(job, upto="ainf")
    text = render_report(rep)
    order = [text.index(s) for s in
             ("== COLLECTION ==", "== CONSTRUCTION ==", "== VERDICT ==",
              "== GAMMA ==", "== AINF ==")]
    assert order == sorted(order)
    assert render_report(rep) == text
