import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from cschottky import schottky
from cschottky.errors import CertificateFailed, MaxAttemptsExceeded, ParityObstruction
from cschottky.geom import parse_model, schottky_pair_core
from cschottky.invariants import verify_rational_invariance
from cschottky.numlin import projective_distance
from cschottky.schottky import (MoveSearchOptions, SchottkyGroupSpec, build_group, certify_ping_pong,
                                format_word, fundamental_domain_sample, group_hash, limit_set_sample,
                                reduce_word, reduced_word_count, reduced_words, word_matrix)

letter_st = st.tuples(st.integers(1, 3), st.sampled_from([1, -1]))


@pytest.fixture(scope="module")
def p1_group():
    return build_group(parse_model("P:1"), 2, seed=11)


@given(st.lists(letter_st, max_size=12))
def test_reduce_word_is_a_normal_form(w):
    r = reduce_word(w)
    assert reduce_word(r) == r
    assert all(a != (b[0], -b[1]) for a, b in zip(r, r[1:]))
    assert len(r) % 2 == len(w) % 2


@given(st.lists(letter_st.filter(lambda a: a[0] <= 2), max_size=6))
def test_reduction_preserves_the_group_element(w):
    g = build_group(parse_model("P:0"), 2, seed=1)
    assert projective_distance(word_matrix(g, w), word_matrix(g, reduce_word(w))) < 1e-8


@pytest.mark.parametrize("r", [1, 2, 3])
def test_reduced_word_enumeration(r):
    for l in range(1, 5):
        words = list(reduced_words(r, l))
        assert len(set(words)) == len(words) == reduced_word_count(r, l) == 2 * r * (2 * r - 1) ** (l - 1)
        assert all(reduce_word(w) == w for w in words)


def test_format_word():
    assert format_word(((1, 1), (2, -1))) == "g1g2^-1"


def test_json_roundtrip_preserves_generators(p1_group):
    obj = json.loads(json.dumps(p1_group.to_json()))
    again = SchottkyGroupSpec.from_json(obj)
    for j in (1, 2):
        assert np.array_equal(again.generator(j), p1_group.generator(j))
    assert group_hash(again) == group_hash(p1_group)


def test_construction_is_deterministic():
    a = build_group(parse_model("Qodd:2"), 2, seed=5)
    b = build_group(parse_model("Qodd:2"), 2, seed=5)
    assert group_hash(a) == group_hash(b)
    c = build_group(parse_model("Qodd:2"), 2, seed=6)
    assert group_hash(a) != group_hash(c)


def test_generators_are_automorphisms_with_loxodromic_modulus(p1_group):
    m = p1_group.model
    for j in (1, 2):
        assert abs(p1_group.lambdas[j - 1]) > 1
        assert 0 < p1_group.eps[j - 1] < 0.5
    qe = build_group(parse_model("Qeven:4"), 2, seed=2)
    for j in (1, 2):
        assert qe.model.form_residual(qe.generator(j)) < 1e-8


def test_certificate_passes_and_serializes(p1_group):
    cert = certify_ping_pong(p1_group, n_samples=500, max_word_len=3)
    assert cert.passed
    assert set(cert.checks) == {"equivariance", "generator_inclusion", "closure_separation",
                                "word_inclusion", "non_scalar"}
    assert cert.checks["word_inclusion"]["words"] == sum(reduced_word_count(2, l) for l in (1, 2, 3))
    assert "not finitely checkable" in cert.to_json()["limitation"]


def test_oversized_neighbourhoods_fail_certification(p1_group):
    obj = p1_group.to_json()
    obj["eps"] = [0.45, 0.45]
    obj["lambda"] = [{"re": 0.55 / 0.45, "im": 0.0}] * 2
    bad = SchottkyGroupSpec.from_json(obj)
    with pytest.raises(CertificateFailed) as exc:
        certify_ping_pong(bad, n_samples=300, max_word_len=2)
    assert exc.value.exit_status == 2
    assert not exc.value.certificate.passed


def test_fundamental_domain_samples(p1_group):
    F = fundamental_domain_sample(p1_group, 200, seed=3)
    ph = p1_group.phi_all(F)
    assert F.shape[0] == 200
    assert np.all(ph >= p1_group.eps) and np.all(ph <= 1 - p1_group.eps)


def test_limit_set_size(p1_group):
    pts = limit_set_sample(p1_group, 2)
    assert len(pts) == reduced_word_count(2, 2) * 4


def test_parity_obstruction_and_exhausted_search(monkeypatch):
    m = parse_model("Qeven:3")
    with pytest.raises(ParityObstruction) as exc:
        build_group(m, 2, seed=0)
    assert exc.value.exit_status == 3
    # a single pair needs no move
    assert build_group(m, 1, seed=0).r == 1
    monkeypatch.setattr(schottky, "_all_cores_disjoint", lambda *a: False)
    with pytest.raises(MaxAttemptsExceeded):
        build_group(parse_model("P:1"), 2, seed=0, opts=MoveSearchOptions(max_attempts=3))


def test_left_factor_moves_commute_with_right_multiplication():
    g = build_group(parse_model("P:2"), 3, seed=4, opts=MoveSearchOptions(strategy="left-factor"))
    assert verify_rational_invariance(g, "right-commute", n_samples=50) < 1e-12


def test_subsphere_moves_keep_anchors_on_the_circle():
    g = build_group(parse_model("IGr:2"), 3, seed=4, opts=MoveSearchOptions(subsphere_m=1))
    assert np.abs(g.anchors[:, 2:]).max() < 1e-12


def test_option_validation():
    with pytest.raises(ValueError):
        MoveSearchOptions(strategy="mobius-on-sphere").resolved_strategy(parse_model("P:1"))
    with pytest.raises(ValueError):
        MoveSearchOptions(subsphere_m=9).resolved_strategy(parse_model("IGr:2"))
    with pytest.raises(ValueError):
        MoveSearchOptions(strategy="spiral").resolved_strategy(parse_model("P:1"))
