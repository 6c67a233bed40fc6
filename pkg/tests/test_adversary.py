import random

import pytest
from pydantic import ValidationError

from sslesim.adversary import (
    Adversary,
    AttackerConfig,
    adversary_view,
    assign_knowledge,
    dos_attempt,
    expected_missed_fraction,
    plan_censorship,
    plan_targeted_dos,
)
from sslesim.consensus import Validator, init_genesis, process_slot
from sslesim.harness.runner import simulate
from sslesim.whisk import WhiskParams

from conftest import make_config


def registry(n):
    return [Validator(i, 1, b"") for i in range(n)]


def test_config_ranges():
    for field in ("p_link", "protected_fraction", "capacity_fraction", "victim_fraction"):
        with pytest.raises(ValidationError):
            AttackerConfig(**{field: 1.5})
        with pytest.raises(ValidationError):
            AttackerConfig(**{field: -0.1})
    with pytest.raises(ValidationError):
        AttackerConfig(mode="advanced_dos", capacity_fraction=0)
    with pytest.raises(ValidationError):
        AttackerConfig(surprise=1)


def test_capacity_count():
    assert AttackerConfig().capacity_count(1000) == 0
    assert AttackerConfig(mode="targeted_dos", capacity_fraction=0.1).capacity_count(1000) == 100
    assert AttackerConfig(mode="targeted_dos", capacity_fraction=0.0001).capacity_count(100) == 1


def test_dos_attempt_truth_table():
    v = Validator(0, 1, b"")
    for linked, prot, miss in [(True, False, True), (True, True, False), (False, False, False), (False, True, False)]:
        v.ip_linked, v.protected = linked, prot
        assert dos_attempt(v) is miss


def test_knowledge_forcing_cases():
    reg = assign_knowledge(registry(200), AttackerConfig(p_link=1, protected_fraction=0), random.Random(1))
    assert all(dos_attempt(v) for v in reg)
    reg = assign_knowledge(registry(200), AttackerConfig(p_link=0), random.Random(1))
    assert not any(dos_attempt(v) for v in reg)


def test_knowledge_binomial_and_exact_protection():
    cfg = AttackerConfig(p_link=0.8, protected_fraction=0.2)
    sigma = (1000 * 0.8 * 0.2) ** 0.5
    for seed in range(20):
        reg = assign_knowledge(registry(1000), cfg, random.Random(seed))
        assert abs(sum(v.ip_linked for v in reg) - 800) <= 3 * sigma
        assert sum(v.protected for v in reg) == 200


def test_targeted_plan_follows_public_schedule():
    s = init_genesis(50, rng_seed=3)
    view = adversary_view(s)
    assert plan_targeted_dos(view, random.Random(0)) == [view.schedule[0]]


def test_targeted_plan_guesses_without_schedule():
    s = init_genesis(10, mechanism="hsortition", rng_seed=3)
    view = adversary_view(s)
    r = random.Random(0)
    guesses = [plan_targeted_dos(view, r)[0] for _ in range(5000)]
    assert set(guesses) == set(range(10))
    assert abs(guesses.count(0) / 5000 - 0.1) < 0.02


def test_censorship_plans():
    s = init_genesis(50, rng_seed=3)
    view = adversary_view(s)
    p = view.schedule[0]
    assert plan_censorship(view, [p], 5, advanced=False) == [p]
    assert plan_censorship(view, [(p + 1) % 50], 5, advanced=False) == []
    assert plan_censorship(view, list(range(10)), 3, advanced=True) == [0, 1, 2]


def test_capacity_respected_every_slot():
    cfg = AttackerConfig(mode="advanced_censorship", capacity_fraction=0.02, victim_fraction=0.3)
    adv = Adversary(cfg, 100, random.Random(2))
    s = init_genesis(100, rng_seed=2)
    for _ in range(64):
        view = adversary_view(s)
        assert len(adv.targets(view)) <= 2
        process_slot(s, None)
    assert adv.plan.actions == 64 * 2


def test_whisk_targets_come_from_serving_candidates():
    params = WhiskParams(64, 32, 32, 2, 2)
    s = init_genesis(100, mechanism="whisk", rng_seed=4, params=params, group="tiny")
    adv = Adversary(AttackerConfig(mode="advanced_dos", capacity_fraction=0.1), 100, random.Random(4))
    mech = s.mechanism
    snapshots = {}
    for _ in range(4 * 32):
        view = adversary_view(s)
        adv.observe(view)
        if view.whisk_candidate_round not in snapshots and None not in view.whisk_candidate_origin:
            snapshots[view.whisk_candidate_round] = set(view.whisk_candidate_origin)
        targets = adv.targets(view)
        rnd = s.slot // 32
        if rnd >= 1:
            assert set(targets) <= snapshots[rnd - 1] and len(targets) == 10
        process_slot(s, mech.build_block(s, s.registry[mech.expected_proposer(s, s.slot)]))


def test_view_ignores_private_state():
    params = WhiskParams(64, 32, 32, 2, 2)
    s = init_genesis(64, mechanism="whisk", rng_seed=4, params=params, group="tiny")
    mech = s.mechanism
    for _ in range(40):
        process_slot(s, mech.build_block(s, s.registry[mech.expected_proposer(s, s.slot)]))
    before = adversary_view(s).to_bytes()
    ws = s.mechanism_state
    ws._proposer_owner.reverse()
    ws._candidate_owner.reverse()
    ws._secrets = [k % 100 + 1 for k in reversed(ws._secrets)]
    for v in s.registry:
        v.ip_linked, v.protected = not v.ip_linked, not v.protected
        v.secret_seed = b"counterfactual"
    assert adversary_view(s).to_bytes() == before


def test_advanced_dos_saturation():
    cfg = make_config(
        validators=40, epochs=2,
        attacker={"mode": "advanced_dos", "capacity_fraction": 1.0, "p_link": 1.0, "protected_fraction": 0.0},
    )
    assert simulate(cfg, 3)["metrics"]["missed_fraction"] == 1.0


def test_expected_missed_fraction():
    cfg = AttackerConfig(p_link=0.8, protected_fraction=0.2)
    assert expected_missed_fraction(cfg, 1.0) == pytest.approx(0.64)
    assert expected_missed_fraction(cfg, 100 / 256) == pytest.approx(0.25)


def test_targeted_censorship_under_ssle_takes_no_action():
    for mech, n in (("whisk", 64), ("hsortition", 20)):
        cfg = make_config(
            validators=n, mechanism=mech, group="tiny",
            attacker={"mode": "censorship", "victim_fraction": 0.3},
        )
        m = simulate(cfg, 5)["metrics"]
        assert m["attack_actions"] == 0 and m["victim_suppressed_slots"] == 0
