from collections import Counter

import pytest

from sslesim.crypto.group import SECP256K1, TinyGroup
from sslesim.crypto.trackers import (
    OwnershipProof,
    ShuffleTranscript,
    Tracker,
    make_tracker,
    owns,
    prove_ownership,
    rerandomize,
    shuffle,
    verify_ownership,
    verify_shuffle,
)

CTX = b"ctx"


def dl_ratio(t: Tracker, g: TinyGroup) -> int:
    """k with kr_point = k * r_point, by brute force."""
    return g.discrete_log(t.kr_point, base=t.r_point)


def test_make_tracker_examples(tiny):
    g = SECP256K1
    t = make_tracker(5, 1, g)
    assert g.eq(t.r_point, g.generator) and g.eq(t.kr_point, g.base_mul(5))
    t = make_tracker(1, 9, g)
    assert g.eq(t.r_point, t.kr_point)
    t = make_tracker(3, 5, tiny)
    table = {k: pow(tiny.generator, k, tiny.p) for k in range(tiny.order)}
    assert t.r_point == table[5] and t.kr_point == table[15]


@pytest.mark.parametrize("k,r", [(0, 1), (1, 0), (101, 3)])
def test_zero_scalars_rejected(tiny, k, r):
    with pytest.raises(ValueError):
        make_tracker(k, r, tiny)


def test_rerandomize(tiny):
    t = make_tracker(7, 11, tiny)
    assert rerandomize(t, 1) == t
    assert rerandomize(rerandomize(t, 3), 4) == rerandomize(t, 12)
    assert dl_ratio(rerandomize(t, 55), tiny) == 7
    with pytest.raises(ValueError):
        rerandomize(t, 0)


def test_proof_completeness_and_context_binding(rng):
    g = SECP256K1
    k = g.random_scalar(rng)
    t = make_tracker(k, g.random_scalar(rng), g)
    proof = prove_ownership(t, k, CTX)
    assert verify_ownership(t, proof, CTX)
    assert verify_ownership(t, proof.to_bytes(), CTX)
    assert not verify_ownership(t, proof, b"other")


def test_proof_on_rerandomized_trackers(rng):
    g = SECP256K1
    for _ in range(100):
        k = g.random_scalar(rng)
        t = make_tracker(k, g.random_scalar(rng), g)
        moved = rerandomize(t, g.random_scalar(rng))
        # a fresh proof for the new tracker verifies, the old one does not
        assert verify_ownership(moved, prove_ownership(moved, k, CTX), CTX)
        assert not verify_ownership(moved, prove_ownership(t, k, CTX), CTX)


def test_garbage_proofs_never_raise(rng):
    g = SECP256K1
    t = make_tracker(3, 4, g)
    for n in (0, 10, 99, 131):
        assert verify_ownership(t, rng.randbytes(n), CTX) is False
    assert verify_ownership(t, None, CTX) is False


def test_proof_bytes_round_trip(rng):
    g = SECP256K1
    t = make_tracker(8, 9, g)
    p = prove_ownership(t, 8, CTX)
    q = OwnershipProof.from_bytes(p.to_bytes(), g)
    assert q.to_bytes() == p.to_bytes()


def test_tracker_bytes_round_trip(tiny):
    t = make_tracker(4, 6, tiny)
    assert Tracker.from_bytes(t.to_bytes(), tiny) == t


def test_exhaustive_ownership_soundness(tiny):
    # Over every scalar, only the true k yields an accepted claim.
    for true_k, r in [(3, 5), (17, 2), (100, 99)]:
        t = make_tracker(true_k, r, tiny)
        accepted = [
            k for k in range(1, tiny.order) if verify_ownership(t, prove_ownership(t, k, CTX), CTX)
        ]
        assert accepted == [true_k]
        assert [k for k in range(1, tiny.order) if owns(t, k)] == [true_k]


def test_exhaustive_forgery_with_wrong_commitment(tiny):
    # Forge attempts that swap the k-commitment for another validator's fail.
    t = make_tracker(12, 7, tiny)
    honest = prove_ownership(t, 12, CTX)
    for k in range(1, tiny.order):
        forged = OwnershipProof(
            honest.commit_r, honest.commit_g, tiny.base_mul(k), honest.response, tiny
        )
        assert verify_ownership(t, forged, CTX) == (k == 12)


def test_shuffle_singleton(tiny, rng):
    t = make_tracker(2, 3, tiny)
    out, tr = shuffle([t], rng)
    assert tr.permutation == (0,) and len(out) == 1
    assert dl_ratio(out[0], tiny) == 2


def test_shuffle_preserves_dl_multiset(tiny, rng):
    ks = [rng.randrange(1, tiny.order) for _ in range(40)]
    trackers = [make_tracker(k, rng.randrange(1, tiny.order), tiny) for k in ks]
    out, tr = shuffle(trackers, rng)
    assert verify_shuffle(trackers, out, tr)
    assert Counter(dl_ratio(t, tiny) for t in out) == Counter(ks)
    for i, j in enumerate(tr.permutation):
        assert dl_ratio(out[i], tiny) == ks[j]


def test_shuffle_outputs_unlinkable_by_bytes(rng):
    g = SECP256K1
    ins = [make_tracker(g.random_scalar(rng), g.random_scalar(rng), g) for _ in range(4)]
    in_bytes = {t.to_bytes() for t in ins}
    for _ in range(250):  # 1000 output trackers in total
        out, _ = shuffle(ins, rng)
        assert not in_bytes & {t.to_bytes() for t in out}


def test_verify_shuffle_rejections(tiny, rng):
    ins = [make_tracker(k, k + 1, tiny) for k in range(1, 6)]
    out, tr = shuffle(ins, rng)
    assert verify_shuffle(ins, out, tr)
    tampered = list(out)
    tampered[2] = make_tracker(50, 50, tiny)
    assert not verify_shuffle(ins, tampered, tr)
    bad_perm = ShuffleTranscript(tr.inputs, tr.outputs, (0, 0, 1, 2, 3), tr.randomizers)
    assert not verify_shuffle(ins, out, bad_perm)
    assert not verify_shuffle(ins, out[:-1], tr)
    with pytest.raises(ValueError):
        shuffle([], rng)


def test_exhaustive_completeness(tiny):
    for k in range(1, tiny.order):
        for r in (1, 50, 100):
            t = make_tracker(k, r, tiny)
            assert verify_ownership(t, prove_ownership(t, k, CTX), CTX)
