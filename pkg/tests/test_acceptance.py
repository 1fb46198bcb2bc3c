"""Acceptance suite: one test per release criterion, each printing a
PASS line on success. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest
from helpers import synthetic_corpus

from senseloom import lift as lift_mod
from senseloom import numerics, wicbuilder, wiceval
from senseloom.embedstore import EmbeddingMatrix, read_embeddings, write_embeddings
from senseloom.errors import DataError
from senseloom.wicbuilder import generate_pairs, redistribute_sentences, split_words

from test_numerics import best_two_partition_cost, naive_average_linkage, random_cosine_distance


def ok(name):
    print(f"ACCEPTANCE {name}: PASS")


# ---------------------------------------------------------------------------


def test_lift_worked_example():
    """precision 0.36 / prior 0.04 -> lift exactly 9.0 (900%), manual 25,
    assisted displayed 3, headline 8x; computed in under a millisecond."""

    def compute():
        value = lift_mod.lift(Fraction(9, 25), Fraction(1, 25))
        effort = lift_mod.effort_reduction(Fraction(1, 25), Fraction(9, 25))
        return value, effort

    compute()  # warm up
    best = math.inf
    for _ in range(5):
        t0 = time.perf_counter()
        value, effort = compute()
        best = min(best, time.perf_counter() - t0)

    assert value.exact == 9
    assert value.value == 9.0
    assert value.render_percent() == "900%"
    assert effort.manual_reviews == 25
    assert effort.display_manual == 25
    assert effort.display_assisted == 3
    assert effort.headline_factor == 8
    assert effort.reduction_factor == 9
    assert best < 1e-3, f"took {best * 1e3:.3f} ms"
    ok("lift-worked-example")


def test_infinite_lift_sentinel():
    value = lift_mod.lift(0.5, 0.0)
    assert value.render_percent() == "∞ (prior = 0)"
    ok("infinite-lift-sentinel")


def test_table2_derived_statistics():
    from helpers import make_gold

    gold_az = []
    for i in range(59):
        gold_az += make_gold(f"w{i:02d}", {"A": 36, "B": 35}, lang="az", start=i * 100)
    gold_az += make_gold("w59", {"A": 25}, lang="az", start=59 * 100)
    rows = wicbuilder.dataset_stats(gold_az)
    assert rows[0]["words"] == 60 and rows[0]["senses"] == 119
    assert f"{rows[0]['avg_senses_per_word']:.2f}" == "1.98"

    gold_te = []
    for i in range(49):
        gold_te += make_gold(f"t{i:02d}", {"A": 45, "B": 45}, lang="te", start=i * 100)
    gold_te += make_gold("t49", {"A": 45}, lang="te", start=49 * 100)
    gold_te += make_gold("t50", {"A": 45}, lang="te", start=50 * 100)
    rows = wicbuilder.dataset_stats(gold_te)
    assert rows[0]["words"] == 51 and rows[0]["senses"] == 100
    assert f"{rows[0]['avg_senses_per_word']:.2f}" == "1.96"
    ok("table2-derived-statistics")


def test_wic_builder_suite():
    start = time.perf_counter()
    seed = 42
    gold = synthetic_corpus(50, 80)  # 4000 sentences
    assert len(gold) == 4000
    lemmas = sorted({rec.sentence.lemma for rec in gold})

    ws = split_words(lemmas, seed)

    # exact largest-remainder counts, recomputed independently
    def hare(total, shares):
        floors = [math.floor(s * total) for s in shares]
        rem = total - sum(floors)
        fracs = sorted(
            range(len(shares)), key=lambda i: (-(shares[i] * total - floors[i]), i)
        )
        for i in fracs[:rem]:
            floors[i] += 1
        return floors

    expected = hare(50, [Fraction(7, 10), Fraction(3, 20), Fraction(3, 20)])
    assert [len(ws.train_words), len(ws.dev_words), len(ws.test_words)] == expected
    assert len(ws.shared_words) == math.floor(Fraction(3, 10) * len(ws.train_words) + Fraction(1, 2))

    # cross-check against the published 42-train -> 13-shared configuration
    ws60 = split_words([f"x{i}" for i in range(60)], seed)
    assert len(ws60.train_words) == 42
    assert len(ws60.shared_words) == 13

    split_map = redistribute_sentences(gold, ws, seed)
    assert len(split_map) == 4000
    pairs = generate_pairs(split_map, gold, seed)

    # no sentence in two splits: split_map is a function, and pairs agree with it
    for p in pairs:
        assert split_map[p.sentence_a_id] == p.split
        assert split_map[p.sentence_b_id] == p.split

    # degree cap
    degree = {}
    for p in pairs:
        degree[p.sentence_a_id] = degree.get(p.sentence_a_id, 0) + 1
        degree[p.sentence_b_id] = degree.get(p.sentence_b_id, 0) + 1
    assert max(degree.values()) <= 16

    # label balance per split
    for split in ("train", "dev", "test"):
        sp = [p for p in pairs if p.split == split]
        balance = sum(p.label for p in sp) / len(sp)
        assert 0.48 <= balance <= 0.52, (split, balance)

    # per-sense train proportions for shared lemmas preserved within one sentence
    by_lemma_sense = {}
    for rec in gold:
        key = (rec.sentence.lemma, rec.sense_id)
        by_lemma_sense.setdefault(key, []).append(rec.sentence.id)
    for lemma in ws.shared_words:
        for (lem, sense), sids in by_lemma_sense.items():
            if lem != lemma:
                continue
            kept = sum(1 for sid in sids if split_map[sid] == "train")
            assert abs(kept - 0.75 * len(sids)) <= 1.0, (lemma, sense)

    elapsed = time.perf_counter() - start
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    ok(f"wic-builder-suite ({elapsed:.1f}s)")


def test_chance_baseline():
    """Random distances on balanced labels stay at 50 +/- 2 accuracy."""
    for seed in range(10):
        rng = random.Random(seed)
        dev = [
            wiceval.ScoredPair(pair_id=f"d{i}", distance=rng.uniform(0, 2), label=i % 2)
            for i in range(2000)
        ]
        test = [
            wiceval.ScoredPair(pair_id=f"t{i}", distance=rng.uniform(0, 2), label=i % 2)
            for i in range(10000)
        ]
        tuned = wiceval.tune_threshold(dev)
        acc = wiceval.evaluate(test, tuned) * 100
        assert 48.0 <= acc <= 52.0, (seed, acc)
    ok("chance-baseline")


def test_threshold_tuner_oracle_dominance():
    violations = 0
    rng = random.Random(123)
    for _ in range(1000):
        n = rng.randint(2, 50)
        labels = [rng.randint(0, 1) for _ in range(n)]
        if len(set(labels)) < 2:
            labels[0], labels[1 % n] = 0, 1
        pairs = [
            wiceval.ScoredPair(pair_id=f"p{i}", distance=rng.uniform(0, 2), label=labels[i])
            for i in range(n)
        ]
        tuned = wiceval.tune_threshold(pairs)
        for _ in range(100):
            t = wiceval.Threshold(value=rng.uniform(-0.1, 2.1), tuned_on="x", dev_accuracy=0)
            if wiceval.evaluate(pairs, t) > tuned.dev_accuracy + 1e-12:
                violations += 1
    assert violations == 0
    ok("threshold-tuner-dominance")


def _two_sense_instance(trial):
    """Occurrence-embedding-like fixture: two angularly separated blobs."""
    rng = np.random.default_rng(trial)
    n = int(rng.integers(4, 9))
    d = 3
    while True:
        c1 = rng.standard_normal(d)
        c1 /= np.linalg.norm(c1)
        c2 = rng.standard_normal(d)
        c2 /= np.linalg.norm(c2)
        if c1 @ c2 < 0.5:  # at least 60 degrees apart
            break
    sigma = rng.uniform(0.08, 0.35)
    n1 = int(rng.integers(1, n))
    return np.vstack(
        [c1 + sigma * rng.standard_normal((n1, d)), c2 + sigma * rng.standard_normal((n - n1, d))]
    ).astype(np.float32)


def test_kmeans_matches_exhaustive_optimum():
    trials = 200
    matched = 0
    for trial in range(trials):
        X = _two_sense_instance(trial)
        n = len(X)
        m = EmbeddingMatrix(lemma="w", model_id="t", ids=[f"s{i}" for i in range(n)], data=X)
        U = m.data.astype(np.float64)
        U = U / np.linalg.norm(U, axis=1, keepdims=True)
        optimum = best_two_partition_cost(U)

        single = numerics.kmeans_inertia(m, numerics.kmeans(m, 2, seed=trial))
        if single <= optimum + 1e-9:
            matched += 1

        restart_best = min(
            numerics.kmeans_inertia(m, numerics.kmeans(m, 2, seed=trial * 1000 + r))
            for r in range(10)
        )
        assert restart_best <= optimum + 1e-9, (trial, restart_best, optimum)

    assert matched >= 0.95 * trials, f"only {matched}/{trials} single runs hit the optimum"
    ok(f"kmeans-exhaustive-optimum ({matched}/{trials})")


def test_agglomerative_matches_naive_reference():
    for trial in range(100):
        rng = np.random.default_rng(trial)
        n = int(rng.integers(2, 11))
        d = random_cosine_distance(n, seed=trial)
        k = int(rng.integers(1, n + 1))
        assert numerics.agglomerative(d, k).labels == naive_average_linkage(d.values.tolist(), k), (
            trial,
            n,
            k,
        )
    ok("agglomerative-naive-reference")


def test_mds_reconstructs_euclidean_distances():
    for seed in range(20):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(4, 12))
        pts = rng.standard_normal((n, 2))
        D = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        D *= 1.9 / D.max()  # scale into the [0, 2] domain without breaking realizability
        proj = numerics.classical_mds(numerics.DistanceMatrix(D))
        got = np.linalg.norm(proj.points[:, None] - proj.points[None, :], axis=2)
        assert np.abs(got - D).max() < 1e-6, seed
    ok("mds-euclidean-reconstruction")


def test_farthest_point_sampling_endpoints():
    for n in (5, 11, 30):
        pts = np.array([[float(x), 0.0] for x in range(n)])
        proj = numerics.Projection2D(points=pts, method="pca")
        picks = numerics.suggest_dispersed(proj, 2, seed=0)
        assert sorted(picks) == [0, n - 1]
    ok("farthest-point-endpoints")


def test_embedding_format_round_trip_and_corruption(tmp_path):
    path = tmp_path / "m.semb"
    for trial in range(1000):
        rng = np.random.default_rng(trial)
        n = int(rng.integers(0, 7))
        d = int(rng.integers(1, 9))
        m = EmbeddingMatrix(
            lemma=f"w{trial}",
            model_id="mdl",
            ids=[f"s{i}" for i in range(n)],
            data=(rng.standard_normal((n, d)) * 10.0 ** rng.integers(-20, 20)).astype(np.float32),
        )
        write_embeddings(m, path)
        back = read_embeddings(path)
        assert back.data.tobytes() == m.data.tobytes()
        assert back.ids == m.ids and back.lemma == m.lemma and back.model_id == m.model_id

    # corrupted-header fixtures each raise the designated error
    import struct

    m = EmbeddingMatrix(
        lemma="w", model_id="mdl", ids=["a", "b"], data=np.ones((2, 3), dtype=np.float32)
    )
    write_embeddings(m, path)
    good = path.read_bytes()

    cases = {
        "bad magic": b"XXXX" + good[4:],
        "version": good[:4] + struct.pack("<H", 7) + good[6:],
        "truncated": good[:-5],
        "trailing": good + b"\x00",
    }
    for expected, payload in cases.items():
        path.write_bytes(payload)
        with pytest.raises(DataError, match=expected):
            read_embeddings(path)
    ok("embedding-format")


def test_annotation_log_replay(tmp_path):
    from test_annotate import make_project
    from senseloom.annotate import ProjectStore, SenseAnnotation, SenseDef, replay

    store, records = make_project(tmp_path / "p", n_sentences=40, with_embeddings=False)
    rng = random.Random(2024)
    senses = ["A", "B"]
    snapshots = []
    import copy

    for step in range(500):
        roll = rng.random()
        if roll < 0.72:
            store.assign(
                SenseAnnotation(
                    rng.choice(records).id,
                    "qeyd",
                    rng.choice(senses),
                    rng.choice(["ann1", "ann2", "reviewer"]),
                    provenance=rng.choice(["manual", "model-suggested", "verified"]),
                )
            )
        elif roll < 0.96:
            store.unassign(rng.choice(records).id, "qeyd", rng.choice(["ann1", "ann2"]))
        else:
            sid = f"S{step}"
            store.add_sense("qeyd", SenseDef(sense_id=sid, gloss="x"))
            senses.append(sid)
        snapshots.append((store.revision, copy.deepcopy(store.state.current)))

    # every prefix replays to the exact state that existed at that revision
    for revision, current in snapshots:
        assert replay(store.events[:revision]).current == current

    # full replay from disk matches the live store
    reloaded = ProjectStore(tmp_path / "p")
    assert reloaded.state.current == store.state.current
    assert reloaded.state.senses == store.state.senses
    ok("annotation-log-replay")
