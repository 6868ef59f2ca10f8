import math
import os
import random
import tempfile

import ltls


def test_trellis_shape():
    t = ltls.Trellis(22)
    assert t.num_steps == 4
    assert t.num_edges == 19 == ltls.expected_edge_count(22)
    assert t.sink_steps == [2, 3]
    assert t.edges[6] == (3, 10)
    assert t.index_to_path(21) == ltls.Path(0, 15)
    assert all(t.path_to_index(t.index_to_path(i)) == i for i in range(22))
    try:
        ltls.Trellis(1)
    except ValueError:
        pass
    else:
        raise AssertionError("C=1 accepted")


def test_decoders_match_brute_force():
    rng = random.Random(3)
    t = ltls.Trellis(22)
    rows = t.path_matrix()
    for _ in range(20):
        h = [rng.gauss(0, 1) for _ in range(t.num_edges)]
        scores = [sum(v for v, bit in zip(h, row) if bit) for row in rows]
        order = sorted(range(22), key=lambda i: (-scores[i], i))
        top = ltls.viterbi_topk(t, h, 5)
        assert [i for i, _ in top] == order[:5]
        assert ltls.viterbi_top1(t, h)[0] == order[0]
        for i, s in top:
            assert math.isclose(s, ltls.score_path(t, h, i), rel_tol=1e-12)
        log_z, marginals = ltls.forward_log_partition(t, h)
        m = max(scores)
        assert math.isclose(log_z, m + math.log(sum(math.exp(s - m) for s in scores)), rel_tol=1e-9)
        assert all(0.0 <= mu <= 1.0 for mu in marginals)


def test_small_helpers():
    assert ltls.soft_threshold(0.7, 0.2) == 0.7 - 0.2
    assert ltls.soft_threshold(0.1, 0.2) == 0.0
    assert ltls.separation_ranking_loss(2.0, 1.5) == 0.5
    assert ltls.oracle_top_frequent([[0], [0], [1]], [[0], [1]], 1) == 0.5


def test_train_predict_round_trip():
    rng = random.Random(1)
    lines = []
    for i in range(120):
        c = i % 6
        feats = {c * 3 + k: round(rng.uniform(0.5, 1.5), 4) for k in range(3)}
        feats[18 + rng.randrange(10)] = 0.2
        lines.append(str(c) + "".join(f" {j}:{v}" for j, v in sorted(feats.items())))
    with tempfile.TemporaryDirectory() as d:
        data = os.path.join(d, "toy.txt")
        with open(data, "w") as f:
            f.write("\n".join(lines) + "\n")
        model = ltls.train(data, epochs=5, seed=3)
        assert model.num_labels == 6
        assert model.num_assigned == 6
        assert model.mode == "multiclass"
        path = os.path.join(d, "toy.ltls")
        size = model.save(path)
        assert size == os.path.getsize(path)
        loaded = ltls.Model.load(path)
        assert loaded.labels == model.labels
        pred = loaded.predict([(0, 1.0), (1, 1.0), (2, 1.0)], k=2)
        assert pred[0][0] == "0" and len(pred) == 2 and pred[0][1] >= pred[1][1]
        metrics = loaded.evaluate(data)
        assert metrics["precision@1"] == 1.0
        assert metrics["num_edges"] == 10


if __name__ == "__main__":
    tests = [(n, f) for n, f in sorted(globals().items()) if n.startswith("test_") and callable(f)]
    for name, fn in tests:
        fn()
        print(f"ok {name}")
