import math
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from statsmodels.nonparametric.smoothers_lowess import lowess as sm_lowess

from conftest import pseudo_vocabulary
from oracles import spearman_bruteforce
from relmix.evaluation import (
    EvalReport,
    WordPair,
    duplicate_pairs,
    evaluate_measure,
    leave_one_out_stability,
    load_test_set,
    lowess,
    progressive_removal,
    spearman,
    write_lowess_csv,
    write_removal_csv,
    write_stability_csv,
)

floats_st = st.floats(-100, 100, allow_nan=False)


def _write_353(path):
    vocab = pseudo_vocabulary(800)
    rng = random.Random(99)
    lines = ["Word 1\tWord 2\tHuman (mean)"]
    pairs = []
    for i in range(351):
        w1, w2 = vocab[2 * i], vocab[2 * i + 1]
        pairs.append((w1, w2, round(rng.uniform(0, 10), 2)))
    pairs.insert(40, ("money", "cash", 9.15))
    pairs.insert(200, ("money", "cash", 9.08))
    lines += [f"{a}\t{b}\t{s}" for a, b, s in pairs]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


class TestLoadTestSet:
    def test_three_row_fixture(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("cat\tdog\t7.5\nsun\tmoon\t6.0\ncar\ttire\t5.25\n")
        pairs = load_test_set(str(path))
        assert pairs == [
            WordPair("cat", "dog", 7.5),
            WordPair("sun", "moon", 6.0),
            WordPair("car", "tire", 5.25),
        ]

    def test_standard_sized_file_with_duplicate(self, tmp_path):
        path = tmp_path / "ws.tsv"
        _write_353(path)
        pairs = load_test_set(str(path))
        assert len(pairs) == 353
        assert duplicate_pairs(pairs) == [("money", "cash")]
        deduped = load_test_set(str(path), dedupe=True)
        assert len(deduped) == 352

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.tsv"
        path.write_text("")
        with pytest.raises(ValueError, match="no word pairs"):
            load_test_set(str(path))

    def test_malformed_row_reports_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("cat\tdog\t7.5\ncat dog 3\n")
        with pytest.raises(ValueError, match=":2"):
            load_test_set(str(path))

    def test_bad_score_mid_file(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("cat\tdog\t7.5\nsun\tmoon\tn/a\n")
        with pytest.raises(ValueError, match=":2"):
            load_test_set(str(path))

    def test_order_preserved(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("b\tc\t2\na\tb\t1\n")
        pairs = load_test_set(str(path))
        assert [p.w1 for p in pairs] == ["b", "a"]


class TestSpearman:
    def test_identical(self):
        xs = [3.0, 1.0, 4.0, 1.5, 9.0]
        assert spearman(xs, xs) == pytest.approx(1.0, abs=1e-15)

    def test_reversed(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        assert spearman(xs, xs[::-1]) == pytest.approx(-1.0, abs=1e-15)

    def test_tie_fixture_matches_bruteforce(self):
        xs = [1.0, 2.0, 2.0, 4.0]
        ys = [1.0, 3.0, 2.0, 4.0]
        assert spearman(xs, ys) == pytest.approx(spearman_bruteforce(xs, ys), abs=1e-15)

    def test_random_vectors_match_bruteforce(self):
        rng = random.Random(17)
        for trial in range(100):
            n = rng.randint(3, 60)
            xs = [rng.choice([rng.uniform(-5, 5), rng.randint(0, 4)]) for _ in range(n)]
            ys = [rng.choice([rng.uniform(-5, 5), rng.randint(0, 4)]) for _ in range(n)]
            if len(set(xs)) < 2 or len(set(ys)) < 2:
                continue
            assert spearman(xs, ys) == pytest.approx(
                spearman_bruteforce(xs, ys), abs=1e-12
            )

    @given(st.lists(floats_st, min_size=3, max_size=40), st.data())
    @settings(max_examples=150, deadline=None)
    def test_invariant_under_monotone_transform(self, xs, data):
        ys = data.draw(st.lists(floats_st, min_size=len(xs), max_size=len(xs)))
        if len(set(xs)) < 2 or len(set(ys)) < 2:
            return
        base = spearman(xs, ys)
        transformed = [math.exp(0.1 * x) + 3.0 for x in xs]
        assert spearman(transformed, ys) == pytest.approx(base, abs=1e-9)

    @given(st.lists(floats_st, min_size=3, max_size=40), st.data())
    @settings(max_examples=150, deadline=None)
    def test_symmetric(self, xs, data):
        ys = data.draw(st.lists(floats_st, min_size=len(xs), max_size=len(xs)))
        if len(set(xs)) < 2 or len(set(ys)) < 2:
            return
        assert spearman(xs, ys) == pytest.approx(spearman(ys, xs), abs=1e-15)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            spearman([1, 2], [1, 2, 3])

    def test_too_short(self):
        with pytest.raises(ValueError):
            spearman([1.0], [2.0])

    def test_zero_variance(self):
        with pytest.raises(ValueError, match="variance"):
            spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])


class TestLeaveOneOut:
    def test_perfectly_correlated_all_zero(self):
        xs = [1.0, 2.0, 3.0, 4.0, 5.0]
        ys = [2.0, 4.0, 6.0, 8.0, 10.0]
        assert leave_one_out_stability(xs, ys) == pytest.approx([0.0] * 5, abs=1e-15)

    def test_matches_recompute_oracle(self):
        rng = random.Random(3)
        xs = [rng.uniform(0, 1) for _ in range(10)]
        ys = [rng.uniform(0, 1) for _ in range(10)]
        deltas = leave_one_out_stability(xs, ys)
        base = spearman_bruteforce(xs, ys)
        for i in range(10):
            dropped_x = xs[:i] + xs[i + 1:]
            dropped_y = ys[:i] + ys[i + 1:]
            expected = spearman_bruteforce(dropped_x, dropped_y) - base
            assert deltas[i] == pytest.approx(expected, abs=1e-12)

    def test_discordant_pair_removal_raises_rho(self):
        xs = [1.0, 2.0, 3.0, 4.0, 10.0]
        ys = [1.0, 2.0, 3.0, 4.0, 0.5]  # last pair disagrees
        deltas = leave_one_out_stability(xs, ys)
        assert deltas[4] > 0
        assert max(range(5), key=lambda i: deltas[i]) == 4


class TestProgressiveRemoval:
    def test_first_point_is_plain_rho(self):
        rng = random.Random(4)
        xs = [rng.uniform(0, 1) for _ in range(15)]
        ys = [rng.uniform(0, 1) for _ in range(15)]
        curve = progressive_removal(xs, ys)
        assert curve[0] == (0, pytest.approx(spearman(xs, ys)))

    def test_monotone_data_constant_curve(self):
        xs = list(range(1, 13))
        ys = [x * 2.0 for x in xs]
        for k, rho in progressive_removal(xs, ys):
            assert rho == pytest.approx(1.0, abs=1e-15)

    def test_matches_recompute_oracle(self):
        rng = random.Random(5)
        xs = [rng.uniform(0, 1) for _ in range(20)]
        ys = [rng.uniform(0, 1) for _ in range(20)]
        curve = progressive_removal(xs, ys)
        assert len(curve) == 18
        for k, rho in curve:
            keep = sorted(sorted(range(20), key=lambda i: (xs[i], i))[k:])
            expected = spearman_bruteforce([xs[i] for i in keep], [ys[i] for i in keep])
            assert rho == pytest.approx(expected, abs=1e-12)

    def test_ties_broken_by_input_order(self):
        xs = [1.0, 1.0, 2.0, 3.0]
        ys = [9.0, 1.0, 2.0, 3.0]
        curve = progressive_removal(xs, ys)
        # k=1 must drop index 0 (first of the tied pair)
        keep = [1, 2, 3]
        assert curve[1][1] == pytest.approx(
            spearman_bruteforce([xs[i] for i in keep], [ys[i] for i in keep])
        )


class TestLowess:
    def test_collinear_points_reproduced(self):
        rng = random.Random(6)
        xs = sorted(rng.uniform(0, 10) for _ in range(30))
        points = [(x, 2.5 * x - 1.0) for x in xs]
        for span in (0.3, 2 / 3, 1.0):
            fitted = lowess(points, span=span)
            for (x, y), yhat in zip(points, fitted):
                assert abs(yhat - y) < 1e-9

    def test_constant_y(self):
        points = [(float(i), 4.0) for i in range(10)]
        assert lowess(points) == pytest.approx([4.0] * 10, abs=1e-12)

    def test_matches_reference_implementation(self):
        rng = np.random.default_rng(12)
        x = np.sort(rng.uniform(0, 10, 50))
        y = np.sin(x) + rng.normal(0, 0.4, 50)
        points = list(zip(x.tolist(), y.tolist()))
        for span in (0.3, 2 / 3):
            for iterations in (0, 1, 3):
                mine = lowess(points, span=span, iterations=iterations)
                ref = sm_lowess(y, x, frac=span, it=iterations, return_sorted=False)
                assert np.max(np.abs(np.asarray(mine) - ref)) < 1e-6

    def test_invariant_under_reordering(self):
        rng = random.Random(8)
        points = [(rng.uniform(0, 5), rng.uniform(-1, 1)) for _ in range(40)]
        fitted = lowess(points)
        shuffled = list(enumerate(points))
        rng.shuffle(shuffled)
        fitted_shuffled = lowess([p for _, p in shuffled])
        for (orig_idx, _), yhat in zip(shuffled, fitted_shuffled):
            assert yhat == pytest.approx(fitted[orig_idx], abs=1e-12)

    def test_degenerate_x_rejected(self):
        with pytest.raises(ValueError, match="distinct x"):
            lowess([(1.0, 2.0), (1.0, 3.0), (1.0, 4.0)])

    def test_bad_span_rejected(self):
        with pytest.raises(ValueError, match="span"):
            lowess([(1.0, 2.0), (2.0, 3.0)], span=0.0)


class TestEvaluateMeasure:
    def _pairs(self, n=12, seed=2):
        rng = random.Random(seed)
        vocab = pseudo_vocabulary(2 * n)
        return [
            WordPair(vocab[2 * i], vocab[2 * i + 1], rng.uniform(0, 10))
            for i in range(n)
        ]

    def test_gold_passthrough_rho_one(self):
        pairs = self._pairs()
        golds = {(p.w1, p.w2): p.gold for p in pairs}
        report = evaluate_measure(pairs, lambda a, b: golds[(a, b)])
        assert report.rho == pytest.approx(1.0, abs=1e-15)
        assert report.stability == pytest.approx([0.0] * len(pairs), abs=1e-15)

    def test_negated_gold_rho_minus_one(self):
        pairs = self._pairs()
        golds = {(p.w1, p.w2): p.gold for p in pairs}
        report = evaluate_measure(pairs, lambda a, b: -golds[(a, b)])
        assert report.rho == pytest.approx(-1.0, abs=1e-15)

    def test_report_composition_matches_components(self):
        pairs = self._pairs(20)
        rng = random.Random(9)
        scores = {(p.w1, p.w2): rng.uniform(0, 1) for p in pairs}
        report = evaluate_measure(pairs, lambda a, b: scores[(a, b)])
        xs = [scores[(p.w1, p.w2)] for p in pairs]
        ys = [p.gold for p in pairs]
        assert report.rho == pytest.approx(spearman(xs, ys), abs=1e-15)
        assert report.stability == pytest.approx(leave_one_out_stability(xs, ys))
        assert report.removal_curve == progressive_removal(xs, ys)

    def test_failures_raise_by_default(self):
        pairs = self._pairs(5)

        def flaky(a, b):
            raise KeyError(a)

        with pytest.raises(KeyError):
            evaluate_measure(pairs, flaky)

    def test_skip_failures_collects(self):
        pairs = self._pairs(8)
        bad = {(pairs[2].w1, pairs[2].w2)}

        def flaky(a, b):
            if (a, b) in bad:
                raise RuntimeError("no data")
            return hash((a, b)) % 100 / 100.0

        report = evaluate_measure(pairs, flaky, skip_failures=True)
        assert len(report.pairs) == 7
        assert len(report.skipped) == 1
        assert report.skipped[0][0] == pairs[2]


class TestCsvArtifacts:
    def test_written_files_parse_back(self, tmp_path):
        pairs = [WordPair("a", "b", 1.0), WordPair("c", "d", 2.0),
                 WordPair("e", "f", 3.0), WordPair("g", "h", 4.0)]
        scores = {("a", "b"): 0.1, ("c", "d"): 0.4, ("e", "f"): 0.2, ("g", "h"): 0.9}
        report = evaluate_measure(pairs, lambda x, y: scores[(x, y)])
        s_path = tmp_path / "stability.csv"
        r_path = tmp_path / "removal.csv"
        l_path = tmp_path / "lowess.csv"
        write_stability_csv(report, str(s_path), config_hash="deadbeef")
        write_removal_csv(report, str(r_path), config_hash="deadbeef")
        write_lowess_csv([(1.0, 2.0), (2.0, 2.5), (3.0, 3.5)], str(l_path))
        stability = s_path.read_text().splitlines()
        assert stability[0] == "# config_hash=deadbeef"
        assert stability[1] == "pair,score,gold,delta_rho"
        assert len(stability) == 2 + len(pairs)
        removal = r_path.read_text().splitlines()
        assert removal[1] == "k,rho"
        assert len(removal) == 2 + len(report.removal_curve)
        low = l_path.read_text().splitlines()
        assert low[1] == "x,y,yhat"
        assert len(low) == 2 + 3
