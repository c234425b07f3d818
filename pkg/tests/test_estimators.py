import numpy as np
import pytest

from conftest import noisy_circle_trial, one_period_measure, template_delta
from periodica import (
    AnnotatedDiagram,
    PersistenceMeasure,
    PersistencePoint,
    Signal,
    diagram_circle,
    diagram_interval,
    eval_template_composed,
    get_template,
    n_exact,
    n_hat_auto,
    n_hat_ball,
    n_hat_cluster,
    random_reparam,
    scan_h,
    single_linkage_partition,
    to_measure,
    zero_crossings_estimate,
)
from periodica.estimators import EstimatorReport, crossings_per_period
from periodica.signal import period_aligned_grid


def measure(*entries):
    return PersistenceMeasure(
        tuple((float(b), float(d)) for b, d, _ in entries),
        tuple(int(m) for _, _, m in entries),
    )


def synthetic_diagram(*pairs):
    pts = tuple(PersistencePoint(float(b), float(d), i) for i, (b, d) in enumerate(pairs))
    return AnnotatedDiagram(pts, "interval", 0)


def five_period_sine_diagram():
    x = np.linspace(0.0, 1.0, 257)
    one = np.sin(2 * np.pi * x)
    body = np.tile(one[:-1], 5)
    s = Signal(np.arange(5 * 256 + 1, dtype=float), np.concatenate([body, one[:1]]))
    return diagram_circle(s)


def f_r_diagram(r):
    return synthetic_diagram((-1.0 - r, 1.0 + r), (-1.0, 1.0))


class TestNExact:
    def test_basic(self):
        assert n_exact(measure((-1, 1, 5))) == 5
        assert n_exact(measure((0, 3, 4), (1, 2, 6))) == 2
        assert n_exact(PersistenceMeasure((), ())) == 1

    def test_composition_measure(self):
        f = get_template("f1")
        for n in (3, 8):
            gamma = random_reparam(n, n)
            grid = period_aligned_grid(f, gamma, per_period=80)
            s = eval_template_composed(f, gamma, grid)
            m = to_measure(diagram_circle(s), 1e-9)
            assert n_exact(m) == n


class TestNHatBall:
    def test_noiseless_five_periods(self):
        assert n_hat_ball(five_period_sine_diagram(), 0.2) == 5

    def test_small_tau_limit_equals_exact(self):
        d = five_period_sine_diagram()
        assert n_hat_ball(d, 1e-9) == n_exact(to_measure(d, 0.0))

    def test_bounded_noise_trials(self):
        rng = np.random.default_rng(11)
        for trial in range(10):
            n = int(rng.integers(3, 8))
            s, gamma, delta, eps = noisy_circle_trial("f0", n, 1000 + trial)
            tau = float(rng.uniform(2 * eps * 1.01, delta / 3 * 0.99))
            assert n_hat_ball(diagram_circle(s), tau) == n


class TestSingleLinkage:
    def test_far_points_tiny_tau(self):
        d = synthetic_diagram((0.0, 1.0), (5.0, 9.0))
        clusters = single_linkage_partition(d, 1e-3)
        assert len(clusters) == 3
        sizes = sorted((c.size, c.diagonal) for c in clusters)
        assert sizes == [(0, True), (1, False), (1, False)]

    def test_chaining(self):
        d = synthetic_diagram((0.0, 2.0), (0.3, 2.3))
        clusters = single_linkage_partition(d, 0.4)
        non_diag = [c for c in clusters if not c.diagonal]
        assert len(non_diag) == 1 and non_diag[0].size == 2

    def test_strict_threshold(self):
        d = synthetic_diagram((0.0, 2.0), (0.3, 2.3))
        clusters = single_linkage_partition(d, 0.3)
        assert sorted(c.size for c in clusters if not c.diagonal) == [1, 1]

    def test_noisy_five_periods_single_cluster(self):
        rng = np.random.default_rng(12)
        for trial in range(5):
            s, gamma, delta, eps = noisy_circle_trial("f0", 5, 2000 + trial)
            tau = float(rng.uniform(2 * eps * 1.01, delta / 3 * 0.99))
            clusters = single_linkage_partition(diagram_circle(s), tau)
            non_diag = [c for c in clusters if not c.diagonal]
            assert len(non_diag) == 1 and non_diag[0].size == 5


class TestNHatCluster:
    def test_cluster_sizes(self):
        assert n_hat_cluster(five_period_sine_diagram(), 0.3) == 5

    def test_gcd_of_sizes(self):
        d = synthetic_diagram(
            *([(0.0, 10.0)] * 4 + [(4.0, 10.0)] * 6)
        )
        # two tight clusters of sizes 4 and 6, both far from the diagonal
        assert n_hat_cluster(d, 1.0) == 2

    def test_all_diagonal_gives_one(self):
        d = synthetic_diagram((0.0, 0.1), (5.0, 5.1))
        assert n_hat_cluster(d, 3.0) == 1


class TestScan:
    def test_f_r_breakpoints(self):
        r = 0.3
        scan = scan_h(f_r_diagram(r))
        assert scan.breakpoints == pytest.approx((r, 1.0))
        assert scan.values == (1, 2, 1)
        assert scan.domain_max == pytest.approx(1.0 + r)
        assert scan(r) == 1  # strict linkage: the cross edge opens just past r
        assert scan(r + 1e-9) == 2
        assert scan(1.0 + 1e-9) == 1

    def test_single_point_diagram(self):
        scan = scan_h(synthetic_diagram((-1.0, 1.0)))
        assert scan.values[-1] == 1
        assert all(v == 1 for v in scan.values)

    def test_pointwise_agreement(self):
        rng = np.random.default_rng(13)
        s, _, _, _ = noisy_circle_trial("f1", 4, 3000)
        d = diagram_circle(s)
        scan = scan_h(d)
        for _ in range(100):
            tau = float(rng.uniform(1e-6, scan.domain_max * 1.2))
            assert scan(tau) == n_hat_cluster(d, tau)

    def test_divisibility_above_first_correct_scale(self):
        s, _, _, _ = noisy_circle_trial("f2", 6, 4000, eps_frac=0.2)
        d = diagram_circle(s)
        scan = scan_h(d)
        correct = [
            (lo, hi) for lo, hi, v in scan.constant_intervals() if v == 6
        ]
        assert correct
        first_correct = correct[0][0]
        for lo, hi, v in scan.constant_intervals():
            if lo >= first_correct and lo < scan.domain_max:
                assert v == 1 or 6 % v == 0


class TestAuto:
    @pytest.mark.parametrize(
        "r,expected", [(0.2, 2), (0.5, 2), (0.9, 2), (1.1, 1), (1.5, 1)]
    )
    def test_f_r_rule(self, r, expected):
        report = n_hat_auto(f_r_diagram(r))
        assert report.n_hat == expected, (
            f"r={r}: intervals {scan_h(f_r_diagram(r)).constant_intervals()}"
        )
        if expected == 1:
            assert report.tau_used is None
        else:
            assert report.longest_interval == pytest.approx((r, 1.0))
            assert n_hat_cluster(f_r_diagram(r), report.tau_used) == expected

    def test_noisy_five_periods(self):
        s, _, _, _ = noisy_circle_trial("f0", 5, 5000)
        assert n_hat_auto(diagram_circle(s)).n_hat == 5

    def test_tie_prefers_larger_value(self):
        # plateaus: gcd {6,2,3}=1 on (0,2], gcd {6,2}=2 on (2,4], {6}=6 on
        # (4,6], diagonal beyond; values 2 and 6 both hold for length 2
        d = synthetic_diagram(
            *([(0.0, 12.0)] * 6 + [(20.0, 28.0)] * 2 + [(40.0, 44.0)] * 3)
        )
        scan = scan_h(d)
        report = n_hat_auto(d)
        assert report.n_hat == 6, scan.constant_intervals()

    def test_interval_signal_with_boundary_artifact(self):
        # production path: interval diagram of a composition that starts
        # mid-period; the boundary point must not corrupt the estimate
        f = get_template("f0")
        for n, seed in ((5, 1), (9, 2), (23, 3)):
            gamma = random_reparam(n, seed)
            t = np.linspace(0.0, 1.0, 60 * n + 1)
            s = Signal(t, f(gamma(t)))
            assert n_hat_auto(diagram_interval(s)).n_hat == n

    def test_report_json(self):
        rep = EstimatorReport(5, "cluster_auto", 0.25, (0.1, 0.4))
        doc = rep.to_json()
        import json

        assert json.loads(doc) == {
            "n_hat": 5,
            "method": "cluster_auto",
            "tau_used": 0.25,
            "interval_lo": 0.1,
            "interval_hi": 0.4,
        }


class TestZeroCrossings:
    def test_clean_sine(self):
        t = np.linspace(0.0, 1.0, 2001)
        s = Signal(t, np.sin(2 * np.pi * 5 * t))
        assert zero_crossings_estimate(s, 2) == 5

    def test_constant_floor(self):
        s = Signal(np.arange(10.0), np.ones(10))
        assert zero_crossings_estimate(s, 2) == 1

    def test_zero_samples_attach_to_previous_sign(self):
        s = Signal(np.arange(4.0), [1.0, 0.0, -1.0, 1.0])
        # sign word is + + - +: two changes
        assert zero_crossings_estimate(s, 2) == 1

    def test_validation(self):
        s = Signal(np.arange(4.0), [1.0, -1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            zero_crossings_estimate(s, 3)

    @pytest.mark.parametrize("tid", ["f0", "f1", "f2"])
    def test_crossing_count_matches_quadrant_rule(self, tid):
        f = get_template(tid)
        k = crossings_per_period(f)
        m = one_period_measure(tid)
        quadrant = sum(mult for p, mult in m.items() if p[0] < 0.0 < p[1])
        assert k == 2 * quadrant
        n = 6
        gamma = random_reparam(n, 99)
        grid = period_aligned_grid(f, gamma, per_period=200)
        s = eval_template_composed(f, gamma, grid)
        signs = np.sign(s.values)
        signs = signs[signs != 0]
        count = int(np.sum(signs[1:] != signs[:-1]))
        assert count == k * n
        assert zero_crossings_estimate(s, k) == n
