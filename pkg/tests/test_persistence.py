import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_signal
from periodica import (
    AnnotatedDiagram,
    PeriodicTemplate,
    Signal,
    bottleneck,
    brute_force_diagram,
    diagram_circle,
    diagram_interval,
    eval_template_composed,
    get_template,
    random_reparam,
    separation_delta,
    to_measure,
)
from periodica.signal import period_aligned_grid


def sig(values):
    values = np.asarray(values, dtype=float)
    return Signal(np.arange(len(values), dtype=float), values)


def tile_periods(one_period_values, n):
    """n exact copies of a one-period sample block, closed on the circle."""
    body = np.tile(one_period_values[:-1], n)
    values = np.concatenate([body, one_period_values[:1]])
    return sig(values)


class TestDiagramInterval:
    def test_monotone_two_samples(self):
        d = diagram_interval(sig([0.0, 1.0]))
        assert d.pairs() == [(0.0, 1.0)]
        assert d.points[0].birth_index == 0
        assert d.essential_index == 0

    def test_w_shape_hand_trace(self):
        d = diagram_interval(sig([1.0, 0.0, 2.0, 0.5, 3.0]))
        assert d.pairs() == [(0.0, 3.0), (0.5, 2.0)]
        by_birth = {p.birth: p.birth_index for p in d.points}
        assert by_birth == {0.0: 1, 0.5: 3}

    def test_f_r_two_scales(self):
        r = 0.5
        fn = lambda x: np.where(x <= 0.5, np.sin(4 * np.pi * x), (1 + r) * np.sin(4 * np.pi * x))
        f = PeriodicTemplate("fr", fn)
        x = np.linspace(0.0, 1.0, 2001)
        # on the circle the measure sits on (-1-r, 1+r) and (-1, 1)
        d = diagram_circle(Signal(x, f(x)))
        pairs = d.pairs()
        assert len(pairs) == 2
        assert pairs[0] == pytest.approx((-1.5, 1.5), abs=0.01)
        assert pairs[1] == pytest.approx((-1.0, 1.0), abs=0.01)
        # on the interval the boundary minimum adds (0, 1) and the -1 trough
        # must climb the taller crest, per the sweep itself
        di = diagram_interval(Signal(x, f(x)))
        assert sorted(di.pairs()) == pytest.approx(
            [(-1.5, 1.5), (-1.0, 1.5), (0.0, 1.0)], abs=0.01
        )

    def test_plateau_collapse(self):
        # the inner plateau is not a minimum of the collapsed sequence
        assert diagram_interval(sig([3.0, 1.0, 1.0, 0.0])).pairs() == [(0.0, 3.0)]
        d = diagram_interval(sig([2.0, 1.0, 1.0, 2.0, 0.0]))
        assert d.pairs() == [(0.0, 2.0), (1.0, 2.0)]
        assert d.points[1].birth_index == 1

    def test_constant_signal(self):
        assert diagram_interval(sig([4.0, 4.0, 4.0])).pairs() == [(4.0, 4.0)]


class TestDiagramCircle:
    def test_single_period_sine(self):
        x = np.linspace(0.0, 1.0, 1001)
        d = diagram_circle(Signal(x, np.sin(2 * np.pi * x)))
        assert len(d) == 1
        assert d.pairs()[0] == pytest.approx((-1.0, 1.0), abs=1e-5)

    def test_four_periods_homogeneous(self):
        x = np.linspace(0.0, 1.0, 257)
        one = np.sin(2 * np.pi * x)
        d = diagram_circle(tile_periods(one, 4))
        base = diagram_circle(Signal(x, one))
        assert d.pairs() == base.pairs() * 4

    def test_half_periodic_degenerate(self):
        x = np.linspace(0.0, 1.0, 1001)
        d = diagram_circle(Signal(x, np.sin(4 * np.pi * x)))
        assert len(d) == 2
        for p in d.pairs():
            assert p == pytest.approx((-1.0, 1.0), abs=1e-4)

    def test_endpoint_mismatch_rejected(self):
        with pytest.raises(ValueError):
            diagram_circle(sig([0.0, 1.0, 0.5]))

    def test_wraparound_plateau(self):
        d = diagram_circle(sig([2.0, 0.0, 2.0, 2.0]))
        assert d.pairs() == [(0.0, 2.0)]


class TestBruteForceOracle:
    def test_tiny_cases(self):
        assert brute_force_diagram(sig([0.0, 1.0])).pairs() == [(0.0, 1.0)]
        assert brute_force_diagram(sig([1.0, 0.0, 2.0, 0.5, 3.0])).pairs() == [
            (0.0, 3.0),
            (0.5, 2.0),
        ]

    @pytest.mark.parametrize("quantized", [False, True])
    def test_oracle_equivalence_random(self, quantized):
        rng = np.random.default_rng(42 + quantized)
        for _ in range(150):
            s = random_signal(rng, max_len=50, quantized=quantized)
            a = diagram_interval(s)
            b = brute_force_diagram(s)
            assert a.pairs() == b.pairs()
            assert sorted(p.birth_index for p in a.points) == sorted(
                p.birth_index for p in b.points
            )

    @given(st.lists(st.integers(min_value=0, max_value=5), min_size=2, max_size=30))
    @settings(max_examples=200, deadline=None)
    def test_oracle_equivalence_hypothesis(self, values):
        s = sig([float(v) for v in values])
        assert diagram_interval(s).pairs() == brute_force_diagram(s).pairs()


class TestProperties:
    def test_reparametrization_invariance(self):
        # evaluated at corresponding knots the composition and the plain
        # n-period template produce bit-identical value sequences
        f = get_template("f1")
        n = 4
        gamma = random_reparam(n, 13)
        x_grid = np.linspace(0.0, float(n), 600)
        t_grid = gamma.inverse(x_grid)
        composed = Signal(t_grid, f(x_grid))
        straight = Signal(x_grid, f(x_grid))
        assert diagram_interval(composed).pairs() == diagram_interval(straight).pairs()

    def test_stability_random_perturbations(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            s = random_signal(rng, max_len=40, min_len=5)
            w = rng.uniform(-0.08, 0.08, size=len(s))
            d = bottleneck(diagram_interval(s), diagram_interval(Signal(s.times, s.values + w)))
            assert d <= np.max(np.abs(w)) + 1e-9

    def test_min_max_min_gap(self):
        rng = np.random.default_rng(6)
        for _ in range(60):
            s = random_signal(rng, max_len=40, min_len=4)
            values, idx = _collapsed(s.values)
            delta = separation_delta(to_measure(diagram_interval(s), 0.0))
            mins = [
                i
                for i in range(len(values))
                if (i == 0 or values[i] < values[i - 1])
                and (i == len(values) - 1 or values[i] < values[i + 1])
            ]
            for a, b in zip(mins, mins[1:]):
                interior = values[a + 1 : b]
                assert interior.max() >= max(values[a], values[b]) + 2 * delta - 1e-9

    def test_circle_homogeneity_random_pl_templates(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            k = int(rng.integers(1, 7))
            vals = rng.uniform(-1.0, 1.0, size=2 * k)
            one = np.concatenate([vals, vals[:1]])
            n = int(rng.integers(1, 11))
            base = diagram_circle(sig(one))
            tiled = diagram_circle(tile_periods(one, n))
            assert tiled.pairs() == sorted(base.pairs() * n)


def _collapsed(values):
    keep = np.concatenate([[True], np.diff(values) != 0])
    return values[keep], np.flatnonzero(keep)


class TestSerialization:
    def test_json_round_trip(self):
        d = diagram_interval(sig([1.0, 0.0, 2.0, 0.5, 3.0]))
        back = AnnotatedDiagram.from_json(d.to_json())
        assert back.pairs() == d.pairs()
        assert back.domain_kind == "interval"
        assert back.essential_index == d.essential_index
