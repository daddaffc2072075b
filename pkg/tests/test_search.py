import numpy as np
import pytest

from sepcrit.criteria import CriterionParams
from sepcrit.errors import ValidationError
from sepcrit.presets import PRESETS
from sepcrit.search import (
    CriterionConfig,
    ShapeSpec,
    best_over_x,
    default_x_grid,
    golden_refine,
    margin_surface,
    optimize_params,
    scan_threshold,
    state_margin,
)
from sepcrit.states import make_family, mix_white_noise, bennett_ppt_3x3, sample_separable

BENNETT = PRESETS["t1"]


def test_x_grid():
    xs = default_x_grid()
    assert xs[0] == pytest.approx(1e-3) and xs[-1] == pytest.approx(10.0)
    assert np.all(np.diff(np.log(xs)) > 0)


def test_golden_refine_quadratic():
    x, val = golden_refine(lambda t: -(t - 0.3) ** 2, 0.0, 0.25, 1.0)
    assert x == pytest.approx(0.3, abs=1e-6)
    assert val == pytest.approx(0.0, abs=1e-12)


def test_best_over_x_interior():
    best, x = best_over_x(lambda t: 1 - (np.log(t) - np.log(0.5)) ** 2)
    assert x == pytest.approx(0.5, rel=1e-4)
    assert best == pytest.approx(1.0, abs=1e-8)


def test_config_validation():
    with pytest.raises(ValidationError):
        CriterionConfig("thm9", ("hw", "hw"))
    with pytest.raises(ValidationError):
        CriterionConfig("thm1", ("hw", "hw"), structure="fixed")


class TestOptimize:
    def test_improves_on_preset(self):
        rho = mix_white_noise(bennett_ppt_3x3(), 0.9)
        cc = BENNETT.config
        _, x = state_margin(cc, rho)
        start = cc.params(x)
        shape = ShapeSpec(4, 4, 1, 1)
        res = optimize_params(rho, cc, shape, seed=0, restarts=0, budget=400, initial=start)
        baseline = optimize_params(rho, cc, shape, budget=0, initial=start)
        assert baseline.margin > 0
        assert res.relative_margin >= baseline.relative_margin
        assert res.margin > 0

    def test_separable_input_never_positive(self):
        rho = sample_separable((3, 3), seed=2)
        res = optimize_params(rho, BENNETT.config, ShapeSpec(2, 2, 1, 1), seed=1, restarts=2, budget=300)
        assert res.margin <= 1e-9

    def test_zero_budget_returns_initial(self):
        rho = mix_white_noise(bennett_ppt_3x3(), 0.5)
        start = CriterionParams([0.2] * 4, [0.3] * 4, [0.5], [0.7])
        res = optimize_params(rho, BENNETT.config, ShapeSpec(4, 4, 1, 1, "free"), budget=0, initial=start)
        np.testing.assert_array_equal(res.params.u, start.u)
        np.testing.assert_array_equal(res.params.beta, start.beta)
        assert res.evaluations == 0

    def test_deterministic(self):
        rho = mix_white_noise(bennett_ppt_3x3(), 0.95)
        args = (rho, BENNETT.config, ShapeSpec(2, 2, 1, 1))
        a = optimize_params(*args, seed=7, restarts=1, budget=150)
        b = optimize_params(*args, seed=7, restarts=1, budget=150)
        assert a.relative_margin == b.relative_margin
        np.testing.assert_array_equal(a.params.alpha, b.params.alpha)

    def test_thm6_rejected(self):
        rho = make_family("ghzpert")(1.0)
        with pytest.raises(ValidationError):
            optimize_params(rho, PRESETS["t4"].config, ShapeSpec(1, 1, 1, 1))

    def test_shape_pack_roundtrip(self):
        shape = ShapeSpec(3, 2, 2, 1, "free")
        z = np.arange(shape.size, dtype=float)
        np.testing.assert_array_equal(shape.pack(shape.unpack(z)), z)
        with pytest.raises(ValidationError):
            ShapeSpec(0, 1, 1, 1)


class TestSurface:
    def test_row_count_and_order(self):
        p_grid, x_grid = [0.1, 0.5, 0.9], [0.01, 0.1, 1.0, 2.0]
        rows = margin_surface(BENNETT.make_family(), BENNETT.config, p_grid, x_grid, workers=1)
        assert len(rows) == 12
        assert [r[:2] for r in rows[:4]] == [(0.1, x) for x in x_grid]

    def test_maximally_mixed_nonpositive(self):
        fam = make_family("maxmixed", dims=(3, 3))
        rows = margin_surface(fam, BENNETT.config, np.linspace(0, 1, 5), [0.01, 0.5, 2.0])
        assert all(m <= 0 for _, _, m in rows)


class TestScan:
    def test_maximally_mixed(self):
        res = scan_threshold(make_family("maxmixed", dims=(3, 3)), BENNETT.config, p_step=0.25)
        assert res.threshold is None
        assert res.message == "no threshold in [0, 1]"

    def test_bracket_has_sign_change(self):
        cc = BENNETT.config
        fam = BENNETT.make_family()
        res = scan_threshold(fam, cc, p_step=0.1, tol=1e-4)
        lo, hi = res.bracket
        assert hi - lo <= 1e-4
        assert state_margin(cc, fam(lo))[0] <= cc.tol < state_margin(cc, fam(hi))[0]

    def test_deterministic(self):
        fam = BENNETT.make_family()
        a = scan_threshold(fam, BENNETT.config, p_step=0.1, tol=1e-3, workers=1)
        b = scan_threshold(fam, BENNETT.config, p_step=0.1, tol=1e-3, workers=3)
        assert a.threshold == b.threshold
        np.testing.assert_array_equal(a.margins, b.margins)

    def test_bad_step(self):
        with pytest.raises(ValidationError):
            scan_threshold(BENNETT.make_family(), BENNETT.config, p_step=0.0)
