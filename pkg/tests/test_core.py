import json

import numpy as np
import pytest

from pulse_seek import core
from pulse_seek.errors import (
    GridMismatch,
    LadderInvalid,
    NegativeDensity,
    NonPositiveLambda,
    NonPositiveLength,
    UnorderedBreakpoints,
    ZeroResponse,
)


def test_validate_uniform_identity():
    m = core.validate(core.SourceModel.uniform(1.0, 1.0))
    assert m.prior.values == (1.0,)
    assert m.lam == 1.0


def test_validate_rejects_zero_lambda():
    with pytest.raises(NonPositiveLambda):
        core.validate(core.SourceModel(0.0, core.PriorDensity.uniform(1.0), 1.0))


def test_validate_rejects_bad_length():
    with pytest.raises(NonPositiveLength):
        core.validate(core.SourceModel(1.0, core.PriorDensity.uniform(1.0), -1.0))


def test_piecewise_renormalized():
    p = core.PriorDensity.piecewise([0, 0.5, 1], [2, 2])
    assert p.values == pytest.approx((1.0, 1.0))


@pytest.mark.parametrize(
    "bps,vals,err",
    [
        ([0, 0.6, 0.5, 1], [1, 1, 1], UnorderedBreakpoints),
        ([0.1, 1], [1], UnorderedBreakpoints),
        ([0, 0.5, 1], [1, -1], NegativeDensity),
        ([0, 0.5, 1], [0, 0], NegativeDensity),
        ([0, 1], [1, 2], GridMismatch),
    ],
)
def test_prior_rejections(bps, vals, err):
    with pytest.raises(err):
        core.PriorDensity.piecewise(bps, vals)


def test_prior_support_must_match_interval():
    with pytest.raises(GridMismatch):
        core.validate(core.SourceModel(1.0, core.PriorDensity.uniform(2.0), 1.0))


def test_mass_between_and_sampling():
    p = core.PriorDensity.piecewise([0, 0.25, 1], [3, 1])
    assert p.mass_between(0, 0.25) == pytest.approx(0.5)
    assert p.mass_between(0.1, 0.5) == pytest.approx(0.15 * 2 + 0.25 * 2 / 3)
    x = p.sample(np.random.default_rng(1), 200_000)
    assert np.mean(x < 0.25) == pytest.approx(0.5, abs=0.005)


def test_sampling_skips_zero_cells():
    p = core.PriorDensity.on_equal_cells([0, 1, 0, 1])
    x = p.sample(np.random.default_rng(2), 10_000)
    assert not np.any((x > 0) & (x < 0.25))
    assert not np.any((x > 0.5) & (x < 0.75))


def test_load_profile_budget_checked():
    core.LoadProfile((0.0, 0.5, 1.0), (0.2, 0.4), 0.3)
    with pytest.raises(ValueError):
        core.LoadProfile((0.0, 0.5, 1.0), (0.2, 0.2), 0.3)
    with pytest.raises(ValueError):
        core.LoadProfile((0.0, 0.5, 1.0), (1.2, 0.0), 0.6)


def test_cumulative_load_bounds():
    core.CumulativeLoad((0.0, 0.5, 1.0), 2.0, (0.8, 0.0), 0.2)
    with pytest.raises(ValueError):
        core.CumulativeLoad((0.0, 0.5, 1.0), 1.0, (1.5, 0.0), 0.75)


def test_ladder_invariants():
    lad = core.ApertureLadder((1.0, 0.3, 0.1))
    assert lad.m == 2
    assert lad.epsilon == 0.1
    np.testing.assert_allclose(lad.ratios, [1 / 0.3, 3.0])
    with pytest.raises(LadderInvalid):
        core.ApertureLadder((1.0, 1.0))
    with pytest.raises(LadderInvalid):
        core.ApertureLadder((1.0,))


def test_codebook_is_read_only():
    cb = core.ReceiverCodebook(2, [[0, 1, 1], [1, 0, 1]])
    with pytest.raises(ValueError):
        cb.matrix[0, 0] = 1
    assert cb.zone(1) == (2, 3)
    assert cb.column(1) == (0, 1)


def test_zero_response_rejected():
    with pytest.raises(ZeroResponse):
        core.ReceiverResponse((0, 0, 0))


def test_stage_plan_achieved_accuracy_default():
    plan = core.StagePlan(2, 2, (1.0, 1 / 3), 0.12, 2.0)
    assert plan.achieved_accuracy == pytest.approx(1 / 9)
    assert plan.segments_per_window == 3


def test_trial_stats_from_samples():
    s = core.TrialStats.from_samples([1.0, 2.0, 3.0, 4.0])
    assert s.mean == 2.5
    assert s.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert s.ci95 == pytest.approx(core.Z95 * s.stderr)


@pytest.mark.parametrize(
    "obj",
    [
        core.PriorDensity.piecewise([0, 0.3, 1], [1, 2]),
        core.SourceModel.uniform(2.0, 3.0),
        core.LoadProfile((0.0, 1.0), (0.4,), 0.4),
        core.CumulativeLoad((0.0, 1.0), 2.0, (0.6,), 0.3),
        core.ApertureLadder((1.0, 0.26, 0.1)),
        core.ReceiverResponse((1, 0, 1)),
        core.StagePlan(3, 1, (1.0,), 0.5, 1.0),
        core.TrialStats(10, 1.0, 0.1, 0.196),
    ],
)
def test_json_round_trip(obj):
    back = type(obj).from_dict(json.loads(core.dumps(obj)))
    assert back == obj


def test_codebook_json_round_trip():
    cb = core.ReceiverCodebook(2, [[0, 1, 1], [1, 0, 1]])
    back = core.ReceiverCodebook.from_dict(json.loads(core.dumps(cb)))
    np.testing.assert_array_equal(back.matrix, cb.matrix)
