from __future__ import annotations

import math

import numpy as np
import pytest

from percolab import lowerbound as L
from percolab.bounds import BoundParams
from percolab.estimators import PiRow, PiTable
from percolab.lattice import TRIANGULAR, box_with_boundary
from percolab.sampler import Config, config_from_sites, sample_config


def tri_config(radius, p, seed):
    return sample_config(TRIANGULAR, box_with_boundary(TRIANGULAR, radius), p, seed)


def pi_for(n_values, value=0.9):
    table = PiTable(TRIANGULAR, 0.5)
    for n in n_values:
        table.add(PiRow(1, n, 1000, int(1000 * value), value, 0.01))
    return table


def test_event_spec_catalog():
    with pytest.raises(ValueError):
        L.EventSpec("decreasing_thing")
    with pytest.raises(ValueError):
        L.EventSpec("h_crossing")
    with pytest.raises(ValueError):
        L.EventSpec("arm", m=3, n=2)
    ev = L.EventSpec("vn_ge", n=4, threshold=10.0)
    assert ev.required_radius() == 8


def test_rsw_constant_degenerate():
    fit1 = L.estimate_rsw_constant(TRIANGULAR, 1.0, 4, 100, 3)
    assert fit1.estimate.point == 1.0 and fit1.c11 == 0.0 and not fit1.infinite
    fit0 = L.estimate_rsw_constant(TRIANGULAR, 0.0, 4, 100, 3)
    assert fit0.estimate.point == 0.0 and fit0.infinite


def test_rsw_constant_stable_at_criticality():
    fits = [
        L.estimate_rsw_constant(TRIANGULAR, 0.5, n, 2000, 7, workers=2).c11 for n in (4, 8, 16)
    ]
    assert all(0.5 < c < 2.5 for c in fits)


def test_fkg_identical_events():
    ev = L.EventSpec("h_crossing", corner=(-4, -4), widths=(8, 8))
    res = L.fkg_check(TRIANGULAR, 0.5, ev, ev, 800, 11)
    assert res.joint.point == res.marginal_a.point
    assert res.z >= 0.0


def test_fkg_disjoint_events_independent():
    a = L.EventSpec("h_crossing", corner=(-9, -9), widths=(8, 8))
    b = L.EventSpec("h_crossing", corner=(1, 1), widths=(8, 8))
    res = L.fkg_check(TRIANGULAR, 0.5, a, b, 3000, 13)
    assert abs(res.z) <= 3.0  # independence: joint = product up to noise


def test_fkg_overlapping_crossings():
    h = L.EventSpec("h_crossing", corner=(-6, -6), widths=(12, 12))
    v = L.EventSpec("v_crossing", corner=(-6, -6), widths=(12, 12))
    res = L.fkg_check(TRIANGULAR, 0.5, h, v, 3000, 17)
    assert res.z >= -3.0
    assert res.joint.point >= res.product - 3 * res.joint.stderr


def test_vn_lower_constants_degenerate():
    table = pi_for([4, 12], value=1.0)
    rep1 = L.vn_lower_constants(TRIANGULAR, 1.0, 4, 200, table, 3, c12_grid=(0.1, 0.5))
    assert rep1.mean_ok
    assert all(t.point == 1.0 for t in rep1.tail_probs)
    assert rep1.c13_fits == (0.0, 0.0)
    rep0 = L.vn_lower_constants(TRIANGULAR, 0.0, 4, 200, table, 3, c12_grid=(0.1,))
    assert math.isinf(rep0.c13_fits[0])


def test_dn_event_trivial_and_masked():
    cfg1 = tri_config(16, 1.0, 5)
    assert L.dn_event(cfg1, 8, 2) is True
    cfg0 = tri_config(16, 0.0, 5)
    assert L.dn_event(cfg0, 8, 2) is False
    # all open except one separating column of a construction rectangle
    carrier = box_with_boundary(TRIANGULAR, 16)
    open_sites = [s for s in carrier.sites if s[0] != 6]
    masked = config_from_sites(TRIANGULAR, carrier, open_sites)
    assert L.dn_event(masked, 8, 2) is False
    with pytest.raises(ValueError):
        L.dn_event(cfg1, 8, 1)


def test_dn_event_monotone_under_opening():
    rng = np.random.default_rng(3)
    for i in range(6):
        cfg = tri_config(16, 0.93, 1000 + i)
        before = L.dn_event(cfg, 8, 2)
        more = cfg.site_open | (
            rng.random(cfg.site_open.shape) < 0.05
        ) & cfg.carrier_mask
        cfg2 = Config(
            cfg.lattice, cfg.region, cfg.p, None, cfg.raster, cfg.carrier_mask, site_open=more
        )
        after = L.dn_event(cfg2, 8, 2)
        if before:
            assert after


def test_gluing_check_trivial():
    assert L.gluing_check(tri_config(16, 1.0, 5), 8, 2) is L.GluingOutcome.HOLDS
    assert L.gluing_check(tri_config(16, 0.0, 5), 8, 2) is L.GluingOutcome.NOT_APPLICABLE


def test_gluing_campaign_deterministic_and_worker_invariant():
    kw = dict(stage_size=4000, max_attempts=12_000, stop_after_violations=None)
    a = L.gluing_campaign(TRIANGULAR, 0.5, 8, 2, 5, 99, workers=1, **kw)
    b = L.gluing_campaign(TRIANGULAR, 0.5, 8, 2, 5, 99, workers=2, **kw)
    assert a == b
    assert a.attempts in (4000, 8000, 12_000)  # whole stages only


def test_dn_probability_smoke():
    est = L.dn_probability(TRIANGULAR, 1.0, 8, 2, 50, 5)
    assert est.point == 1.0


def test_dn_fkg_chain_bound():
    chain = L.dn_fkg_bound(TRIANGULAR, 0.5, 8, 2, 1500, 23, workers=2)
    assert 0 < chain.h_estimate.point < 1
    assert chain.chained_bound == pytest.approx(
        (chain.h_estimate.point * chain.v_estimate.point) ** 25
    )
    assert chain.holds_within_3sigma


def test_lower_tail_estimate():
    table = pi_for([4, 8], value=0.9)
    params = BoundParams(d=2, C11=1.0, C12=0.2, C13=0.5)
    res = L.lower_tail_estimate(TRIANGULAR, 1.0, 8, 2, 100, table, 99, params)
    assert res.direct.point == 1.0
    assert res.implied_bound == pytest.approx(math.exp(-(2 * 1.0 + 0.5) * 4))
    with pytest.raises(ValueError):
        L.lower_tail_estimate(
            TRIANGULAR, 1.0, 8, 2, 100, table, 99, BoundParams(d=2, C11=1.0)
        )
    with pytest.raises(ValueError):
        L.lower_tail_estimate(TRIANGULAR, 1.0, 8, 1, 100, table, 99, params)
