import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locrad.classes import (
    ConceptClass,
    InconsistentLabelsError,
    Sample,
    SampledRestriction,
    reduce_by_labels,
    restrict,
)
from locrad.rademacher import (
    BoundTrace,
    LocalizationConfig,
    RademacherDraw,
    constants_from_gammas,
    default_iterations,
    local_rademacher_norm,
    localize,
    phi_bar,
    risk_bound,
)

from conftest import brute_local_norm


ZERO_ONLY = SampledRestriction(n=4, vectors=np.zeros((1, 4)))


def draw(seed, n):
    return RademacherDraw.from_seed(seed, n)


# ---------------------------------------------------------------- constants

def test_constants_half_half():
    k1, k2, k3 = constants_from_gammas(0.5, 0.5)
    assert k1 == pytest.approx(6.0, rel=1e-12)
    assert k2 == pytest.approx(6.0 * math.sqrt(5.4) + 2.0, rel=1e-12)
    assert k3 == pytest.approx(6.0 * 44.95 + 33.75, rel=1e-12)
    assert k3 == pytest.approx(303.45, rel=1e-12)


def test_constants_asymmetric():
    k1, _, _ = constants_from_gammas(0.9, 0.1)
    assert k1 == pytest.approx(2.0 * 1.9 / 0.9, rel=1e-12)


def test_constants_diverge_as_gamma_vanishes():
    k3s = [constants_from_gammas(g, 0.5)[2] for g in (1e-1, 1e-2, 1e-3, 1e-4)]
    assert all(b > a for a, b in zip(k3s, k3s[1:]))
    assert k3s[-1] > 1e5


def test_constants_domain():
    for bad in (0.0, 1.0, -0.2, 1.4):
        with pytest.raises(ValueError):
            constants_from_gammas(bad, 0.5)
        with pytest.raises(ValueError):
            constants_from_gammas(0.5, bad)


# ------------------------------------------------------------- iterations

@pytest.mark.parametrize("eps,expected", [
    (0.25, 2),
    (0.001, 4),
    (2.0 ** -16, 5),
    (0.6, 1),
    (0.5, 1),
])
def test_default_iterations(eps, expected):
    assert default_iterations(eps) == expected


def test_default_iterations_rejects_bad_eps():
    for eps in (0.0, 1.0, 1.5, -0.1):
        with pytest.raises(ValueError):
            default_iterations(eps)


@given(st.floats(min_value=1e-30, max_value=0.999))
def test_default_iterations_positive(eps):
    assert default_iterations(eps) >= 1


# ------------------------------------------------------------- local norm

def test_norm_zero_restriction():
    assert local_rademacher_norm(ZERO_ONLY, draw(0, 4), 0.7) == 0.0


def test_norm_full_ball_equals_unconstrained(rng):
    vectors = np.unique(rng.random((15, 6)), axis=0)
    r = SampledRestriction(n=6, vectors=vectors)
    d = draw(5, 6)
    full = local_rademacher_norm(r, d, 1.0)
    assert local_rademacher_norm(r, d, 2.0) == full
    assert full == pytest.approx(brute_local_norm(vectors, d.signs, 1.0), abs=0)


def test_norm_interval_window_example():
    # four sorted points, alternating signs, budget two points: any single
    # point gives |sum| = 1, any pair cancels, so the norm is 1/4
    s = Sample(points=[0.1, 0.3, 0.5, 0.7])
    r = restrict(ConceptClass.intervals(), s)
    d = RademacherDraw(signs=np.array([1, -1, 1, -1]))
    assert local_rademacher_norm(r, d, 0.5) == 0.25


def test_norm_empty_ball_is_zero(rng):
    vectors = np.clip(rng.random((5, 4)) + 0.5, 0.0, 1.0)
    r = SampledRestriction(n=4, vectors=np.unique(vectors, axis=0))
    assert local_rademacher_norm(r, draw(1, 4), 0.0) == 0.0


def test_norm_errors():
    with pytest.raises(ValueError):
        local_rademacher_norm(ZERO_ONLY, draw(0, 3), 0.5)
    with pytest.raises(ValueError):
        local_rademacher_norm(ZERO_ONLY, draw(0, 4), -0.1)


def test_norm_monotone_in_radius(rng):
    pts = rng.random(30)
    s = Sample(points=pts)
    red = reduce_by_labels(
        ConceptClass.intervals(),
        ((pts >= 0.4) & (pts <= 0.7)).astype(float),
        s,
    )
    d = draw(11, 30)
    values = [local_rademacher_norm(red, d, r) for r in np.linspace(0.0, 1.0, 21)]
    assert all(b >= a for a, b in zip(values, values[1:]))
    assert all(v <= values[-1] for v in values)


@pytest.mark.parametrize("kind", ["runs", "symdiff", "vectors", "ties"])
def test_norm_matches_brute_force_per_path(kind, rng):
    for _ in range(40):
        n = int(rng.integers(2, 12))
        pts = rng.random(n)
        if kind == "ties":
            pts = np.round(pts, 1)
        s = Sample(points=pts)
        if kind == "vectors":
            red = SampledRestriction(
                n=n, vectors=np.unique(rng.random((int(rng.integers(1, 30)), n)), axis=0)
            )
        elif kind == "symdiff":
            lo, hi = np.sort(rng.random(2))
            labels = ((pts >= lo) & (pts <= hi)).astype(float)
            red = reduce_by_labels(ConceptClass.intervals(), labels, s)
        else:
            red = restrict(ConceptClass.intervals(), s)
        d = draw(int(rng.integers(0, 2 ** 31)), n)
        radius = float(rng.random() * 1.2)
        got = local_rademacher_norm(red, d, radius)
        want = brute_local_norm(red.materialize(), d.signs, radius)
        assert got == pytest.approx(want, abs=1e-12)


# ---------------------------------------------------------------- phi_bar

def test_phi_bar_safe_zero_restriction():
    cfg = LocalizationConfig(eps=1e-4)
    got = phi_bar(ZERO_ONLY, draw(0, 4), cfg, 1.0)
    _, k2, k3 = constants_from_gammas(0.5, 0.5)
    assert got == pytest.approx(k2 * 1e-2 + k3 * 1e-4, rel=1e-12)
    assert got == pytest.approx(0.1897724, abs=5e-8)


def test_phi_bar_unit_mode(rng):
    pts = rng.random(8)
    s = Sample(points=pts)
    red = restrict(ConceptClass.intervals(), s)
    d = draw(3, 8)
    cfg = LocalizationConfig(eps=0.01, constants_mode="unit")
    r = 0.3
    nu = local_rademacher_norm(red, d, 2 * r)
    assert phi_bar(red, d, cfg, r) == pytest.approx(
        nu + math.sqrt(r * 0.01) + 0.01, rel=1e-12
    )


def test_phi_bar_degenerate_zero():
    cfg = LocalizationConfig(eps=0.0, constants_mode="unit")
    assert phi_bar(ZERO_ONLY, draw(0, 4), cfg, 0.0) == 0.0


def test_phi_bar_rejects_radius_outside_unit():
    cfg = LocalizationConfig(eps=0.01)
    with pytest.raises(ValueError):
        phi_bar(ZERO_ONLY, draw(0, 4), cfg, 1.2)


def test_phi_bar_eps_scaling():
    # multiplying eps by 4 doubles the K2 term and quadruples the K3 term
    r = 0.37
    eps = 1e-3
    _, k2, k3 = constants_from_gammas(0.5, 0.5)
    base = phi_bar(ZERO_ONLY, draw(0, 4), LocalizationConfig(eps=eps), r)
    scaled = phi_bar(ZERO_ONLY, draw(0, 4), LocalizationConfig(eps=4 * eps), r)
    term2 = k2 * math.sqrt(r * eps)
    term3 = k3 * eps
    assert base == pytest.approx(term2 + term3, rel=1e-12)
    assert scaled == pytest.approx(2 * term2 + 4 * term3, rel=1e-12)


# ---------------------------------------------------------------- localize

def test_localize_hand_recursion_safe():
    cfg = LocalizationConfig(eps=1e-4, iteration_override=2)
    trace = localize(ZERO_ONLY, draw(0, 4), cfg)
    _, k2, k3 = constants_from_gammas(0.5, 0.5)
    r1 = k2 * math.sqrt(1e-4) + k3 * 1e-4
    r2 = k2 * math.sqrt(r1 * 1e-4) + k3 * 1e-4
    assert trace.values == (1.0, r1, r2)
    assert r1 == pytest.approx(0.1897724, abs=5e-8)
    assert r2 == pytest.approx(0.0997962, abs=5e-8)


def test_localize_clamps_at_one(rng):
    pts = rng.random(12)
    s = Sample(points=pts)
    red = restrict(ConceptClass.intervals(), s)
    cfg = LocalizationConfig(eps=0.5)  # K3 * eps alone exceeds 1
    trace = localize(red, draw(2, 12), cfg)
    assert all(v == 1.0 for v in trace.values)


def test_localize_unit_eps_zero():
    cfg = LocalizationConfig(eps=0.0, constants_mode="unit", iteration_override=3)
    trace = localize(ZERO_ONLY, draw(0, 4), cfg)
    assert trace.values == (1.0, 0.0, 0.0, 0.0)


def test_localize_records_norms(rng):
    pts = rng.random(20)
    s = Sample(points=pts)
    red = restrict(ConceptClass.intervals(), s)
    d = draw(9, 20)
    cfg = LocalizationConfig(eps=0.01, constants_mode="unit", iteration_override=4)
    trace = localize(red, d, cfg)
    assert len(trace.local_norms) == 4
    for k, nu in enumerate(trace.local_norms):
        assert nu == local_rademacher_norm(red, d, 2 * trace.values[k])


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 16), st.integers(0, 2 ** 20),
       st.floats(1e-6, 0.45), st.sampled_from(["safe", "unit"]))
def test_localize_trace_monotone_property(n, seed, eps, mode):
    rng_local = np.random.default_rng(seed)
    pts = rng_local.random(n)
    s = Sample(points=pts)
    red = restrict(ConceptClass.intervals(), s)
    cfg = LocalizationConfig(eps=eps, constants_mode=mode)
    trace = localize(red, draw(seed, n), cfg)
    assert trace.values[0] == 1.0
    assert all(b <= a for a, b in zip(trace.values, trace.values[1:]))
    assert all(0.0 < v <= 1.0 for v in trace.values)


# --------------------------------------------------------------- risk_bound

def test_risk_bound_singleton_safe():
    rng_local = np.random.default_rng(0)
    v = rng_local.random(100)
    s = Sample(points=np.linspace(0.005, 0.995, 100))
    cls = ConceptClass.finite(v.reshape(1, -1))
    res = risk_bound(cls, v, s, delta_conf=0.05, seed=1)
    assert res.eps == pytest.approx(2.0 * math.log(320.0) / 100.0, rel=1e-12)
    assert res.bound == 1.0  # safe constants clamp at this eps
    assert res.certificate <= 0.05
    assert res.iterations == min(default_iterations(res.eps), 8)


def test_risk_bound_singleton_unit():
    rng_local = np.random.default_rng(0)
    v = rng_local.random(100)
    s = Sample(points=np.linspace(0.005, 0.995, 100))
    cls = ConceptClass.finite(v.reshape(1, -1))
    res = risk_bound(cls, v, s, delta_conf=0.05, seed=1, constants_mode="unit")
    eps = 2.0 * math.log(320.0) / 100.0
    r1 = math.sqrt(eps) + eps
    assert res.trace.values[1] == pytest.approx(r1, rel=1e-12)
    assert r1 == pytest.approx(0.4550227, abs=5e-8)
    # two iterations at this eps: the bound is one more step down
    r2 = math.sqrt(r1 * eps) + eps
    assert res.bound == pytest.approx(r2, rel=1e-12)


def test_risk_bound_rejects_inconsistent_labels():
    s = Sample(points=[0.1, 0.2, 0.3])
    cls = ConceptClass.finite(np.zeros((1, 3)))
    with pytest.raises(InconsistentLabelsError):
        risk_bound(cls, np.array([0.0, 1.0, 0.0]), s, delta_conf=0.1)


def test_risk_bound_needs_exactly_one_level():
    s = Sample(points=[0.1, 0.2, 0.3])
    cls = ConceptClass.finite(np.zeros((1, 3)))
    zeros = np.zeros(3)
    with pytest.raises(ValueError):
        risk_bound(cls, zeros, s)
    with pytest.raises(ValueError):
        risk_bound(cls, zeros, s, delta_conf=0.1, eps=0.05)


def test_risk_bound_certificate_formula():
    s = Sample(points=np.linspace(0.01, 0.99, 50))
    cls = ConceptClass.finite(np.zeros((1, 50)))
    res = risk_bound(cls, np.zeros(50), s, eps=0.02, seed=4)
    n_iter = res.iterations
    assert res.certificate == pytest.approx(2 * n_iter * math.exp(-50 * 0.02 / 2), rel=1e-12)


def test_bound_trace_validation():
    cfg = LocalizationConfig(eps=0.1)
    with pytest.raises(ValueError):
        BoundTrace(values=(0.5, 0.2), local_norms=(0.1,), config=cfg)
    with pytest.raises(ValueError):
        BoundTrace(values=(1.0, 0.2), local_norms=(), config=cfg)


def test_draw_validation():
    with pytest.raises(ValueError):
        RademacherDraw(signs=np.array([1, 0, -1]))
    d = RademacherDraw.from_seed(3, 5)
    assert d.n == 5 and set(np.unique(d.signs)) <= {-1, 1}
    assert np.array_equal(d.signs, RademacherDraw.from_seed(3, 5).signs)


def test_config_validation():
    with pytest.raises(ValueError):
        LocalizationConfig(eps=-1.0)
    with pytest.raises(ValueError):
        LocalizationConfig(eps=0.1, gamma=1.0)
    with pytest.raises(ValueError):
        LocalizationConfig(eps=0.1, constants_mode="custom")
    with pytest.raises(ValueError):
        LocalizationConfig(eps=0.1, constants_mode="custom",
                           custom_constants=(1.0, -2.0, 3.0))
    cfg = LocalizationConfig(eps=0.1, constants_mode="custom",
                             custom_constants=(1.0, 2.0, 3.0))
    assert cfg.resolve_constants() == (1.0, 2.0, 3.0)


def test_trace_rows_serialization():
    cfg = LocalizationConfig(eps=0.01, constants_mode="unit", iteration_override=2)
    trace = localize(ZERO_ONLY, draw(0, 4), cfg)
    rows = trace.rows()
    assert [row["k"] for row in rows] == [0, 1, 2]
    assert rows[0]["r_bar"] == 1.0
    assert rows[-1]["local_norm"] is None
    assert rows[0]["local_norm"] == trace.local_norms[0]
    assert trace.bound == trace.values[-1]
    assert trace.iterations == 2
