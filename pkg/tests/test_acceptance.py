"""Release gate: one test per externally promised guarantee.

Each test pins one contract of the package with its tolerance spelled out
inline: geometric-decay certificates, the retraction contract for all three
strategies, the two divergence counterexamples, Hausdorff convergence of the
relaxation family, extension, extremal-function enumeration, reconstruction
round trips, embedding isometry, and selftest determinism.  Run with
``pytest -v tests/test_acceptance.py`` for one pass/fail line per guarantee.
"""

import time

import numpy as np
import pytest

from hyperlip.boxset import (
    check_decay_certificate,
    cyclic_iterate,
    cyclic_retract_many,
    detect_noncontraction,
    enclosure_bounds,
    relaxation_order,
    retract_lambda_one_bounded,
    retract_lambda_one_bounded_many,
    retract_lambda_one_general_many,
    shrink_set,
    violation,
    violation_many,
)
from hyperlip.cli import main
from hyperlip.extension import extend_into_Q, kuratowski_embed
from hyperlip.hull import enumerate_extremal_grid, is_extremal
from hyperlip.instances import (
    diagonal_halfspace_instance,
    empty_drift_instance,
    origin_cycle_instance,
    random_mcshane_instance,
    sample_members,
    vee_notch_instance,
)
from hyperlip.metric import (
    FiniteMetricSpace,
    cone_contains,
    hausdorff_distance,
    sup_dist,
)
from hyperlip.reconstruct import (
    ReconstructionConfig,
    choose_cone,
    epsilon_many,
    membership_from_samples,
    synthesize_bounds,
    verify_reconstruction,
)

from conftest import embedded_metric, random_metric


def _paired_lipschitz(X_in, X_out, slack=1e-12):
    """Largest expansion over consecutive disjoint pairs of rows."""
    worst = 0.0
    for i in range(0, len(X_in) - 1, 2):
        before = sup_dist(tuple(X_in[i]), tuple(X_in[i + 1]))
        after = sup_dist(tuple(X_out[i]), tuple(X_out[i + 1]))
        worst = max(worst, after - before)
    assert worst <= slack, f"pairwise expansion {worst:g} exceeds {slack:g}"


def test_criterion_01_decay_certificate(rng):
    """Every recorded trace obeys both decay bounds with slack 1e-9, < 5 s."""
    t0 = time.monotonic()
    combos = [(n, lam) for n in (2, 3, 4) for lam in (0.3, 0.5, 0.9)]
    for count in range(50):
        n, lam = combos[count % len(combos)]
        Q = random_mcshane_instance(n, lam, rng)
        starts = rng.uniform(-6.0, 6.0, (20, n))
        _, traces = cyclic_retract_many(Q, starts, tol=1e-6, record=True)
        for trace in traces:
            assert check_decay_certificate(trace, lam, slack=1e-9) == []
    assert time.monotonic() - t0 < 5.0


def test_criterion_02_retraction_contract(rng):
    """All three retraction strategies: 1-Lipschitz within 1e-12 over 10^3
    random pairs each, members fixed exactly, final violation within
    tolerance (1e-6 below level 1, the analytic (u-l+tol)/k bound at level 1).
    """
    # contractive bounds: plain cyclic retraction
    Q = random_mcshane_instance(3, 0.5, rng)
    X = rng.uniform(-5.0, 5.0, (2000, 3))
    out, _ = cyclic_retract_many(Q, X, tol=1e-6)
    _paired_lipschitz(X, out)
    assert violation_many(Q, out).max() <= 1e-6
    members = sample_members(Q, rng.uniform(-3.0, 3.0, (5, 3)))
    fixed, _ = cyclic_retract_many(Q, members, tol=1e-6)
    assert (fixed == np.asarray(members)).all()

    # level 1 with finite bounds: relax-and-retract on a working box
    Q = vee_notch_instance()
    box = [(-4.0, 4.0), (-4.0, 4.0)]
    tol = 0.05
    X = rng.uniform(-4.0, 4.0, (2000, 2))
    out = retract_lambda_one_bounded_many(Q, X, tol, box)
    _paired_lipschitz(X, out)
    l, u = enclosure_bounds(Q, box)
    k = relaxation_order(u - l, tol)
    assert violation_many(Q, out).max() <= (u - l + tol) / k
    members = [(0.0, 0.0), (1.0, 2.0), (-1.0, 1.5), (2.0, 3.0)]
    fixed = retract_lambda_one_bounded_many(Q, members, tol, box)
    assert (fixed == np.asarray(members)).all()

    # level 1 with missing bounds: truncation around a witness
    Q = diagonal_halfspace_instance()
    w = (0.0, 0.0)
    X = rng.uniform(-5.0, 5.0, (2000, 2))
    out = retract_lambda_one_general_many(Q, w, X, tol=1e-3)
    _paired_lipschitz(X, out)
    assert violation_many(Q, out).max() <= 1e-3
    members = [(0.0, 0.0), (2.0, 1.0), (-1.0, -4.0), (3.0, 3.0)]
    fixed = retract_lambda_one_general_many(Q, w, members, tol=1e-3)
    assert (fixed == np.asarray(members)).all()


def test_criterion_03_unbounded_drift():
    """The inconsistent pair x1 = x2, x2 = 1 + x1 drifts linearly forever."""
    Q = empty_drift_instance()
    trace = cyclic_iterate(Q, (0.0, 0.0), 401)
    d = [abs(v) for v in trace.displacements]
    assert d[0] == 0.0
    assert all(v == 1.0 for v in d[1:])
    assert detect_noncontraction(trace) == "stalled"
    pts = trace.points()
    for m in range(1, 201):
        assert max(abs(c) for c in pts[2 * m]) >= m / 4


def test_criterion_04_cycle_and_bounded_fallback():
    """The cyclic iteration from (0, 1) visits the exact 4-cycle and never
    converges; the bounded level-1 strategy still returns a point within
    1e-3 of membership and within 2e-3 of the single true member (0, 0).
    """
    Q = origin_cycle_instance()
    trace = cyclic_iterate(Q, (0.0, 1.0), 17)
    pts = trace.points()
    cycle = [(1.0, 1.0), (1.0, -1.0), (-1.0, -1.0), (-1.0, 1.0)]
    assert pts[1:5] == cycle
    assert pts[5:9] == cycle
    assert detect_noncontraction(trace) == "stalled"

    p = retract_lambda_one_bounded(Q, (0.0, 1.0), 1e-3,
                                   [(-2.0, 2.0), (-2.0, 2.0)])
    assert violation(Q, p) <= 1e-3
    assert sup_dist(p, (0.0, 0.0)) <= 2e-3 + 1e-9


def test_criterion_05_hausdorff_convergence():
    """Grid-sampled relaxed sets are nested and converge to the true set."""
    Q = origin_cycle_instance()
    l, u = enclosure_bounds(Q, [(-2.0, 2.0), (-2.0, 2.0)])
    axis = [(i - 40) * 0.05 for i in range(81)]
    grid = np.array([(a, b) for a in axis for b in axis])
    step = 0.05
    prev_members = None
    prev_dh = None
    for k in (2, 4, 8, 16, 32, 64, 128, 256):
        Qk = shrink_set(Q, k, l, u)
        mask = violation_many(Qk, grid) == 0.0
        members = [tuple(row) for row in grid[mask]]
        assert members
        if prev_members is not None:
            assert set(members) <= prev_members
        dh = hausdorff_distance(members, [(0.0, 0.0)])
        assert dh <= (u - l) / k + step
        if prev_dh is not None:
            assert dh <= prev_dh + 1e-12
        prev_members = set(members)
        prev_dh = dh


def test_criterion_06_extension(rng):
    """Exact agreement on the subset plus nonexpansiveness on all pairs."""
    for _ in range(20):
        n = int(rng.integers(1, 4))
        Q = random_mcshane_instance(n, 0.5, rng)
        want = int(rng.integers(1, 6))
        # distinct starts can coalesce onto one member, which would break
        # the separation axiom of the embedded metric
        members = list(dict.fromkeys(
            sample_members(Q, rng.uniform(-2.0, 2.0, (want, n)))))
        a_count = len(members)
        m = int(rng.integers(a_count + 1, 21))
        pts = [tuple(map(float, row)) for row in rng.uniform(-2.0, 2.0, (m, n))]
        A = sorted(rng.choice(m, size=a_count, replace=False).tolist())
        for idx, mem in zip(A, members):
            pts[idx] = mem
        B = embedded_metric(pts)
        ext = extend_into_Q(B, A, members, Q, tol=1e-8)
        for idx, mem in zip(A, members):
            assert ext[idx] == mem
        for i in range(B.size):
            for j in range(i + 1, B.size):
                assert sup_dist(ext[i], ext[j]) <= B.d(i, j) + 1e-12


def test_criterion_07_extremal_enumeration(rng):
    """The two-point segment comes out exactly; distance rows are extremal;
    enumerated functions are 1-Lipschitz and, when they vanish somewhere,
    sit within one resolution of a distance row.
    """
    X = FiniteMetricSpace([[0.0, 1.0], [1.0, 0.0]])
    found = enumerate_extremal_grid(X, 0.05)
    assert len(found) == 21
    for i, f in enumerate(found):
        assert f[0] == pytest.approx(i * 0.05, abs=1e-12)
        assert f[0] + f[1] == pytest.approx(1.0, abs=1e-12)

    for _ in range(20):
        m = int(rng.integers(2, 11))
        space = random_metric(rng, m)
        for x in range(m):
            assert is_extremal(space, space.row(x), tol=1e-12)

    space = random_metric(rng, 3)
    resolution = 0.25
    found = enumerate_extremal_grid(space, resolution)
    assert found
    for f in found:
        for i in range(3):
            for j in range(3):
                assert abs(f[i] - f[j]) <= space.d(i, j) + resolution / 2 + 1e-12
        if min(f) == 0.0:
            x = f.index(0.0)
            gap = max(abs(a - b) for a, b in zip(f, space.row(x)))
            assert gap <= resolution + 1e-12


def _reconstruction_case(truth, lo, hi, step=0.125, a=0.1):
    count = int(round((hi - lo) / step))
    grid = [(lo + i * step, lo + j * step)
            for i in range(count + 1) for j in range(count + 1)]
    inside = tuple(p for p in grid if truth(p))
    outside = tuple(p for p in grid if not truth(p))
    Q = synthesize_bounds(ReconstructionConfig(inside, outside, a=a))
    report = verify_reconstruction(membership_from_samples(inside), Q, grid)
    assert report.false_outside == ()
    assert report.false_inside == ()
    eps, anchors = epsilon_many(inside, np.asarray(outside))
    dist = np.array([min(max(abs(x[0] - p[0]), abs(x[1] - p[1])) for p in inside)
                     for x in outside])
    assert (eps <= 2.0 * dist + 1e-12).all()
    for x, e, idx in zip(outside, eps, anchors):
        cone = choose_cone(x, inside[int(idx)], float(e), a)
        assert not any(cone_contains(cone, q, tol=0.0) for q in inside)


def test_criterion_08_reconstruction_round_trip():
    """Sampled square and step shape rebuild with no grid mismatches, all
    cones disjoint from the inside sample, margins below twice the distance,
    in under 30 s.
    """
    t0 = time.monotonic()
    _reconstruction_case(
        lambda p: 0.0 <= p[0] <= 1.0 and 0.0 <= p[1] <= 1.0, -1.0, 3.0)
    _reconstruction_case(
        lambda p: (0.0 <= p[0] <= 2.0 and 0.0 <= p[1] <= 2.0
                   and p[0] <= 1.0 + min(p[1], 1.0)), -1.0, 3.0)
    assert time.monotonic() - t0 < 30.0


def test_criterion_09_embedding_isometry(rng):
    """Coordinate embedding reproduces every distance to 1e-12."""
    for _ in range(20):
        m = int(rng.integers(2, 13))
        space = random_metric(rng, m)
        emb = kuratowski_embed(space)
        for i in range(m):
            for j in range(m):
                assert abs(sup_dist(emb[i], emb[j]) - space.d(i, j)) <= 1e-12


def test_criterion_10_selftest_determinism(capsys):
    """Two selftest runs with one seed print byte-identical reports."""
    assert main(["selftest", "--seed", "7"]) == 0
    first = capsys.readouterr().out
    assert main(["selftest", "--seed", "7"]) == 0
    second = capsys.readouterr().out
    assert first.encode() == second.encode()
    assert first.strip()
