import numpy as np
import pytest

from coulombcert.continuation import (
    Branch,
    BranchPoint,
    ContinuationOptions,
    branch_seed,
    certify_point,
    consecutive_ball_overlap_flags,
    detect_secondary,
    predict_correct,
    run_branch,
    tangent_at,
)
from coulombcert.errors import BifurcationDetected, StepRejected, SymmetryError
from coulombcert.intervals import IntervalArray
from coulombcert.model import ReducedSpace, critical_mu, polygon


FAST = ContinuationOptions(max_points=40)


class TestSeed:
    def test_seed_84(self):
        seed = branch_seed(8, 4, 1, "plus")
        assert seed.mu == pytest.approx(critical_mu(8, 4, mode="float"), abs=1e-14)
        sp = ReducedSpace(8, 1)
        assert np.abs(sp.lift(seed.x) - polygon(8).reshape(-1)).max() < 1e-14

    def test_seed_residual_enclosure(self):
        seed = branch_seed(8, 4, 1, "plus")
        sp = ReducedSpace(8, 1)
        from coulombcert.model import polygon_interval

        ring = polygon_interval(8).reshape(-1)
        enc = sp.reduced_map_interval(
            IntervalArray(ring.lo[sp.select], ring.hi[sp.select]), seed.mu
        )
        assert enc.contains(np.zeros(sp.dim))

    def test_seed_tangent_mu_component_zero(self):
        seed = branch_seed(5, 2, 1, "plus")
        assert seed.tangent[-1] == 0.0
        assert np.linalg.norm(seed.tangent) == pytest.approx(1.0, abs=1e-12)
        # null-space oracle: the seed tangent lies in the kernel of the
        # N x (N+1) Jacobian at the seed
        sp = ReducedSpace(5, 1)
        jac = np.concatenate(
            [sp.reduced_jacobian(seed.x, seed.mu), sp.reduced_dmu(seed.x)[:, None]],
            axis=1,
        )
        assert np.abs(jac @ seed.tangent).max() < 1e-9

    def test_invalid_mode_range(self):
        with pytest.raises(ValueError):
            branch_seed(8, 1, 1, "plus")
        with pytest.raises(ValueError):
            branch_seed(8, 5, 1, "plus")

    def test_family2_half_mode_rejected(self):
        with pytest.raises(SymmetryError):
            branch_seed(8, 4, 2, "plus")


class TestPredictCorrect:
    def test_hyperplane_constraint(self):
        sp = ReducedSpace(5, 1)
        seed = branch_seed(5, 2, 1, "plus")
        pt = predict_correct(sp, seed, 1e-4, FAST)
        predictor = seed.U + 1e-4 * seed.tangent
        assert abs((pt.U - predictor) @ seed.tangent) < 1e-12

    def test_first_point_is_spatial(self):
        sp = ReducedSpace(5, 1)
        seed = branch_seed(5, 2, 1, "plus")
        pt = predict_correct(sp, seed, 1e-4, FAST)
        z = sp.lift(pt.x).reshape(5, 3)[:, 2]
        assert np.abs(z).max() > 1e-5

    def test_step_halving_consistency(self):
        sp = ReducedSpace(5, 1)
        seed = branch_seed(5, 2, 1, "plus")
        start = predict_correct(sp, seed, 1e-4, FAST)
        ds = 2e-3
        one = predict_correct(sp, start, ds, FAST)
        halves = predict_correct(sp, start, ds / 2, FAST)
        halves = predict_correct(sp, halves, ds / 2, FAST)
        assert np.abs(one.U - halves.U).max() < 10 * ds**2

    def test_residual_at_accepted_points(self):
        sp = ReducedSpace(7, 2)
        seed = branch_seed(7, 2, 2, "plus")
        pt = predict_correct(sp, seed, 1e-4, FAST)
        assert np.abs(sp.reduced_map(pt.x, pt.mu)).max() <= 1e-11
        jac = np.concatenate(
            [sp.reduced_jacobian(pt.x, pt.mu), sp.reduced_dmu(pt.x)[:, None]], axis=1
        )
        assert np.abs(jac @ pt.tangent).max() <= 1e-10


class TestTangent:
    def test_orientation_continuity(self):
        sp = ReducedSpace(5, 1)
        seed = branch_seed(5, 2, 1, "plus")
        pt = predict_correct(sp, seed, 1e-4, FAST)
        t = tangent_at(sp, pt.U, pt.tangent)
        assert t @ pt.tangent > 0.0

    def test_rank_deficiency_detected_at_seed(self):
        sp = ReducedSpace(8, 1)
        seed = branch_seed(8, 4, 1, "plus")
        with pytest.raises(BifurcationDetected):
            tangent_at(sp, seed.U, seed.tangent)


class TestRunBranch:
    def test_branch_52_runs_spatial(self):
        branch = run_branch(5, 2, 1, "plus", FAST)
        assert len(branch.points) >= 20
        sp = branch.space
        z_last = sp.lift(branch.points[-1].x).reshape(5, 3)[:, 2]
        assert np.abs(z_last).max() > 0.01
        mus = [p.mu for p in branch.points]
        assert mus[-1] < mus[0]  # branch leaves the critical value downward

    def test_plus_minus_are_mirrors(self):
        plus = run_branch(5, 2, 1, "plus", FAST)
        minus = run_branch(5, 2, 1, "minus", FAST)
        sp = plus.space
        for a, b in zip(plus.points[1:6], minus.points[1:6]):
            ua = sp.lift(a.x).reshape(5, 3)
            ub = sp.lift(b.x).reshape(5, 3)
            flip = ub * np.array([1.0, 1.0, -1.0])
            assert np.abs(ua - flip).max() < 1e-8

    def test_max_points_respected(self):
        branch = run_branch(5, 2, 1, "plus", ContinuationOptions(max_points=5))
        assert len(branch.points) == 5
        assert branch.termination == "max_points"


class TestCertifyPoint:
    def test_trivial_point_between_critical_values(self):
        # ring solution at a mu away from every critical value: tiny radius
        sp = ReducedSpace(6, 1)
        x = sp.project(polygon(6).reshape(-1))
        mu = 0.5 * (critical_mu(6, 2, mode="float") + critical_mu(6, 3, mode="float"))
        pt = BranchPoint(U=np.concatenate([x, [mu]]), tangent=np.zeros(sp.dim + 1), step=0.0)
        cert = certify_point(sp, pt)
        assert cert.success
        assert cert.r0 <= 1e-10

    def test_at_critical_value_fails(self):
        sp = ReducedSpace(6, 1)
        x = sp.project(polygon(6).reshape(-1))
        mu = critical_mu(6, 2, mode="float")
        pt = BranchPoint(U=np.concatenate([x, [mu]]), tangent=np.zeros(sp.dim + 1), step=0.0)
        cert = certify_point(sp, pt)
        assert not cert.success

    def test_branch_points_certify(self):
        branch = run_branch(8, 4, 1, "plus", ContinuationOptions(max_points=30))
        sp = branch.space
        good = 0
        for pt in branch.points[5:]:
            cert = certify_point(sp, pt)
            if cert.success and cert.r0 < 1e-6:
                good += 1
        assert good >= 20

    def test_ball_overlap_flagging(self):
        branch = run_branch(8, 4, 1, "plus", ContinuationOptions(max_points=25))
        sp = branch.space
        for pt in branch.points:
            pt.cert = certify_point(sp, pt)
        assert consecutive_ball_overlap_flags(branch) == []


def pitchfork_space():
    """Manufactured 1-d system F(x; mu) = x^3 - mu*x with a known pitchfork
    at mu = 0, wrapped in the ReducedSpace interface used by
    detect_secondary."""

    class FakeSpace:
        dim = 1

        def reduced_map(self, x, mu):
            return np.array([x[0] ** 3 - mu * x[0]])

        def reduced_jacobian(self, x, mu):
            return np.array([[3.0 * x[0] ** 2 - mu]])

        def reduced_dmu(self, x):
            return np.array([-x[0]])

    return FakeSpace()


class TestDetectSecondary:
    def test_no_flags_on_regular_segment(self):
        branch = run_branch(5, 2, 1, "plus", ContinuationOptions(max_points=8))
        assert detect_secondary(branch.space, branch) == []

    def test_manufactured_pitchfork(self):
        space = pitchfork_space()
        points = []
        for mu in np.linspace(-1.0, 1.0, 41):
            if abs(mu) < 1e-9:
                continue
            points.append(
                BranchPoint(U=np.array([0.0, mu]), tangent=np.array([0.0, 1.0]), step=0.05)
            )
        branch = Branch(n=0, k=0, family=1, direction="plus", points=points)
        flags = detect_secondary(space, branch)
        assert len(flags) == 1
        i, j = flags[0]
        assert points[i].mu < 0.0 < points[j].mu

    @pytest.mark.slow
    def test_branch_52_has_secondary_flag(self):
        branch = run_branch(
            5, 2, 1, "plus", ContinuationOptions(max_points=600, ds_max=0.1)
        )
        flags = detect_secondary(branch.space, branch)
        assert len(flags) >= 1
