"""Acceptance suite: one test per exit criterion, each printing a PASS line.

The branch panels (both reflection families, both signs) are computed once
per session and shared across the criteria that consume them.
"""

import math

import mpmath
import numpy as np
import pytest

from coulombcert.branchio import branch_from_text, branch_to_text, verify_branch
from coulombcert.certify import CertificationProblem, certify
from coulombcert.intervals import Interval, IntervalArray
from coulombcert.model import (
    critical_mu,
    critical_mu_interval,
    cyclic_symmetry_defect,
    grad_V_interval,
    hess_V,
    orbit_direction,
    polygon,
    polygon_interval,
    vertical_mode,
)
from coulombcert.pipeline import RunConfig, run
from coulombcert.spectra import certainly_disjoint, Disk, spectral_pipeline

mpmath.mp.dps = 40

FAMILY1_PANELS = [(5, 2), (7, 2), (7, 3), (8, 3), (8, 4), (9, 3), (9, 4), (10, 2)]
FAMILY2_PANELS = [(5, 2), (7, 2), (7, 3), (8, 2), (8, 3), (9, 3), (9, 4), (10, 2)]
ALL_PANELS = [(n, k, 1) for n, k in FAMILY1_PANELS] + [
    (n, k, 2) for n, k in FAMILY2_PANELS
]


def certified_points(result, r0_bound=1e-6):
    out = []
    for i, pt in enumerate(result.branch.points):
        if pt.cert and pt.cert.success and pt.cert.r0 < r0_bound:
            out.append((i, pt))
    return out


@pytest.fixture(scope="session")
def panel_runs():
    runs = {}
    for n, k, family in ALL_PANELS:
        for direction in ("plus", "minus"):
            config = RunConfig(
                n=n, k=k, family=family, direction=direction,
                max_points=60, spectra_every=0,
            )
            runs[(n, k, family, direction)] = run(config)
    return runs


@pytest.fixture(scope="session")
def panel_spectra(panel_runs):
    """Spectral stage at the 10 deepest certified points of each panel's
    plus branch."""
    spectra = {}
    for n, k, family in ALL_PANELS:
        result = panel_runs[(n, k, family, "plus")]
        space = result.branch.space
        pts = certified_points(result)[-10:]
        spectra[(n, k, family)] = [
            (i, pt, spectral_pipeline(space, pt.x, pt.mu, pt.cert.r0))
            for i, pt in pts
        ]
    return spectra


def test_criterion_1_neutral_charge_threshold():
    """Certified s1(n) < n for n in 3..472 and s1(473) > 473."""
    for n in range(3, 473):
        enc = critical_mu_interval(n, 1)
        assert enc.hi < n, f"s1({n}) not certified below {n}"
    enc = critical_mu_interval(473, 1)
    assert enc.lo > 473
    print("\nPASS criterion 1: ring first critical value certified below mu=n "
          "for n=3..472 and above at n=473")


def test_criterion_2_ring_is_critical_point():
    """Interval gradient at the ring contains zero, n=3..12, 5 mu each."""
    for n in range(3, 13):
        ring = polygon_interval(n).reshape(-1)
        for mu in (0.5, 1.0, float(n), 2.0 * n, 5.0 * n):
            enc = grad_V_interval(ring, mu, n)
            assert enc.contains(np.zeros(3 * n)), f"gradient not zero at n={n}, mu={mu}"
    print("PASS criterion 2: interval gradient encloses 0 at the ring for "
          "n=3..12, 5 charge values each")


def test_criterion_3_hessian_eigenstructure():
    """Vertical modes are Hessian eigenvectors; rotation orbit in kernel."""
    worst = 0.0
    for n in range(3, 13):
        mu = 1.5 * n
        u = polygon(n).reshape(-1)
        h = hess_V(u, mu, n)
        for k in range(n):
            v = vertical_mode(n, k)
            lam = -mu + critical_mu(n, k, mode="float")
            worst = max(worst, float(np.abs(h @ v - lam * v).max()))
        worst = max(worst, float(np.abs(h @ orbit_direction(u)).max()))
    assert worst <= 1e-10
    print(f"PASS criterion 3: Hessian vertical-mode identity and kernel to "
          f"{worst:.2e} <= 1e-10 for n=3..12, all modes")


def test_criterion_4_certifier_soundness():
    """Scalar sqrt(2) certification plus 10^3 seeded polynomial systems."""
    from tests.test_certify import planted_root_problem, scalar_problem

    prob = scalar_problem(1.41421356237, 1.0 / 2.82842712474, 1e-6)
    cert = certify(prob)
    assert cert.success and cert.r0 <= 1e-7
    root = mpmath.sqrt(2)
    assert mpmath.mpf(1.41421356237 - cert.r0) <= root <= mpmath.mpf(1.41421356237 + cert.r0)

    from coulombcert.certify import approx_inverse, default_r_star

    rng = np.random.default_rng(2024)
    enclosed = 0
    attempted = 0
    for _ in range(1000):
        dim = int(rng.integers(2, 6))
        x_star, f_point, f_interval, df_interval = planted_root_problem(rng, dim)
        ubar = x_star + rng.uniform(-1e-8, 1e-8, dim)
        a = approx_inverse(df_interval(IntervalArray.point(ubar)).mid())
        c = certify(CertificationProblem(
            f_point, f_interval, df_interval, ubar, a,
            default_r_star(float(np.abs(f_point(ubar)).max())),
        ))
        attempted += 1
        if c.success:
            assert np.abs(ubar - x_star).max() <= c.r0, "planted root escaped"
            enclosed += 1
    assert enclosed >= 950
    print(f"PASS criterion 4: sqrt(2) certified with r0={cert.r0:.2e} <= 1e-7; "
          f"{enclosed}/{attempted} seeded systems enclosed their planted roots")


def test_criterion_5_branch_panels(panel_runs):
    """Every figure panel, both signs: >= 20 certified spatial points."""
    summary = []
    for n, k, family in ALL_PANELS:
        for direction in ("plus", "minus"):
            result = panel_runs[(n, k, family, direction)]
            space = result.branch.space
            good = certified_points(result)
            spatial = [
                (i, pt) for i, pt in good
                if i > 0 and np.abs(space.lift(pt.x).reshape(n, 3)[:, 2]).max() > 1e-6
            ]
            assert len(spatial) >= 20, (
                f"panel n={n} k={k} family={family} {direction}: "
                f"only {len(spatial)} certified spatial points"
            )
            summary.append(len(spatial))
    print(f"PASS criterion 5: all {len(ALL_PANELS)} panels, both signs, "
          f"carry >= 20 certified spatial points (min {min(summary)}, "
          f"max {max(summary)}, r0 < 1e-6)")


def test_criterion_6_polygon_group_structure(panel_runs):
    """Ring symmetry defect <= 2 r0 at every certified point; (8,4) splits
    into two regular squares."""
    for n, k, family in ALL_PANELS:
        for direction in ("plus", "minus"):
            result = panel_runs[(n, k, family, direction)]
            space = result.branch.space
            for i, pt in certified_points(result):
                defect = cyclic_symmetry_defect(space.lift(pt.x), n, k)
                assert defect <= 2.0 * pt.cert.r0, (
                    f"n={n} k={k} f{family} {direction} point {i}: "
                    f"defect {defect:.2e} > 2 r0 = {2 * pt.cert.r0:.2e}"
                )
    result = panel_runs[(8, 4, 1, "plus")]
    space = result.branch.space
    checked = 0
    for i, pt in certified_points(result):
        if i == 0:
            continue
        pos = space.lift(pt.x).reshape(8, 3)
        r0 = pt.cert.r0
        for group in (pos[0::2], pos[1::2]):
            radii = np.linalg.norm(group[:, :2], axis=1)
            assert radii.max() - radii.min() <= 2.0 * r0
            assert group[:, 2].max() - group[:, 2].min() <= 2.0 * r0
        checked += 1
    assert checked >= 20
    print(f"PASS criterion 6: ring symmetry defect <= 2 r0 everywhere; "
          f"(8,4) forms 2 regular squares at {checked} certified points")


def test_criterion_7_spectral_symmetry(panel_spectra):
    """Certified disk multisets close under z -> -z and z -> conj(z)."""
    points_checked = 0
    for (n, k, family), entries in panel_spectra.items():
        assert len(entries) == 10, f"panel n={n} k={k} f{family}: need 10 points"
        for i, pt, res in entries:
            for d in res.disks:
                for image in (
                    Disk(center=-d.center, radius=d.radius),
                    Disk(center=d.center.conjugate(), radius=d.radius),
                ):
                    assert any(
                        not certainly_disjoint(other, image) for other in res.disks
                    ), (
                        f"n={n} k={k} f{family} point {i}: no partner for disk "
                        f"at {d.center:.6g}"
                    )
            points_checked += 1
    print(f"PASS criterion 7: certified disk multisets closed under negation "
          f"and conjugation at {points_checked} points (10 per panel)")


def test_criterion_8_nonresonance(panel_spectra):
    """Full nonresonant spectral certificates on (8,4) and (9,3), family 1."""
    for n, k in ((8, 4), (9, 3)):
        entries = panel_spectra[(n, k, 1)]
        winners = [
            (i, res) for i, _, res in entries if res.status == "certified_nonresonant"
        ]
        assert winners, f"no nonresonant certificate on the ({n},{k}) branch"
        i, res = winners[-1]
        for cert in res.certificates:
            if cert.nonresonant:
                assert cert.nu_lo > 0.0
                assert len(cert.others) == 6 * n - 4
                assert cert.zero_count == 2
    print("PASS criterion 8: certified nonresonant frequencies exist on the "
          "(8,4) and (9,3) family-1 branches")


def test_criterion_9_reaudit_determinism(panel_runs):
    """verify passes on every branch file; identical reruns are byte-identical."""
    audited = 0
    for key, result in panel_runs.items():
        text = branch_to_text(result.branch)
        report = verify_branch(branch_from_text(text))
        assert report.ok, f"re-audit failed for {key}: {report.mismatches[:2]}"
        audited += report.checked
    config = RunConfig(n=7, k=3, family=2, direction="minus",
                       max_points=25, spectra_every=0)
    first = branch_to_text(run(config).branch)
    second = branch_to_text(run(config).branch)
    assert first == second
    print(f"PASS criterion 9: {audited} stored certificates re-audited across "
          f"{len(panel_runs)} branch files; rerun is byte-identical")


def test_criterion_10_inclusion_isotonicity():
    """10^4 random point samples per operation stay inside the enclosures."""
    rng = np.random.default_rng(99)
    n_boxes, n_samples = 200, 50
    ops = {
        "add": (lambda a, b: a + b, lambda x, y: x + y),
        "sub": (lambda a, b: a - b, lambda x, y: x - y),
        "mul": (lambda a, b: a * b, lambda x, y: x * y),
        "div": (lambda a, b: a / b, lambda x, y: x / y),
        "sqrt": (lambda a, b: a.sqrt(), lambda x, y: np.sqrt(x)),
        "square": (lambda a, b: a.square(), lambda x, y: x * x),
        "sin": (lambda a, b: a.sin(), lambda x, y: np.sin(x)),
        "cos": (lambda a, b: a.cos(), lambda x, y: np.cos(x)),
    }
    violations = 0
    total = {name: 0 for name in ops}
    for name, (iv_op, pt_op) in ops.items():
        while total[name] < 10_000:
            lo1 = rng.uniform(-8, 8)
            a = Interval(abs(lo1) if name == "sqrt" else lo1,
                         (abs(lo1) if name == "sqrt" else lo1) + rng.uniform(0, 2))
            lo2 = rng.uniform(-8, 8)
            b = Interval(lo2, lo2 + rng.uniform(0, 2))
            if name == "div" and b.lo <= 0.0 <= b.hi:
                continue
            enc = iv_op(a, b)
            xs = rng.uniform(a.lo, a.hi, n_samples)
            ys = rng.uniform(b.lo, b.hi, n_samples)
            vals = pt_op(xs, ys)
            violations += int(((vals < enc.lo) | (vals > enc.hi)).sum())
            total[name] += n_samples
    assert violations == 0
    print(f"PASS criterion 10: {sum(total.values())} samples across "
          f"{len(ops)} operations, zero enclosure violations")
