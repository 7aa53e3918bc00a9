"""End-to-end certified continuation runs and their reports.

One run traces a branch, certifies each accepted point as an equilibrium,
runs the spectral stage on certified points, and classifies every point in
the four-way status taxonomy:

    certified_nonresonant      equilibrium, eigenvalues and one frequency
                               all rigorously verified
    nonresonance_unverified    equilibrium and eigenvalue disks verified,
                               no frequency passed the nonresonance check
    eig_unverified             certified equilibrium, spectra not (or not
                               attempted when spectra are disabled)
    equilibrium_unverified     the Newton-Kantorovich certificate failed

Certification and spectral validation of distinct points are independent
and fan out over a thread pool; branch stepping itself stays sequential.
Reports carry timing; branch and spectra files do not, so identical
configurations reproduce identical files byte for byte.
"""

from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Optional

from .continuation import (
    Branch,
    ContinuationOptions,
    certify_point,
    consecutive_ball_overlap_flags,
    detect_secondary,
    run_branch,
)
from .model import ReducedSpace, cyclic_symmetry_defect
from .spectra import SpectralOptions, SpectralResult, spectral_pipeline

STATUSES = (
    "certified_nonresonant",
    "nonresonance_unverified",
    "eig_unverified",
    "equilibrium_unverified",
)


@dataclass
class RunConfig:
    n: int
    k: int
    family: int = 1
    direction: str = "plus"
    max_points: int = 120
    ds0: float = 1e-3
    eps0: float = 1e-4
    ds_min: float = 1e-8
    ds_max: float = 1e-1
    newton_tol: float = 1e-12
    newton_max_iter: int = 20
    collision_stop: float = 1e-3
    mu_hi_factor: float = 10.0
    spectra_every: int = 1  # 0 disables the spectral stage
    parallelism: int = 0  # 0 means all available cores

    def validate(self) -> None:
        if self.n < 3:
            raise ValueError("n must be at least 3")
        if not (2 <= self.k <= self.n / 2):
            raise ValueError(f"k must satisfy 2 <= k <= n/2, got {self.k}")
        if self.family not in (1, 2):
            raise ValueError("family must be 1 or 2")
        if self.direction not in ("plus", "minus"):
            raise ValueError("direction must be plus or minus")
        if not (1 <= self.max_points <= 5000):
            raise ValueError("max_points must be in [1, 5000]")
        if not (0 < self.ds0 <= 1.0 and 0 < self.eps0 <= 1e-2):
            raise ValueError("ds0 must be in (0, 1], eps0 in (0, 1e-2]")
        if not (0 < self.ds_min <= self.ds_max <= 1.0):
            raise ValueError("need 0 < ds_min <= ds_max <= 1")
        if not (0 < self.newton_tol <= 1e-6):
            raise ValueError("newton_tol must be in (0, 1e-6]")
        if not (1 <= self.newton_max_iter <= 200):
            raise ValueError("newton_max_iter must be in [1, 200]")
        if self.spectra_every < 0:
            raise ValueError("spectra_every must be >= 0")
        if self.parallelism < 0:
            raise ValueError("parallelism must be >= 0")

    def continuation_options(self) -> ContinuationOptions:
        return ContinuationOptions(
            ds0=self.ds0,
            eps0=self.eps0,
            ds_min=self.ds_min,
            ds_max=self.ds_max,
            newton_tol=self.newton_tol,
            newton_max_iter=self.newton_max_iter,
            max_points=self.max_points,
            collision_stop=self.collision_stop,
            mu_hi_factor=self.mu_hi_factor,
        )

    def file_prefix(self) -> str:
        return f"n{self.n}k{self.k}f{self.family}{self.direction}"


@dataclass
class RunResult:
    config: RunConfig
    branch: Branch
    spectral: dict[int, SpectralResult]
    statuses: list[str]
    report: dict


def _point_status(pt, spec_result: Optional[SpectralResult]) -> str:
    if pt.cert is None or not pt.cert.success:
        return "equilibrium_unverified"
    if spec_result is None:
        return "eig_unverified"
    return spec_result.status


def run(config: RunConfig) -> RunResult:
    """Trace, certify and spectrally validate one branch."""
    config.validate()
    t0 = time.monotonic()
    branch = run_branch(
        config.n, config.k, config.family, config.direction,
        config.continuation_options(),
    )
    t_branch = time.monotonic() - t0

    space = ReducedSpace(config.n, config.family)
    workers = config.parallelism or (os.cpu_count() or 1)

    t0 = time.monotonic()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        certs = list(pool.map(lambda pt: certify_point(space, pt), branch.points))
    for pt, cert in zip(branch.points, certs):
        pt.cert = cert
    for i in consecutive_ball_overlap_flags(branch):
        branch.points[i].flags.append("uniqueness_ball_overlap")
    t_certify = time.monotonic() - t0

    t0 = time.monotonic()
    spectral: dict[int, SpectralResult] = {}
    if config.spectra_every > 0:
        todo = [
            i
            for i, pt in enumerate(branch.points)
            if pt.cert and pt.cert.success and i % config.spectra_every == 0
        ]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda i: spectral_pipeline(
                        space, branch.points[i].x, branch.points[i].mu,
                        branch.points[i].cert.r0, SpectralOptions(),
                    ),
                    todo,
                )
            )
        spectral = dict(zip(todo, results))
    t_spectra = time.monotonic() - t0

    statuses = [
        _point_status(pt, spectral.get(i)) for i, pt in enumerate(branch.points)
    ]
    counts = {s: statuses.count(s) for s in STATUSES}
    secondary = detect_secondary(space, branch)
    h_defects = [
        cyclic_symmetry_defect(space.lift(pt.x), config.n, config.k)
        for pt in branch.points
    ]
    report = {
        "config": asdict(config),
        "termination": branch.termination,
        "counts": counts,
        "secondary_flags": [list(f) for f in secondary],
        "points": [
            {
                "index": i,
                "mu": pt.mu,
                "step": pt.step,
                "status": statuses[i],
                "Y": pt.cert.Y if pt.cert else None,
                "Z": pt.cert.Z if pt.cert else None,
                "r0": pt.cert.r0 if pt.cert else None,
                "ring_symmetry_defect": h_defects[i],
                "flags": list(pt.flags),
                "nonresonant_nu": (
                    [[lo, hi] for lo, hi in spectral[i].nonresonant_frequencies]
                    if i in spectral
                    else []
                ),
            }
            for i, pt in enumerate(branch.points)
        ],
        "timing_seconds": {
            "continuation": t_branch,
            "certification": t_certify,
            "spectra": t_spectra,
        },
    }
    return RunResult(
        config=config, branch=branch, spectral=spectral,
        statuses=statuses, report=report,
    )


def critical_value_table(
    n_min: int, n_max: int, ks: Optional[list[int]] = None
) -> list[dict]:
    """Certified enclosures of the critical charge values, with the
    comparison against the neutral charge mu = n for k = 1 and the
    symmetric-pair overlap audit."""
    from .intervals import Interval
    from .model import critical_mu_interval

    if n_min < 2 or n_max < n_min:
        raise ValueError("need 2 <= n_min <= n_max")
    rows = []
    for n in range(n_min, n_max + 1):
        k_list = ks if ks is not None else list(range(0, n))
        enclosures = {}
        for k in k_list:
            if not (0 <= k <= n - 1):
                continue
            enclosures[k] = critical_mu_interval(n, k)
        for k, enc in enclosures.items():
            below = None
            if k == 1:
                if enc.hi < n:
                    below = True
                elif enc.lo > n:
                    below = False
            partner = enclosures.get(n - k)
            rows.append(
                {
                    "n": n,
                    "k": k,
                    "lo": repr(enc.lo),
                    "hi": repr(enc.hi),
                    "strictly_below_n": below,
                    "symmetric_pair_overlaps": (
                        None if partner is None else enc.intersects(partner)
                    ),
                }
            )
    return rows
