"""CSV exports reproducing the figure data of a stored branch.

Three exports per branch:

* configurations: the lifted 3-d positions of every branch point;
* diagram: charge parameter against branch norms, with certification data;
* modes: sampled first-order periodic trajectories for the certified
  nonresonant frequencies of a chosen point (the trajectory file has
  samples*n rows of exactly three columns; row = sample*n + charge).

Trajectory eigenvectors are recomputed numerically from the stored branch
point; the rigour lives in the stored frequency enclosure, not in the plot
samples.
"""

from __future__ import annotations

import numpy as np

from .continuation import Branch
from .errors import NumericsError
from .model import linearization, normal_mode_expansion, polygon
from .spectra import SpectralResult


def configurations_csv(branch: Branch) -> str:
    space = branch.space
    lines = ["point,charge,x,y,z"]
    for i, pt in enumerate(branch.points):
        pos = space.lift(pt.x).reshape(branch.n, 3)
        for j in range(branch.n):
            lines.append(
                f"{i},{j},{pos[j, 0]!r},{pos[j, 1]!r},{pos[j, 2]!r}"
            )
    return "\n".join(lines) + "\n"


def diagram_csv(branch: Branch, statuses: dict[int, str] | None = None) -> str:
    space = branch.space
    ring = polygon(branch.n).reshape(-1)
    lines = ["point,mu,max_height,deviation_norm,Y,Z,r0,success,status"]
    for i, pt in enumerate(branch.points):
        u = space.lift(pt.x)
        height = float(np.abs(u.reshape(branch.n, 3)[:, 2]).max())
        deviation = float(np.abs(u - ring).max())
        cert = pt.cert
        status = statuses.get(i, "") if statuses else ""
        lines.append(
            ",".join(
                [
                    str(i),
                    repr(pt.mu),
                    repr(height),
                    repr(deviation),
                    repr(cert.Y) if cert else "",
                    repr(cert.Z) if cert else "",
                    repr(cert.r0) if cert and cert.r0 is not None else "",
                    "1" if cert and cert.success else "0",
                    status,
                ]
            )
        )
    return "\n".join(lines) + "\n"


def _eigvec_for_frequency(u: np.ndarray, mu: float, n: int, nu_mid: float) -> np.ndarray:
    """Numeric position-component eigenvector for the eigenvalue nearest
    i*nu_mid."""
    l_mid = linearization(u, mu, n)
    vals, vecs = np.linalg.eig(l_mid)
    idx = int(np.argmin(np.abs(vals - 1j * nu_mid)))
    if abs(vals[idx] - 1j * nu_mid) > 1e-3 * max(1.0, abs(nu_mid)):
        raise NumericsError(
            f"no numeric eigenvalue near i*{nu_mid:.6g} (closest {vals[idx]:.6g})"
        )
    return vecs[: 3 * n, idx]


def mode_trajectory_csv(
    branch: Branch,
    point_index: int,
    nu_lo: float,
    nu_hi: float,
    eps: float = 0.2,
    samples: int = 128,
) -> str:
    """Sampled first-order periodic trajectory for one certified frequency;
    samples*n rows of three columns, preceded by comment lines."""
    space = branch.space
    pt = branch.points[point_index]
    u = space.lift(pt.x)
    nu_mid = 0.5 * (nu_lo + nu_hi)
    vec = _eigvec_for_frequency(u, pt.mu, branch.n, nu_mid)
    traj = normal_mode_expansion(u, nu_mid, vec, eps, samples)
    lines = [
        f"# first-order periodic trajectory at branch point {point_index}",
        f"# nu0 in [{nu_lo!r}, {nu_hi!r}], eps={eps!r}, samples={samples}",
        "x,y,z",
    ]
    for s in range(samples):
        for j in range(branch.n):
            lines.append(f"{traj[s, j, 0]!r},{traj[s, j, 1]!r},{traj[s, j, 2]!r}")
    return "\n".join(lines) + "\n"


def mode_exports(
    branch: Branch,
    spectral: dict[int, SpectralResult],
    point_index: int | None = None,
    eps: float = 0.2,
    samples: int = 128,
) -> tuple[dict[str, str], list[str]]:
    """Trajectory CSVs for every nonresonant frequency at the chosen point
    (default: the last point holding a full certificate).  Returns the
    exports plus notices for anything skipped."""
    notices: list[str] = []
    candidates = [
        i for i, res in sorted(spectral.items()) if res.nonresonant_frequencies
    ]
    if point_index is None:
        if not candidates:
            return {}, ["no point carries a certified nonresonant frequency; "
                        "trajectory export skipped"]
        point_index = candidates[-1]
    res = spectral.get(point_index)
    if res is None or not res.nonresonant_frequencies:
        return {}, [f"point {point_index} has no certified nonresonant frequency; "
                    "trajectory export skipped"]
    exports = {}
    for m, (nu_lo, nu_hi) in enumerate(res.nonresonant_frequencies):
        try:
            exports[f"modes_point{point_index}_nu{m}.csv"] = mode_trajectory_csv(
                branch, point_index, nu_lo, nu_hi, eps=eps, samples=samples
            )
        except NumericsError as exc:
            notices.append(f"frequency {m} at point {point_index}: {exc}")
    return exports, notices
