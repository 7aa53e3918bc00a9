"""Lossless structured-text storage of branches and spectral results.

Every float is serialised with repr(), the shortest digit string that
round-trips exactly, so stored certificates can be re-audited bit for bit:
cmd `verify` recomputes Y and Z from the stored coordinates and demands
exact equality with the stored values before re-checking the radii
polynomial.  Files carry a versioned header and no timestamps; identical
runs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .certify import Certificate, recheck
from .continuation import Branch, BranchPoint
from .errors import IntegrityError
from .model import Configuration, ReducedSpace
from .spectra import Disk, SpectralCertificate, SpectralResult

BRANCH_MAGIC = "#coulombcert branch v1"
SPECTRA_MAGIC = "#coulombcert spectra v1"
CONFIG_MAGIC = "#coulombcert configuration v1"


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_opt(x) -> str:
    return "-" if x is None else _fmt(x)


def _parse_opt(s: str):
    return None if s == "-" else float(s)


# ---------------------------------------------------------------------------
# branch files
# ---------------------------------------------------------------------------


def branch_to_text(branch: Branch) -> str:
    dim = len(branch.points[0].U) - 1 if branch.points else 0
    lines = [
        BRANCH_MAGIC,
        f"#n={branch.n} k={branch.k} family={branch.family} "
        f"direction={branch.direction} N={dim} termination={branch.termination}",
        "#columns: index step Y Z r_star r0 success flags U[N+1] tangent[N+1]",
    ]
    for i, pt in enumerate(branch.points):
        cert = pt.cert
        fields = [
            str(i),
            _fmt(pt.step),
            _fmt_opt(cert.Y if cert else None),
            _fmt_opt(cert.Z if cert else None),
            _fmt_opt(cert.r_star if cert else None),
            _fmt_opt(cert.r0 if cert else None),
            "1" if (cert and cert.success) else "0",
            ",".join(pt.flags) if pt.flags else "-",
        ]
        fields.extend(_fmt(v) for v in pt.U)
        fields.extend(_fmt(v) for v in pt.tangent)
        lines.append(" ".join(fields))
    return "\n".join(lines) + "\n"


def branch_from_text(text: str) -> Branch:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != BRANCH_MAGIC:
        raise IntegrityError("not a branch file (bad magic line)")
    meta = {}
    for item in lines[1].lstrip("#").split():
        key, _, val = item.partition("=")
        meta[key] = val
    n = int(meta["n"])
    k = int(meta["k"])
    family = int(meta["family"])
    direction = meta["direction"]
    dim = int(meta["N"])
    termination = meta.get("termination", "max_points")
    points = []
    for line in lines[3:]:
        parts = line.split()
        if len(parts) != 8 + 2 * (dim + 1):
            raise IntegrityError(f"malformed branch record: {line[:60]}...")
        step = float(parts[1])
        y, z, r_star, r0 = (_parse_opt(p) for p in parts[2:6])
        success = parts[6] == "1"
        flags = [] if parts[7] == "-" else parts[7].split(",")
        vals = [float(p) for p in parts[8:]]
        u = np.array(vals[: dim + 1])
        tangent = np.array(vals[dim + 1 :])
        cert = None
        if y is not None:
            cert = Certificate(Y=y, Z=z, r_star=r_star, r0=r0, success=success)
        points.append(BranchPoint(U=u, tangent=tangent, step=step, cert=cert, flags=flags))
    return Branch(n=n, k=k, family=family, direction=direction,
                  points=points, termination=termination)


# ---------------------------------------------------------------------------
# spectral files
# ---------------------------------------------------------------------------


def spectra_to_text(results: dict[int, SpectralResult], branch: Branch) -> str:
    lines = [
        SPECTRA_MAGIC,
        f"#n={branch.n} k={branch.k} family={branch.family} direction={branch.direction}",
    ]
    for index in sorted(results):
        res = results[index]
        lines.append(f"point {index} {res.status} zero_audit "
                     f"{1 if res.zero_audit_ok else 0} unstable {res.unstable_disks}")
        lines.append(f"disks {len(res.disks)}")
        for d in res.disks:
            lines.append(f"{_fmt(d.center.real)} {_fmt(d.center.imag)} {_fmt(d.radius)}")
        lines.append(f"candidates {len(res.certificates)}")
        for c in res.certificates:
            lines.append(
                f"{_fmt(c.nu_lo)} {_fmt(c.nu_hi)} {1 if c.nonresonant else 0} "
                f"{c.max_multiple_checked} {_fmt(c.disk_pos.center.real)} "
                f"{_fmt(c.disk_pos.center.imag)} {_fmt(c.disk_pos.radius)}"
            )
        lines.append("end")
    return "\n".join(lines) + "\n"


def spectra_from_text(text: str) -> dict[int, SpectralResult]:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != SPECTRA_MAGIC:
        raise IntegrityError("not a spectra file (bad magic line)")
    results: dict[int, SpectralResult] = {}
    i = 2
    while i < len(lines):
        head = lines[i].split()
        if head[0] != "point":
            raise IntegrityError(f"expected point record, got: {lines[i][:40]}")
        index = int(head[1])
        status = head[2]
        zero_audit = head[4] == "1"
        unstable = int(head[6])
        i += 1
        ndisks = int(lines[i].split()[1])
        i += 1
        disks = []
        for _ in range(ndisks):
            re_, im_, r_ = (float(p) for p in lines[i].split())
            disks.append(Disk(center=complex(re_, im_), radius=r_))
            i += 1
        ncand = int(lines[i].split()[1])
        i += 1
        certs = []
        for _ in range(ncand):
            parts = lines[i].split()
            certs.append(
                SpectralCertificate(
                    nu_lo=float(parts[0]),
                    nu_hi=float(parts[1]),
                    nonresonant=parts[2] == "1",
                    max_multiple_checked=int(parts[3]),
                    disk_pos=Disk(center=complex(float(parts[4]), float(parts[5])),
                                  radius=float(parts[6])),
                    disk_neg=Disk(center=complex(float(parts[4]), -float(parts[5])),
                                  radius=float(parts[6])),
                    others=[],
                )
            )
            i += 1
        if lines[i] != "end":
            raise IntegrityError("unterminated spectra point record")
        i += 1
        results[index] = SpectralResult(
            status=status,
            disks=disks,
            certificates=certs,
            zero_audit_ok=zero_audit,
            unstable_disks=unstable,
        )
    return results


# ---------------------------------------------------------------------------
# configuration records
# ---------------------------------------------------------------------------


def config_to_text(config: Configuration, family: int | None = None) -> str:
    lines = [
        CONFIG_MAGIC,
        f"#n={config.n} mu={_fmt(config.mu)}"
        + (f" family={family}" if family is not None else ""),
    ]
    for j, row in enumerate(config.positions):
        lines.append(f"{_fmt(row[0])} {_fmt(row[1])} {_fmt(row[2])}")
    return "\n".join(lines) + "\n"


def config_from_text(text: str) -> Configuration:
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != CONFIG_MAGIC:
        raise IntegrityError("not a configuration record (bad magic line)")
    meta = {}
    for item in lines[1].lstrip("#").split():
        key, _, val = item.partition("=")
        meta[key] = val
    rows = [[float(p) for p in line.split()] for line in lines[2:]]
    u = np.array(rows).reshape(-1)
    if len(rows) != int(meta["n"]):
        raise IntegrityError("configuration row count mismatch")
    return Configuration(u=u, mu=float(meta["mu"]))


# ---------------------------------------------------------------------------
# re-audit
# ---------------------------------------------------------------------------


@dataclass
class AuditReport:
    checked: int = 0
    passed: int = 0
    mismatches: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


def verify_branch(branch: Branch) -> AuditReport:
    """Re-audit every stored successful certificate.

    Y and Z are recomputed from the stored coordinates at the stored trust
    radius and must agree exactly with the stored values (the pipeline is
    deterministic); the radii-polynomial inequality is then re-verified in
    interval arithmetic.
    """
    from .certify import CertificationProblem, approx_inverse, bound_Y, bound_Z

    space = ReducedSpace(branch.n, branch.family)
    report = AuditReport()
    for i, pt in enumerate(branch.points):
        cert = pt.cert
        if cert is None or not cert.success:
            continue
        report.checked += 1
        x = pt.x
        mu = pt.mu

        def f_point(xx, mu=mu):
            return space.reduced_map(xx, mu)

        def f_interval(box, mu=mu):
            return space.reduced_map_interval(box, mu)

        def df_interval(box, mu=mu):
            return space.reduced_jacobian_interval(box, mu)

        try:
            a = approx_inverse(space.reduced_jacobian(x, mu))
            prob = CertificationProblem(
                f_point=f_point, f_interval=f_interval, df_interval=df_interval,
                ubar=x, A=a, r_star=cert.r_star,
            )
            y = bound_Y(prob)
            z = bound_Z(prob, cert.r_star)
        except Exception as exc:  # noqa: BLE001 - any failure is a mismatch
            report.mismatches.append(f"point {i}: recomputation failed: {exc}")
            continue
        if y != cert.Y or z != cert.Z:
            report.mismatches.append(
                f"point {i}: stored (Y, Z) = ({cert.Y!r}, {cert.Z!r}) but "
                f"recomputed ({y!r}, {z!r})"
            )
            continue
        if not recheck(y, z, cert.r0):
            report.mismatches.append(f"point {i}: radii polynomial not negative at r0")
            continue
        report.passed += 1
    return report
