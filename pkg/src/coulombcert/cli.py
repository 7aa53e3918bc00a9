"""Command-line client of the certification service.

Every subcommand talks to the FastAPI app over HTTP semantics: against a
remote server when --server (or COULOMBCERT_SERVER) is given, otherwise
against the app mounted in process, so no running server is required.
Output files land in --out, the COULOMBCERT_OUT directory, or the working
directory, in that order.  Exit status is zero exactly when the requested
run completed; per-point certification failures are data in the report,
not process errors.
"""

from __future__ import annotations

import json
import os
from pathlib import Path

import click
import httpx


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server.rstrip("/"), timeout=None)
    # no server given: mount the app in process (sync ASGI bridge)
    from starlette.testclient import TestClient

    from .service import app  # imported lazily; pulls numpy etc.

    return TestClient(app)


def _post(ctx, path: str, payload: dict) -> dict:
    with _client(ctx.obj["server"]) as client:
        resp = client.post(path, json=payload)
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
    return resp.json()


def _outdir(ctx) -> Path:
    out = ctx.obj["out"] or os.environ.get("COULOMBCERT_OUT") or "."
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


@click.group()
@click.option("--server", default=None, envvar="COULOMBCERT_SERVER",
              help="Base URL of a running service; default is in-process.")
@click.option("--out", default=None, help="Output directory (or COULOMBCERT_OUT).")
@click.pass_context
def main(ctx, server, out):
    """Certified charged-ring equilibria: critical values, branch
    continuation, re-audit and plot data."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server
    ctx.obj["out"] = out


@main.command()
@click.option("--n-min", type=int, required=True)
@click.option("--n-max", type=int, required=True)
@click.option("--k", "ks", type=int, multiple=True,
              help="Restrict to these modes (repeatable); default all.")
@click.option("--save/--no-save", default=False, help="Also write sk.json.")
@click.pass_context
def sk(ctx, n_min, n_max, ks, save):
    """Certified enclosures of the critical charge values."""
    data = _post(ctx, "/sk", {"n_min": n_min, "n_max": n_max,
                              "ks": list(ks) or None})
    for row in data["rows"]:
        line = f"n={row['n']:>4d} k={row['k']:>3d}  [{row['lo']}, {row['hi']}]"
        if row["strictly_below_n"] is not None:
            line += "  below mu=n" if row["strictly_below_n"] else "  ABOVE mu=n"
        if row["symmetric_pair_overlaps"] is False:
            line += "  (symmetric pair mismatch!)"
        click.echo(line)
    if save:
        path = _outdir(ctx) / "sk.json"
        path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
        click.echo(f"wrote {path}")


@main.command("continue")
@click.option("-n", type=int, required=True, help="Number of ring charges.")
@click.option("-k", type=int, required=True, help="Bifurcation mode, 2 <= k <= n/2.")
@click.option("--family", type=click.Choice(["1", "2"]), default="1")
@click.option("--direction", type=click.Choice(["plus", "minus"]), default="plus")
@click.option("--max-points", type=int, default=120)
@click.option("--ds0", type=float, default=1e-3)
@click.option("--eps0", type=float, default=1e-4)
@click.option("--ds-min", type=float, default=1e-8)
@click.option("--ds-max", type=float, default=1e-1)
@click.option("--newton-tol", type=float, default=1e-12)
@click.option("--newton-max-iter", type=int, default=20)
@click.option("--collision-stop", type=float, default=1e-3)
@click.option("--mu-hi-factor", type=float, default=10.0)
@click.option("--spectra-every", type=int, default=1,
              help="Run the spectral stage every Nth certified point; 0 disables.")
@click.option("--parallelism", type=int, default=0)
@click.pass_context
def continue_cmd(ctx, n, k, family, direction, max_points, ds0, eps0, ds_min,
                 ds_max, newton_tol, newton_max_iter, collision_stop,
                 mu_hi_factor, spectra_every, parallelism):
    """Trace and certify one branch; writes branch, spectra and report files."""
    payload = {
        "n": n, "k": k, "family": int(family), "direction": direction,
        "max_points": max_points, "ds0": ds0, "eps0": eps0,
        "ds_min": ds_min, "ds_max": ds_max, "newton_tol": newton_tol,
        "newton_max_iter": newton_max_iter, "collision_stop": collision_stop,
        "mu_hi_factor": mu_hi_factor, "spectra_every": spectra_every,
        "parallelism": parallelism,
    }
    data = _post(ctx, "/branches/continue", payload)
    outdir = _outdir(ctx)
    prefix = data["file_prefix"]
    branch_path = outdir / f"{prefix}.branch.txt"
    branch_path.write_text(data["branch_text"])
    spectra_path = outdir / f"{prefix}.spectra.txt"
    spectra_path.write_text(data["spectra_text"])
    report_path = outdir / f"{prefix}.report.json"
    report_path.write_text(json.dumps(data["report"], indent=2, sort_keys=True) + "\n")
    counts = data["report"]["counts"]
    click.echo(f"wrote {branch_path}")
    click.echo(f"wrote {spectra_path}")
    click.echo(f"wrote {report_path}")
    click.echo(
        "points: "
        + ", ".join(f"{k_}={v}" for k_, v in counts.items())
        + f"; termination={data['report']['termination']}"
    )


@main.command()
@click.argument("branch_file", type=click.Path(exists=True, dir_okay=False))
@click.pass_context
def verify(ctx, branch_file):
    """Re-audit every stored certificate in a branch file."""
    text = Path(branch_file).read_text()
    data = _post(ctx, "/branches/verify", {"branch_text": text})
    click.echo(f"checked {data['checked']} certificates, passed {data['passed']}")
    if not data["ok"]:
        for m in data["mismatches"]:
            click.echo(f"MISMATCH: {m}", err=True)
        raise click.ClickException("re-audit failed")
    click.echo("re-audit ok")


@main.command()
@click.argument("branch_file", type=click.Path(exists=True, dir_okay=False))
@click.option("--spectra-file", type=click.Path(exists=True, dir_okay=False),
              default=None, help="Default: sibling .spectra.txt of the branch.")
@click.option("--point", type=int, default=None,
              help="Branch point for trajectories; default: last nonresonant.")
@click.option("--eps", type=float, default=0.2)
@click.option("--samples", type=int, default=128)
@click.pass_context
def plotdata(ctx, branch_file, spectra_file, point, eps, samples):
    """Export plot-ready CSVs (configurations, diagram, mode trajectories)."""
    branch_path = Path(branch_file)
    payload = {
        "branch_text": branch_path.read_text(),
        "point": point,
        "eps": eps,
        "samples": samples,
    }
    if spectra_file is None:
        sibling = branch_path.with_name(
            branch_path.name.replace(".branch.txt", ".spectra.txt")
        )
        if sibling.exists():
            spectra_file = str(sibling)
    if spectra_file:
        payload["spectra_text"] = Path(spectra_file).read_text()
    data = _post(ctx, "/branches/plotdata", payload)
    outdir = _outdir(ctx)
    stem = branch_path.name.replace(".branch.txt", "")
    for name, content in [
        (f"{stem}.configurations.csv", data["configurations_csv"]),
        (f"{stem}.diagram.csv", data["diagram_csv"]),
    ]:
        (outdir / name).write_text(content)
        click.echo(f"wrote {outdir / name}")
    for name, content in data["modes"].items():
        (outdir / f"{stem}.{name}").write_text(content)
        click.echo(f"wrote {outdir / (stem + '.' + name)}")
    for notice in data["notices"]:
        click.echo(f"notice: {notice}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host, port):
    """Run the certification service."""
    import uvicorn

    uvicorn.run("coulombcert.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
