"""Command-line client for the triple-tree service.

Every subcommand builds the same request models the HTTP service consumes
and executes them in-process by default; --server re-routes the request to
a running instance.  Outputs are CSV for tables and JSON for structures,
all carrying the ttlab/1 format header.  Exit codes: 0 success,
2 validation failure, 3 resource cap, 4 parse error.
"""

from __future__ import annotations

import json
import math
import sys

import click

from . import FORMAT_VERSION
from . import service as svc
from .complexes import DegenerateSize, MembershipFailed
from .enumeration import EnumerationCapExceeded, bounds_report, enumerate_Mn
from .planar import TripleRejected

EXIT_VALIDATION = 2
EXIT_CAP = 3
EXIT_PARSE = 4


def _dispatch(endpoint: str, fn, req, server: str | None):
    if server is None:
        return fn(req).model_dump()
    import httpx

    response = httpx.post(
        server.rstrip("/") + endpoint, json=req.model_dump(), timeout=600.0
    )
    if response.status_code == 413:
        raise EnumerationCapExceeded(response.text)
    if response.status_code == 422:
        raise MembershipFailed([response.text])
    response.raise_for_status()
    return response.json()


def _fail(code: int, message: str):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(run):
    try:
        return run()
    except EnumerationCapExceeded as exc:
        _fail(EXIT_CAP, str(exc))
    except (TripleRejected, MembershipFailed, DegenerateSize) as exc:
        _fail(EXIT_VALIDATION, str(exc))
    except (json.JSONDecodeError, KeyError) as exc:
        _fail(EXIT_PARSE, f"cannot parse input: {exc}")
    except ValueError as exc:
        _fail(EXIT_PARSE, str(exc))


def _load_json(path: str) -> dict:
    with open(path) as fh:
        return json.load(fh)


def _write_json(path: str | None, data: dict):
    text = json.dumps(data, indent=2, sort_keys=True)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")
    else:
        click.echo(text)


@click.group()
def main():
    """Triple trees: enumeration, 3-sphere bijections, certificates, sampling."""


@main.command()
@click.option("--n", type=int, required=True, help="Size of the triple trees.")
@click.option("--max-n", type=int, default=None, help="Also enumerate all sizes up to this.")
@click.option("--extended", is_flag=True, help="Allow the long n=8 run (local only).")
@click.option("--out", type=click.Path(), default=None, help="CSV output path.")
@click.option("--server", default=None, help="Base URL of a running service.")
def enumerate(n, max_n, extended, out, server):
    """Exact coefficients of the size-n generating polynomial."""

    def run():
        sizes = range(n, (max_n or n) + 1)
        lines = ["# ttlab/1", "n,x_power,count"] if out else None
        for size in sizes:
            data = _dispatch(
                "/enumerate",
                svc.do_enumerate,
                svc.EnumerateRequest(n=size, extended=extended),
                server,
            )
            if out:
                for c in data["coefficients"]:
                    lines.append(f"{size},{c['x_power']},{c['count']}")
            else:
                click.echo("# ttlab/1")
                for c in data["coefficients"]:
                    click.echo(f"{c['count']},{c['x_power']}")
        if out:
            with open(out, "w") as fh:
                fh.write("\n".join(lines) + "\n")

    _guard(run)


@main.command()
@click.option("--family", type=click.Choice(["H", "A", "M"]), required=True)
@click.option("--order", type=int, required=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--server", default=None)
def series(family, order, out, server):
    """Generating-series coefficients for one of the three families."""

    def run():
        data = _dispatch(
            "/series", svc.do_series, svc.SeriesRequest(family=family, order=order), server
        )
        if family == "M":
            if out:
                _write_json(out, data)
            else:
                click.echo("# ttlab/1")
                for row in data["coefficients"]:
                    coeffs = ",".join(
                        f"{v}x^{k}" for k, v in sorted(row["coefficients"].items())
                    )
                    click.echo(f"n={row['n']}: {coeffs or '0'}")
            return
        coeffs = data["coefficients"]
        if out:
            with open(out, "w") as fh:
                fh.write("# ttlab/1\norder,count\n")
                for k, v in list(enumerate(coeffs)):
                    fh.write(f"{k},{v}\n")
        else:
            click.echo("# ttlab/1")
            click.echo(",".join(str(v) for v in coeffs[1:]))
            if data.get("growth_constant"):
                click.echo(f"# growth constant {data['growth_constant']:.6f}")

    _guard(run)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--server", default=None)
def verify(input_path, server):
    """Membership verdict for a decorated 3D triangulation (JSON)."""

    def run():
        payload = _load_json(input_path)
        data = _dispatch(
            "/verify", svc.do_verify, svc.VerifyRequest(triangulation=payload), server
        )
        click.echo("# ttlab/1")
        click.echo("OK" if data["ok"] else "FAIL " + ",".join(data["diagnostics"]))
        if not data["ok"]:
            sys.exit(EXIT_VALIDATION)

    _guard(run)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--server", default=None)
def build3d(input_path, out, server):
    """Build the decorated 3D triangulation of a triple tree (JSON)."""

    def run():
        payload = _load_json(input_path)
        data = _dispatch(
            "/build3d", svc.do_build3d, svc.Build3DRequest(triple=payload), server
        )
        _write_json(out, data["triangulation"])

    _guard(run)


@main.command()
@click.option("--input", "input_path", type=click.Path(exists=True), required=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--server", default=None)
def certify(input_path, out, server):
    """Tree-avoiding construction plus Morse gradient for a triangulation."""

    def run():
        payload = _load_json(input_path)
        data = _dispatch(
            "/certify", svc.do_certify, svc.CertifyRequest(triangulation=payload), server
        )
        _write_json(out, {"format": FORMAT_VERSION, **data})

    _guard(run)


@main.command()
@click.option("--x", type=float, default=1.0)
@click.option("--window", default="2,7", help="Size window a,b.")
@click.option("--steps", type=int, default=100000)
@click.option("--seed", type=int, default=0)
@click.option("--free-run", is_flag=True, help="No exact restarts (windows beyond the cap).")
@click.option("--curve", is_flag=True, help="Emit a qualitative z-star curve over x.")
@click.option("--out", type=click.Path(), default=None)
@click.option("--server", default=None)
def sample(x, window, steps, seed, free_run, curve, out, server):
    """Monte Carlo histogram over (size, loops), with growth estimates."""

    def run():
        a, b = (int(v) for v in window.split(","))
        if curve:
            from .sampler import z_star_curve

            xs = [math.exp(k / 2) for k in range(-3, 4)]
            rows = z_star_curve(xs, n_max=b, steps=steps, seed=seed)
            lines = ["# ttlab/1", "x,z_star,error"]
            for row in rows:
                lines.append(
                    f"{row['x']:.6f},{row['z_star'] if row['z_star'] is not None else ''},"
                    f"{row['error'] if row['error'] is not None else ''}"
                )
            text = "\n".join(lines) + "\n"
            if out:
                with open(out, "w") as fh:
                    fh.write(text)
            else:
                click.echo(text, nl=False)
            return
        req = svc.SampleRequest(
            x=x, n_min=a, n_max=b, steps=steps, seed=seed, calibrated=not free_run
        )
        data = _dispatch("/sample", svc.do_sample, req, server)
        lines = ["# ttlab/1", "n,loops,visits,f"]
        for row in data["histogram"]:
            lines.append(f"{row['n']},{row['loops']},{row['visits']},{row['f']!r}")
        text = "\n".join(lines) + "\n"
        if out:
            with open(out, "w") as fh:
                fh.write(text)
            summary_path = out + ".summary.json"
            _write_json(
                summary_path,
                {
                    "format": FORMAT_VERSION,
                    "seed": seed,
                    "x": x,
                    "ratios": data["ratios"],
                    "z_star": data["z_star"],
                    "z_star_error": data["z_star_error"],
                    "coverage": data["coverage"],
                },
            )
        else:
            click.echo(text, nl=False)
            click.echo(f"# ratios {data['ratios']}")
            click.echo(f"# z_star {data['z_star']} +- {data['z_star_error']}")
            click.echo(f"# coverage {data['coverage']}")

    _guard(run)


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--out", type=click.Path(), default=None)
@click.option("--server", default=None)
def catalog(n, out, server):
    """Dump all triple trees of one size with their loop counts."""

    def run():
        data = _dispatch("/catalog", svc.do_catalog, svc.CatalogRequest(n=n), server)
        if out:
            _write_json(out, data)
        else:
            click.echo("# ttlab/1")
            for entry in data["entries"]:
                click.echo(
                    f"{entry['t']}\t{entry['pi_h']}\t{entry['pi_a']}\t{entry['loops']}"
                )
            click.echo(f"# total {len(data['entries'])} loop_counts {data['loop_counts']}")

    _guard(run)


@main.command()
@click.option("--n", type=int, required=True)
@click.option("--extended", is_flag=True)
def bounds(n, extended):
    """Finite-size exponential bounds for one size."""

    def run():
        report = enumerate_Mn(n, extended=extended)
        _write_json(None, bounds_report(n, report))

    _guard(run)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8008)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run(svc.app, host=host, port=port)


if __name__ == "__main__":
    main()
