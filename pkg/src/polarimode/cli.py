"""Command-line front end: a thin client of the HTTP service.

By default requests run against the in-process app (no server or network
needed); pass --server URL to target a running instance instead. Exit codes:
0 success/pass, 1 domain failure (invalid material, failed sum rule, ...),
2 I/O or parse failure.
"""

from __future__ import annotations

import json
import sys
import warnings
from pathlib import Path

import click
import httpx


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=300.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient
    from .service import app

    return TestClient(app)


def _fail(code: int, message: str):
    click.echo(message, err=True)
    sys.exit(code)


def _load_material(ctx) -> dict:
    path = ctx.obj.get("material")
    if not path:
        _fail(2, "error: --material PATH is required for this command")
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        _fail(2, f"error: cannot read {path}: {exc}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        _fail(2, f"error: malformed JSON in {path}: {exc}")


def _post(ctx, route: str, payload: dict) -> dict | str:
    """POST and map HTTP status to the exit-code contract."""
    client = _client(ctx.obj.get("server"))
    try:
        resp = client.post(route, json=payload)
    except httpx.HTTPError as exc:
        _fail(2, f"error: request failed: {exc}")
    if resp.status_code == 200:
        ctype = resp.headers.get("content-type", "")
        return resp.text if ctype.startswith("text/") else resp.json()
    try:
        body = json.dumps(resp.json(), sort_keys=True)
    except ValueError:
        body = resp.text
    if resp.status_code == 400:
        _fail(2, body)
    _fail(1, body)


def _emit(ctx, text: str):
    out = ctx.obj.get("out")
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _emit_json(ctx, data):
    _emit(ctx, json.dumps(data, indent=2, sort_keys=True))


def _k_values(k, kmin, kmax, count, spacing) -> list[float]:
    if k:
        return [float(v) for v in k]
    if kmin is None or kmax is None:
        _fail(2, "error: supply --k values or --kmin/--kmax")
    import numpy as np

    if spacing == "log":
        return list(np.geomspace(kmin, kmax, count))
    return list(np.linspace(kmin, kmax, count))


@click.group()
@click.option("--material", type=click.Path(), default=None,
              help="Material JSON file.")
@click.option("--out", type=click.Path(), default=None,
              help="Write output to this file instead of stdout.")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]),
              default=None, help="Output format where applicable.")
@click.option("--tolerance", type=float, default=1e-8, show_default=True,
              help="Pass/fail threshold for verification commands.")
@click.option("--server", default=None,
              help="Base URL of a running service; default is in-process.")
@click.pass_context
def main(ctx, material, out, fmt, tolerance, server):
    """Polariton dispersion and quantized-mode toolkit."""
    ctx.obj = {"material": material, "out": out, "format": fmt,
               "tolerance": tolerance, "server": server}


@main.command()
@click.pass_context
def validate(ctx):
    """Validate a material file; exit 0 iff valid."""
    data = _post(ctx, "/validate", {"material": _load_material(ctx)})
    _emit_json(ctx, data)
    if not data["valid"]:
        sys.exit(1)


@main.command()
@click.option("--k", multiple=True, type=float, help="Explicit k values.")
@click.option("--kmin", type=float, default=None)
@click.option("--kmax", type=float, default=None)
@click.option("--count", type=int, default=50, show_default=True)
@click.option("--spacing", type=click.Choice(["linear", "log"]),
              default="linear", show_default=True)
@click.pass_context
def dispersion(ctx, k, kmin, kmax, count, spacing):
    """Sweep the dispersion branches over k (CSV by default)."""
    fmt = ctx.obj.get("format") or "csv"
    payload = {
        "material": _load_material(ctx),
        "k_values": _k_values(k, kmin, kmax, count, spacing),
        "format": fmt,
    }
    data = _post(ctx, "/dispersion", payload)
    if fmt == "csv":
        _emit(ctx, data)
    else:
        _emit_json(ctx, data)


@main.command()
@click.option("--omega", multiple=True, type=float, required=True)
@click.option("--k", type=float, default=None,
              help="Wavenumber (needed when any alpha is nonzero).")
@click.pass_context
def index(ctx, omega, k):
    """Evaluate n^2(omega); negative values flag forbidden bands."""
    payload = {"material": _load_material(ctx),
               "omega_values": [float(w) for w in omega], "k": k}
    _emit_json(ctx, _post(ctx, "/index", payload))


@main.command()
@click.pass_context
def bands(ctx):
    """List the forbidden bands (one '(lo, hi)' line per band)."""
    data = _post(ctx, "/bands", {"material": _load_material(ctx)})
    if (ctx.obj.get("format") or "text") == "json":
        _emit_json(ctx, data)
    else:
        lines = [f"({b['omega_lo']:.7f}, {b['omega_hi']:.7f})"
                 for b in data["bands"]]
        _emit(ctx, "\n".join(lines) if lines else "(none)")


@main.command()
@click.pass_context
def zdp(ctx):
    """Zero-dispersion points (d^2k/domega^2 = 0) in transmission bands."""
    _emit_json(ctx, _post(ctx, "/zdp", {"material": _load_material(ctx)}))


@main.command()
@click.option("--to", "target", type=click.Choice(["sellmeir", "multipolar"]),
              required=True)
@click.pass_context
def convert(ctx, target):
    """Convert between the inverse (multipolar) and pole (Sellmeir) forms."""
    payload = {"material": _load_material(ctx), "to": target}
    data = _post(ctx, "/convert", payload)
    _emit_json(ctx, data["sellmeir"] if target == "sellmeir" else data["material"])


@main.command()
@click.option("--k", multiple=True, type=float)
@click.option("--kmin", type=float, default=None)
@click.option("--kmax", type=float, default=None)
@click.option("--count", type=int, default=10, show_default=True)
@click.option("--spacing", type=click.Choice(["linear", "log"]),
              default="log", show_default=True)
@click.option("--use-erratum-vform", is_flag=True, default=False,
              help="Diagnostic: gate the third sum rule on the "
                   "non-vanishing omega^2 variant (fails by design).")
@click.pass_context
def sumrules(ctx, k, kmin, kmax, count, spacing, use_erratum_vform):
    """Verify the commutator sum rules; exit 0 iff every k passes."""
    payload = {
        "material": _load_material(ctx),
        "k_values": _k_values(k, kmin, kmax, count, spacing),
        "tolerance": ctx.obj["tolerance"],
        "use_erratum_vform": use_erratum_vform,
    }
    data = _post(ctx, "/sumrules", payload)
    _emit_json(ctx, data)
    if not data["all_passed"]:
        sys.exit(1)


@main.command()
@click.option("--k", type=float, default=None, help="1D wavenumber.")
@click.option("--kvec", default=None,
              help="3D wave vector as 'kx,ky,kz'.")
@click.pass_context
def eigen(ctx, k, kvec):
    """Eigensystem diagnostics at one wavenumber (1D) or wave vector (3D)."""
    k_vector = None
    if kvec is not None:
        try:
            k_vector = [float(p) for p in kvec.split(",")]
        except ValueError:
            _fail(2, f"error: bad --kvec {kvec!r}; expected 'kx,ky,kz'")
    payload = {"material": _load_material(ctx), "k": k, "k_vector": k_vector}
    _emit_json(ctx, _post(ctx, "/eigen", payload))


@main.command()
@click.option("--k", multiple=True, type=float, required=True)
@click.option("--sigma", type=click.IntRange(0, 2), default=None,
              help="3D polarization (0 longitudinal, 1/2 transverse); "
                   "omit for the 1D table.")
@click.pass_context
def modes(ctx, k, sigma):
    """Quantized mode-expansion coefficient table."""
    payload = {"material": _load_material(ctx),
               "k_values": [float(v) for v in k], "sigma": sigma}
    _emit_json(ctx, _post(ctx, "/modes", payload))


@main.command()
@click.option("--pair", type=click.Choice(["lambda_pi", "p_pi",
                                           "lambda_pinu", "d_b"]),
              required=True)
@click.option("--center", type=float, default=0.0, show_default=True)
@click.option("--width", type=float, required=True,
              help="Gaussian test-function width.")
@click.option("--cutoff", type=float, required=True,
              help="k-integration cutoff.")
@click.option("--nu", type=int, default=0, show_default=True)
@click.option("--nu-prime", type=int, default=0, show_default=True)
@click.pass_context
def kernel(ctx, pair, center, width, cutoff, nu, nu_prime):
    """Smeared equal-time commutator kernel reconstruction."""
    payload = {"material": _load_material(ctx), "pair": pair,
               "center": center, "width": width, "cutoff": cutoff,
               "nu": nu, "nu_prime": nu_prime}
    _emit_json(ctx, _post(ctx, "/kernel", payload))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service with uvicorn."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
