"""Thin command-line client for the creditbench service.

By default commands talk to an in-process instance of the FastAPI app over
an ASGI transport (no network); ``--server`` points them at a remote
deployment instead.  Exit codes: 0 success, 1 configuration error,
2 runtime failure.
"""
from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=None)
    from .service import app  # deferred: keeps --help fast

    return httpx.Client(transport=httpx.ASGITransport(app=app), base_url="http://creditbench.local", timeout=None)


def _load_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        click.echo(f"error: file not found: {path}", err=True)
        sys.exit(EXIT_CONFIG)
    except json.JSONDecodeError as exc:
        click.echo(f"error: invalid JSON in {path}: {exc}", err=True)
        sys.exit(EXIT_CONFIG)


def _fail_from_response(resp: httpx.Response, exit_code: int) -> None:
    try:
        detail = resp.json().get("detail", resp.text)
    except Exception:
        detail = resp.text
    click.echo(f"error: {detail}", err=True)
    sys.exit(exit_code)


@click.group()
def main() -> None:
    """Benchmark credit-default classifiers under class imbalance."""


@main.command()
@click.argument("config_path", metavar="CONFIG")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
def validate(config_path: str, server: str | None) -> None:
    """Validate a run configuration."""
    payload = {"config": _load_json(config_path)}
    with _client(server) as client:
        resp = client.post("/config/validate", json=payload)
    if resp.status_code != 200:
        _fail_from_response(resp, EXIT_RUNTIME)
    body = resp.json()
    if body["valid"]:
        click.echo("configuration valid")
        sys.exit(EXIT_OK)
    for err in body["errors"]:
        click.echo(f"config error: {err}", err=True)
    sys.exit(EXIT_CONFIG)


@main.command()
@click.argument("config_path", metavar="CONFIG")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
@click.option("--out", "out_dir", default=None, help="Override the config's output_dir.")
def run(config_path: str, server: str | None, out_dir: str | None) -> None:
    """Execute the full benchmark grid and write result files."""
    config = _load_json(config_path)
    with _client(server) as client:
        check = client.post("/config/validate", json={"config": config})
        if check.status_code != 200:
            _fail_from_response(check, EXIT_RUNTIME)
        if not check.json()["valid"]:
            for err in check.json()["errors"]:
                click.echo(f"config error: {err}", err=True)
            sys.exit(EXIT_CONFIG)
        resp = client.post("/run", json={"config": config})
    if resp.status_code == 422:
        _fail_from_response(resp, EXIT_CONFIG)
    if resp.status_code != 200:
        _fail_from_response(resp, EXIT_RUNTIME)
    body = resp.json()
    target = Path(out_dir or config.get("output_dir", "."))
    target.mkdir(parents=True, exist_ok=True)
    (target / "records.csv").write_text(body["records_csv"], encoding="utf-8")
    (target / "timings.csv").write_text(body["timings_csv"], encoding="utf-8")
    for sampler, rep in body["reports"].items():
        (target / f"report_{sampler}.md").write_text(rep["markdown"], encoding="utf-8")
        (target / f"report_{sampler}.csv").write_text(rep["csv"], encoding="utf-8")
    if body["sampler_comparison_csv"] is not None:
        (target / "sampler_comparison.csv").write_text(body["sampler_comparison_csv"], encoding="utf-8")
    (target / "provenance.txt").write_text(body["provenance"], encoding="utf-8")
    for err in body["errors"]:
        click.echo(f"cell error: {err}", err=True)
    click.echo(f"wrote results to {target}")
    sys.exit(EXIT_OK)


@main.command()
@click.argument("records_path", metavar="RECORDS_CSV")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
@click.option("--out", "out_dir", default=".", help="Directory for the rendered tables.")
@click.option("--metrics", "metrics_csv", default=None,
              help="Comma-separated metric subset (default: all six).")
def report(records_path: str, server: str | None, out_dir: str, metrics_csv: str | None) -> None:
    """Render rank tables from a records file."""
    try:
        text = Path(records_path).read_text(encoding="utf-8")
    except FileNotFoundError:
        click.echo(f"error: file not found: {records_path}", err=True)
        sys.exit(EXIT_CONFIG)
    payload: dict = {"records_csv": text}
    if metrics_csv:
        payload["metrics"] = [m.strip() for m in metrics_csv.split(",") if m.strip()]
    with _client(server) as client:
        resp = client.post("/report", json=payload)
    if resp.status_code == 422:
        _fail_from_response(resp, EXIT_CONFIG)
    if resp.status_code != 200:
        _fail_from_response(resp, EXIT_RUNTIME)
    body = resp.json()
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    for sampler, rep in body["reports"].items():
        (target / f"report_{sampler}.md").write_text(rep["markdown"], encoding="utf-8")
        (target / f"report_{sampler}.csv").write_text(rep["csv"], encoding="utf-8")
    if body["sampler_comparison_csv"] is not None:
        (target / "sampler_comparison.csv").write_text(body["sampler_comparison_csv"], encoding="utf-8")
    click.echo(f"wrote report tables to {target}")
    sys.exit(EXIT_OK)


@main.command()
@click.argument("predictions_path", metavar="PREDICTIONS_CSV")
@click.option("--server", default=None, help="Remote service URL (default: in-process).")
@click.option("--train-good-rate", type=float, default=None,
              help="Good share used to calibrate the cutoff (default: observed).")
def metrics(predictions_path: str, server: str | None, train_good_rate: float | None) -> None:
    """Evaluate the six measures on a standalone prediction file."""
    from .metrics import read_predictions

    try:
        ids, scores, labels = read_predictions(predictions_path)
    except FileNotFoundError:
        click.echo(f"error: file not found: {predictions_path}", err=True)
        sys.exit(EXIT_CONFIG)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    payload = {
        "predictions": [
            {"row_id": i, "score": float(s), "label": int(l)}
            for i, s, l in zip(ids, scores, labels)
        ],
        "train_good_rate": train_good_rate,
    }
    with _client(server) as client:
        resp = client.post("/metrics", json=payload)
    if resp.status_code == 422:
        _fail_from_response(resp, EXIT_CONFIG)
    if resp.status_code != 200:
        _fail_from_response(resp, EXIT_RUNTIME)
    body = resp.json()
    for name, value in body["metrics"].items():
        click.echo(f"{name}: {value:.6f}")
    click.echo(f"threshold: {body['threshold']:.6f}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--out", "out_dir", default="data", help="Directory for the CSVs and demo config.")
@click.option("--seed", default=20240801, show_default=True, help="Generator seed.")
def simulate(out_dir: str, seed: int) -> None:
    """Write the four simulated reference datasets and a demo run config."""
    from .simdata import write_reference_quartet

    paths = write_reference_quartet(out_dir, seed=seed)
    config = {
        "seed": 20240801,
        "output_dir": str(Path(out_dir) / "results"),
        "parallelism": 4,
        "datasets": [
            {"name": "GC", "path": str(paths["GC"]), "schema": "german_credit",
             "subset_fraction": 1.0, "seed": 11},
            {"name": "AC", "path": str(paths["AC"]), "schema": "australian_credit",
             "subset_fraction": 1.0, "seed": 12},
            {"name": "TC", "path": str(paths["TC"]), "schema": "taiwan_credit",
             "subset_fraction": 0.10, "seed": 13},
            {"name": "GMSC", "path": str(paths["GMSC"]), "schema": "gmsc",
             "subset_fraction": 0.05, "seed": 14},
        ],
        "samplers": [{"kind": k} for k in ("none", "down", "up", "smote", "rose", "bsmote")],
        "models": [{"family": f} for f in (
            "logreg", "lda", "qda", "gaussian_nb", "knn", "cart", "bagged_cart",
            "random_forest", "adaboost", "sgb", "avg_simple", "avg_weighted", "stacking",
        )],
    }
    config_path = Path(out_dir) / "benchmark_config.json"
    config_path.write_text(json.dumps(config, indent=2), encoding="utf-8")
    click.echo(f"wrote {', '.join(str(p) for p in paths.values())}")
    click.echo(f"wrote {config_path}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("creditbench.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
