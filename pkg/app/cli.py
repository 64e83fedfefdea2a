"""Command-line entry point: `python -m app.cli <command>`."""
from contextlib import contextmanager
from pathlib import Path
from typing import Iterator, Optional

import typer
from loguru import logger

from app.core.config import Settings, check_keys, layered, load_config_file, pick
from app.core.errors import InvalidInputError, QganError
from app.core.logging import configure_logging
from app.models.run import ModelKind
from app.models.training import HybridConfig, SpsaConfig, TrainConfig
from app.orchestration.study import StudyConfig, execute_study
from app.services.data import load_csv, load_profile, save_csv, synth_dataset
from app.services.exporter import export_average_images_csv, export_records_jsonl
from app.services.inference import ShowerService
from app.storage.repo import new_run_dir

shower_service = ShowerService()

TEST_SEED_OFFSET = 10_000
DEFAULT_DATASET_SIZE = 1000

app = typer.Typer(add_completion=False, no_args_is_help=True, help="Quantum GAN for 8-pixel calorimeter showers.")


@contextmanager
def stage(name: str) -> Iterator[None]:
    """Turn expected failures into exit code 1 with a message naming the stage."""
    try:
        yield
    except (QganError, ValueError, OSError) as e:
        logger.error("[{}] {}", name, e)
        typer.echo(f"[{name}] failed: {e}", err=True)
        raise typer.Exit(code=1)


@app.callback()
def main(
    ctx: typer.Context,
    log_level: Optional[str] = typer.Option(None, "--log-level", help="DEBUG, INFO, WARNING, ..."),
    log_json: Optional[bool] = typer.Option(None, "--log-json/--no-log-json", help="JSON-lines log records"),
) -> None:
    s = Settings()
    level = log_level or s.log_level
    configure_logging(level, s.log_json if log_json is None else log_json)
    ctx.obj = {"log_level": level}


@app.command("gen-data")
def gen_data(
    n: int = typer.Option(DEFAULT_DATASET_SIZE, "--n", help="Number of images"),
    seed: int = typer.Option(0, "--seed"),
    out: Path = typer.Option(..., "--out", help="Output CSV"),
    profile_file: Optional[Path] = typer.Option(None, "--profile-file", help="CSV with mean,std per pixel"),
) -> None:
    """Write synthetic shower images as CSV."""
    with stage("gen-data"):
        images = synth_dataset(n, seed, load_profile(profile_file))
        path = save_csv(images, out)
        logger.info("wrote {} images to {}", len(images), path)
        typer.echo(str(path))


@app.command()
def train(
    ctx: typer.Context,
    model: ModelKind = typer.Option(ModelKind.FULL, "--model", case_sensitive=False),
    train_csv: Optional[Path] = typer.Option(None, "--train-csv", help="Training images; synthesized when omitted"),
    test_csv: Optional[Path] = typer.Option(None, "--test-csv", help="Test images for best-trial inference"),
    epochs: Optional[int] = typer.Option(None, "--epochs"),
    trials: Optional[int] = typer.Option(None, "--trials"),
    exact: Optional[bool] = typer.Option(None, "--exact/--shot-mode", help="Exact probabilities instead of shots"),
    shots: Optional[int] = typer.Option(None, "--shots"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Base seed; trial i uses seed + i"),
    out: Optional[Path] = typer.Option(None, "--out", help="Run directory (default: $QGAN_OUT_DIR/<model>-<time>)"),
    jobs: Optional[int] = typer.Option(None, "--jobs", help="Parallel trial processes"),
    config: Optional[Path] = typer.Option(None, "--config", help="key=value hyperparameter file"),
    profile_file: Optional[Path] = typer.Option(None, "--profile-file", help="Profile for synthesized data"),
) -> None:
    """Train one or more trials and write curves, parameters and the run manifest."""
    s = Settings()
    with stage("train"):
        file_values = load_config_file(str(config) if config else None)
        file_trials = file_values.pop("trials", None)
        file_jobs = file_values.pop("jobs", None)
        n_trials = trials if trials is not None else int(file_trials or 1)
        n_jobs = jobs if jobs is not None else int(file_jobs or s.jobs)
        cfg_cls = TrainConfig if model is ModelKind.FULL else HybridConfig
        check_keys(file_values, cfg_cls, SpsaConfig)
        if seed is None and "seed" not in file_values:
            seed = s.seed
        cfg = layered(
            cfg_cls,
            pick(cfg_cls, file_values),
            {"epochs": epochs, "exact_mode": exact, "shots": shots, "seed": seed},
        )
        spsa = layered(SpsaConfig, pick(SpsaConfig, file_values), {})

        if train_csv is None:
            if test_csv is not None:
                raise InvalidInputError("--test-csv needs --train-csv")
            profile = load_profile(profile_file)
            train_set = synth_dataset(DEFAULT_DATASET_SIZE, cfg.seed, profile)
            test_set = synth_dataset(DEFAULT_DATASET_SIZE, cfg.seed + TEST_SEED_OFFSET, profile)
        else:
            train_set = load_csv(train_csv)
            test_set = load_csv(test_csv) if test_csv else None

        study = StudyConfig(
            model=model,
            config=cfg,
            spsa=spsa,
            trials=n_trials,
            jobs=n_jobs,
            seed=cfg.seed,
            log_level=(ctx.obj or {}).get("log_level", s.log_level),
            train_source=str(train_csv) if train_csv else "synthetic",
            test_source=str(test_csv) if test_csv else ("synthetic" if train_csv is None else None),
        )
        run_dir = out or new_run_dir(model, s.out_dir)
        manifest = execute_study(study, train_set, run_dir, test_set, write_data=train_csv is None)
        aborted = sum(1 for t in manifest.trials if t.status != "ok")
        if aborted:
            typer.echo(f"{aborted} of {n_trials} trials aborted (see manifest)", err=True)
        typer.echo(str(run_dir))


@app.command()
def infer(
    params: Path = typer.Option(..., "--params", help="Trial params.json"),
    n: int = typer.Option(DEFAULT_DATASET_SIZE, "--n"),
    shots: int = typer.Option(1024, "--shots"),
    exact: bool = typer.Option(False, "--exact", help="Decode exact probabilities"),
    seed: int = typer.Option(0, "--seed"),
    out: Path = typer.Option(..., "--out", help="Output CSV"),
) -> None:
    """Generate images from a trained generator."""
    with stage("infer"):
        images = shower_service.generate(params, n, shots, exact, seed)
        path = save_csv(images, out)
        typer.echo(str(path))


@app.command("eval")
def evaluate(
    generated_csv: Path = typer.Option(..., "--generated-csv"),
    reference_csv: Path = typer.Option(..., "--reference-csv"),
    out: Path = typer.Option(..., "--out", help="Report directory"),
) -> None:
    """Average-image MSE between two image files."""
    with stage("eval"):
        generated, reference = shower_service.load_pair(generated_csv, reference_csv)
        report = shower_service.evaluate(generated, reference)
        result = report.mse
        export_records_jsonl(
            out / "metrics.jsonl",
            [
                {
                    "record": "mse",
                    "mse": result.mse,
                    "std": result.std,
                    "generated": str(generated_csv),
                    "reference": str(reference_csv),
                    "n_generated": len(generated),
                    "n_reference": len(reference),
                }
            ],
        )
        export_average_images_csv(out / "pixels.csv", report.generated_average, report.reference_average)
        typer.echo(f"mse={result.mse:.6e} std={result.std:.6e}")


@app.command()
def serve(
    host: str = typer.Option("0.0.0.0", "--host"),
    port: int = typer.Option(8000, "--port"),
) -> None:
    """Run the HTTP API."""
    import uvicorn

    uvicorn.run("app.main:app", host=host, port=port)


if __name__ == "__main__":
    app()
