"""Multi-trial studies.

Trials run independently (optionally in worker processes) and return their
results; every file is written afterwards by the coordinating process. The
stages after training form a linear graph: prepare -> train -> write_trials ->
aggregate -> infer -> finish.
"""
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from pathlib import Path
from typing import Dict, List, Optional, Sequence, TypedDict, Union

import numpy as np
from langgraph.graph import StateGraph
from loguru import logger
from pydantic import BaseModel, ConfigDict, Field

from app.core.errors import NonFiniteLossError, QganError
from app.core.logging import configure_logging
from app.models.metrics import StudySummary
from app.models.run import ModelKind, RunManifest, TrialArtifact, TrialOutcome, TrialRun
from app.models.shower import DatasetStats, ShowerImage
from app.models.training import HybridConfig, HybridResult, SpsaConfig, TrainConfig
from app.services.data import compute_stats, save_csv
from app.services.exporter import (
    export_aggregate_csv,
    export_average_images_csv,
    export_curves_csv,
    export_records_jsonl,
)
from app.services.hybrid import train_hybrid
from app.services.metrics import aggregate_trials, average_image, mse_between
from app.services.qgan import generate_images, train_full_qgan
from app.storage.repo import MANIFEST_FILE, build_id, save_params, write_manifest

TrialConfig = Union[TrainConfig, HybridConfig]


class StudyConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    model: ModelKind
    config: TrialConfig
    spsa: SpsaConfig = SpsaConfig()
    trials: int = Field(1, ge=1)
    jobs: int = Field(1, ge=1)
    seed: int = 0
    log_level: str = "INFO"
    train_source: Optional[str] = None
    test_source: Optional[str] = None

    def trial_seed(self, trial: int) -> int:
        return self.seed + trial

    def trial_config(self, trial: int) -> TrialConfig:
        return self.config.model_copy(update={"seed": self.trial_seed(trial)})


def run_trial(
    model: ModelKind,
    trial: int,
    cfg: TrialConfig,
    spsa: SpsaConfig,
    train_set: Sequence[ShowerImage],
    stats: DatasetStats,
) -> TrialRun:
    """Train one trial; a non-finite loss aborts this trial only."""
    log = logger.bind(trial=trial)
    log.info("trial {} started (seed {})", trial, cfg.seed)
    try:
        if model is ModelKind.FULL:
            result = train_full_qgan(train_set, cfg, spsa, stats)
        else:
            result = train_hybrid(train_set, model.mlp_size, cfg, spsa, stats)
    except NonFiniteLossError as e:
        log.warning("trial {} aborted: {}", trial, e)
        return TrialRun(trial=trial, seed=cfg.seed, error=str(e))
    log.info("trial {} finished: final mse={:.4e}", trial, result.mse_curve[-1].mse)
    return TrialRun(trial=trial, seed=cfg.seed, result=result)


def run_trials(study: StudyConfig, train_set: Sequence[ShowerImage], stats: DatasetStats) -> List[TrialRun]:
    args = [
        (study.model, i, study.trial_config(i), study.spsa, list(train_set), stats)
        for i in range(study.trials)
    ]
    if study.jobs == 1 or study.trials == 1:
        return [run_trial(*a) for a in args]
    workers = min(study.jobs, study.trials)
    logger.info("running {} trials on {} worker processes", study.trials, workers)
    # spawn, not fork: graph nodes may run on a worker thread
    ctx = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(
        max_workers=workers, mp_context=ctx, initializer=configure_logging, initargs=(study.log_level,)
    ) as pool:
        futures = [pool.submit(run_trial, *a) for a in args]
        return [f.result() for f in futures]


def _artifact(study: StudyConfig, run: TrialRun, stats: DatasetStats) -> TrialArtifact:
    result = run.result
    if isinstance(result, HybridResult):
        gen, disc = result.gen, result.weights
    else:
        gen, disc = result.params.gen, result.params.disc
    return TrialArtifact(model=study.model, trial=run.trial, seed=run.seed, gen=gen, disc=disc, stats=stats)


class StudyState(TypedDict, total=False):
    study: StudyConfig
    train_set: Sequence[ShowerImage]
    test_set: Optional[Sequence[ShowerImage]]
    run_dir: Path
    write_data: bool
    stats: DatasetStats
    layout: Dict[str, str]
    runs: List[TrialRun]
    manifest: RunManifest
    best: TrialRun
    summary: StudySummary


def node_prepare(state: StudyState) -> dict:
    study, run_dir = state["study"], state["run_dir"]
    logger.info("Step 1/4: {} x {} trials, {} epochs", study.model.value, study.trials, study.config.epochs)
    run_dir.mkdir(parents=True, exist_ok=True)
    layout: Dict[str, str] = {}
    if state.get("write_data"):
        layout["train_data"] = str(save_csv(state["train_set"], run_dir / "data" / "train.csv").relative_to(run_dir))
        if state.get("test_set"):
            layout["test_data"] = str(save_csv(state["test_set"], run_dir / "data" / "test.csv").relative_to(run_dir))
    return {"stats": compute_stats(state["train_set"]), "layout": layout}


def node_train(state: StudyState) -> dict:
    return {"runs": run_trials(state["study"], state["train_set"], state["stats"])}


def node_write_trials(state: StudyState) -> dict:
    study, run_dir, stats = state["study"], state["run_dir"], state["stats"]
    logger.info("Step 2/4: writing trial artifacts")
    outcomes: List[TrialOutcome] = []
    for run in state["runs"]:
        if not run.ok:
            outcomes.append(TrialOutcome(trial=run.trial, seed=run.seed, status="aborted", error=run.error))
            continue
        trial_dir = f"trial_{run.trial:02d}"
        params_path = f"{trial_dir}/params.json"
        curves_path = f"{trial_dir}/curves.csv"
        save_params(run_dir / params_path, _artifact(study, run, stats))
        export_curves_csv(run_dir / curves_path, run.result.losses, run.result.mse_curve)
        outcomes.append(
            TrialOutcome(
                trial=run.trial,
                seed=run.seed,
                status="ok",
                final_mse=run.result.mse_curve[-1].mse,
                files=[params_path, curves_path],
            )
        )
    manifest = RunManifest(
        run_id=run_dir.name,
        model=study.model,
        created_at=datetime.now(),
        build=build_id(),
        config={
            "trial": study.config.model_dump(mode="json"),
            "spsa": study.spsa.model_dump(mode="json"),
            "trials": study.trials,
            "jobs": study.jobs,
            "train_source": study.train_source,
            "test_source": study.test_source,
        },
        seeds=[study.trial_seed(i) for i in range(study.trials)],
        layout=state["layout"],
        trials=outcomes,
    )
    return {"manifest": manifest}


def node_aggregate(state: StudyState) -> dict:
    run_dir = state["run_dir"]
    ok = [r for r in state["runs"] if r.ok]
    if not ok:
        write_manifest(run_dir, state["manifest"])
        raise QganError(f"all {state['study'].trials} trials aborted; see {run_dir / MANIFEST_FILE}")
    logger.info("Step 3/4: aggregating {} completed trials", len(ok))
    trial_stats = aggregate_trials([r.result.mse_curve for r in ok])
    best = ok[trial_stats.best_trial]
    layout = {**state["layout"], "aggregate": "aggregate.csv"}
    export_aggregate_csv(run_dir / layout["aggregate"], trial_stats)
    summary = trial_stats.final_summary().model_copy(update={"best_trial": best.trial})
    return {"best": best, "summary": summary, "layout": layout}


def node_infer(state: StudyState) -> dict:
    test_set, best = state.get("test_set"), state["best"]
    if not test_set:
        logger.info("Step 4/4: no test set, skipping best-trial inference")
        return {"summary": state["summary"]}
    logger.info("Step 4/4: best trial {} generating {} images", best.trial, len(test_set))
    study, run_dir = state["study"], state["run_dir"]
    result = best.result
    gen = result.gen if isinstance(result, HybridResult) else result.params.gen
    cfg = study.config
    # stream distinct from every training stream of the trial
    rng = np.random.default_rng(np.random.SeedSequence([study.seed, best.trial, 1]))
    images = generate_images(gen, len(test_set), state["stats"], cfg.shots, cfg.exact_mode, rng)
    layout = {**state["layout"], "best_generated": "best_generated.csv", "best_average": "best_average.csv"}
    save_csv(images, run_dir / layout["best_generated"])
    export_average_images_csv(run_dir / layout["best_average"], average_image(images), average_image(test_set))
    summary = state["summary"].model_copy(update={"test_mse": mse_between(images, test_set)})
    return {"summary": summary, "layout": layout}


def node_finish(state: StudyState) -> dict:
    run_dir, summary = state["run_dir"], state["summary"]
    layout = {**state["layout"], "summary": "summary.jsonl"}
    export_records_jsonl(run_dir / layout["summary"], [summary])
    manifest = state["manifest"].model_copy(update={"layout": layout})
    missing = [p for p in manifest.files() if not (run_dir / p).is_file()]
    if missing:
        raise QganError(f"artifacts missing after write: {', '.join(missing)}")
    write_manifest(run_dir, manifest)
    logger.info(
        "study finished: mean final mse={:.4e} +/- {:.4e}, best trial {} at {:.4e}",
        summary.mean_final_mse,
        summary.std_final_mse,
        summary.best_trial,
        summary.best_final_mse,
    )
    return {"manifest": manifest, "layout": layout}


def build_graph():
    builder = StateGraph(StudyState)

    builder.add_node("prepare", node_prepare)
    builder.add_node("train", node_train)
    builder.add_node("write_trials", node_write_trials)
    builder.add_node("aggregate", node_aggregate)
    builder.add_node("infer", node_infer)
    builder.add_node("finish", node_finish)

    builder.set_entry_point("prepare")
    builder.add_edge("prepare", "train")
    builder.add_edge("train", "write_trials")
    builder.add_edge("write_trials", "aggregate")
    builder.add_edge("aggregate", "infer")
    builder.add_edge("infer", "finish")
    builder.set_finish_point("finish")

    return builder.compile()


graph = build_graph()


def execute_study(
    study: StudyConfig,
    train_set: Sequence[ShowerImage],
    run_dir: Union[str, Path],
    test_set: Optional[Sequence[ShowerImage]] = None,
    write_data: bool = False,
) -> RunManifest:
    """Run all trials, write per-trial and aggregate artifacts, and return the manifest."""
    final = graph.invoke(
        {
            "study": study,
            "train_set": list(train_set),
            "test_set": list(test_set) if test_set else None,
            "run_dir": Path(run_dir),
            "write_data": write_data,
        }
    )
    return final["manifest"]
