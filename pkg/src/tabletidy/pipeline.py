"""End-to-end orchestration: scene in, plan and artifacts out.

Stage order: prompting -> goal_provider -> matching -> registration ->
layout -> planning -> simulate. Every stage appends audit records; the audit
log alone is enough to replay the matching and registration decisions. All
outputs are byte-deterministic for a fixed scene, config, and seed.
"""
from __future__ import annotations

import json
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

from .errors import IoFailure, PipelineStageError, TableTidyError
from .evaluation import (
    EvalBundle,
    ErrorSummary,
    baseline_geometric_missing,
    baseline_random,
    evaluate_method,
    fixed_objects_layout,
    held_out_scene,
)
from .layout import (
    Layout,
    LayoutEntry,
    layout_from_scene,
    resolve_collisions,
    scale_normalize,
)
from .masks import mask_centroid, mask_crop_to_bbox
from .matching import GoalSelection, select_goal
from .planning import PickPlacePlan, SimReport, plan_moves, simulate
from .prompting import (
    DEFAULT_SUFFIX,
    STOP_NOUNS,
    Prompt,
    build_prompt,
    compose_fixed_objects_mask,
    compose_inpaint_mask,
    extract_class_noun,
)
from .prompting import scene_prompt as build_scene_prompt
from .providers import GenerationRequest, GoalProvider, make_provider, sample_until_valid
from .registration import IcpConfig, align_object_masks
from .render import render_layout
from .scene import SceneDescription, load_scene
from .transforms import Pose2D

ProviderFactory = Callable[[], GoalProvider]


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs for one pipeline run; all defaults are safe for the fixtures."""

    provider: str = "synthetic:place-setting"
    batch_size: int = 4
    max_batches: int = 5
    seed: int = 0
    prompt_suffix: str = DEFAULT_SUFFIX
    # re-derive class nouns from captions instead of trusting the scene file
    nouns_from_captions: bool = False
    stop_nouns: tuple = ()
    contour_thickness: float = 3.0
    movable_dilation: float = 7.0
    icp_max_iter: int = 60
    icp_tol: float = 1e-3
    icp_restarts: int = 8
    margin: float = 2.0
    step: float = 2.0
    layout_max_iter: int = 500
    render_markers: bool = True

    def __post_init__(self):
        object.__setattr__(self, "stop_nouns", tuple(self.stop_nouns))

    def icp_config(self) -> IcpConfig:
        return IcpConfig(max_iter=self.icp_max_iter, tol=self.icp_tol,
                         restarts=self.icp_restarts)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, doc: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def load(cls, path: str | Path) -> "PipelineConfig":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


class AuditLog:
    """Ordered stage records, serializable as JSON lines."""

    def __init__(self):
        self.records: list[dict] = []

    def add(self, stage: str, event: str, **payload) -> None:
        self.records.append({"stage": stage, "event": event, **payload})

    def write(self, path: str | Path) -> None:
        lines = [json.dumps(r, sort_keys=True) for r in self.records]
        Path(path).write_text("\n".join(lines) + "\n" if lines else "")


@dataclass(frozen=True)
class PipelineResult:
    scene: SceneDescription
    prompt: Prompt
    selection: GoalSelection | None
    raw_goal_layout: Layout
    goal_layout: Layout
    plan: PickPlacePlan
    report: SimReport
    audit: AuditLog


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineStageError:
        raise
    except TableTidyError as err:
        raise PipelineStageError(name, err) from err


def predict_goal_layout(scene: SceneDescription, provider: GoalProvider,
                        config: PipelineConfig, audit: AuditLog,
                        fixed_objects_mode: bool = False
                        ) -> tuple[GoalSelection | None, Layout, Layout]:
    """Prompting through collision resolution; returns (selection, raw, final).

    With ``fixed_objects_mode`` the inpainting mask preserves the stationary
    objects' full masks (missing-object completion) instead of the contour
    composition used for whole-scene rearrangement.
    """
    with _stage("prompting"):
        if config.nouns_from_captions:
            stop = frozenset(config.stop_nouns) if config.stop_nouns else STOP_NOUNS
            nouns = [extract_class_noun(o.caption, stop_list=stop)
                     for o in scene.movable_objects]
            prompt = build_prompt(nouns, suffix=config.prompt_suffix)
        else:
            prompt = build_scene_prompt(scene, suffix=config.prompt_suffix)
        if fixed_objects_mode:
            inpaint = compose_fixed_objects_mask(scene)
        else:
            inpaint = compose_inpaint_mask(
                scene, contour_thickness=config.contour_thickness,
                dilation_radius=config.movable_dilation)
        audit.add("prompting", "prompt", text=prompt.text,
                  nouns=list(prompt.noun_list),
                  preserve_pixels=inpaint.mask.area)

    with _stage("goal_provider"):
        request = GenerationRequest(prompt=prompt, inpaint=inpaint,
                                    batch_size=config.batch_size, seed=config.seed)
        candidates = sample_until_valid(provider, scene, request,
                                        max_batches=config.max_batches)
        audit.add("goal_provider", "candidates",
                  count=len(candidates),
                  source_tags=[c.source_tag for c in candidates])

    with _stage("matching"):
        selection = select_goal(scene, candidates)
        audit.add("matching", "selection", **selection.to_json())

    with _stage("registration"):
        icp_config = config.icp_config()
        entries = []
        ratios: dict[str, float] = {}
        goal_poses: dict[str, Pose2D] = {}
        for i, j in selection.assignment.pairs:
            initial = scene.objects[i]
            goal = selection.candidate.objects[j]
            alignment = align_object_masks(initial, goal, icp_config)
            cx, cy = mask_centroid(initial.mask)
            gx, gy = alignment.transform.apply_point(cx, cy)
            pose = Pose2D(gx, gy, alignment.transform.theta)
            goal_poses[initial.id] = pose
            ratios[initial.id] = alignment.size_ratio
            audit.add(
                "registration", "aligned",
                object_id=initial.id,
                candidate_object_id=goal.id,
                theta=alignment.transform.theta,
                tx=alignment.transform.tx,
                ty=alignment.transform.ty,
                rms=alignment.icp.rms,
                runner_up_rms=alignment.icp.runner_up_rms,
                iterations=alignment.icp.iterations,
                converged=alignment.icp.converged,
                symmetry_warning=alignment.icp.symmetry_suspect,
                size_ratio=alignment.size_ratio,
            )
        for obj in scene.objects:
            cx, cy = mask_centroid(obj.mask)
            pose = goal_poses.get(obj.id, Pose2D(cx, cy, 0.0))
            entries.append(LayoutEntry(
                object_id=obj.id, mask=mask_crop_to_bbox(obj.mask),
                pose=pose, movable=obj.movable))
        raw_layout = Layout(
            entries=tuple(entries),
            bounds=(0.0, 0.0, float(scene.image_width), float(scene.image_height)))

    with _stage("layout"):
        normalized = scale_normalize(raw_layout, ratios)
        goal_layout = resolve_collisions(
            normalized, margin=config.margin, step=config.step,
            max_iter=config.layout_max_iter)
        moved = sum(
            1 for a, b in zip(normalized.entries, goal_layout.entries)
            if a.pose != b.pose)
        audit.add("layout", "adjusted",
                  scale_ratios={k: ratios[k] for k in sorted(ratios)},
                  pushed_objects=moved)

    return selection, raw_layout, goal_layout


def run_pipeline_on_scene(scene: SceneDescription, provider: GoalProvider,
                          config: PipelineConfig) -> PipelineResult:
    """Full pipeline over an in-memory scene."""
    audit = AuditLog()
    start_layout = layout_from_scene(scene)
    if not scene.movable_objects:
        # nothing to rearrange: empty plan against the unchanged scene
        with _stage("prompting"):
            audit.add("prompting", "skipped", reason="no movable objects")
        plan = PickPlacePlan(moves=())
        with _stage("simulate"):
            report = simulate(plan, start_layout, start_layout, margin=config.margin)
            audit.add("simulate", "report", valid=report.valid, violations=[])
        prompt = Prompt(text="", noun_list=())
        return PipelineResult(scene=scene, prompt=prompt, selection=None,
                              raw_goal_layout=start_layout, goal_layout=start_layout,
                              plan=plan, report=report, audit=audit)

    selection, raw_layout, goal_layout = predict_goal_layout(
        scene, provider, config, audit)
    with _stage("planning"):
        plan = plan_moves(start_layout, goal_layout, margin=config.margin)
        audit.add("planning", "plan",
                  moves=[m.to_json() for m in plan.moves])
    with _stage("simulate"):
        report = simulate(plan, start_layout, goal_layout, margin=config.margin)
        audit.add("simulate", "report", valid=report.valid,
                  violations=[{"move_index": i, "object_ids": list(ids)}
                              for i, ids in report.violations])
    prompt = build_scene_prompt(scene, suffix=config.prompt_suffix)
    return PipelineResult(scene=scene, prompt=prompt, selection=selection,
                          raw_goal_layout=raw_layout, goal_layout=goal_layout,
                          plan=plan, report=report, audit=audit)


def write_artifacts(result: PipelineResult, out_dir: str | Path,
                    config: PipelineConfig) -> None:
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        def dump(name: str, doc) -> None:
            (out / name).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")

        dump("config.json", config.to_json())
        dump("prompt.json", result.prompt.to_json())
        if result.selection is not None:
            dump("goal_selection.json", result.selection.to_json())
        dump("layout_raw.json", result.raw_goal_layout.to_json())
        dump("layout_goal.json", result.goal_layout.to_json())
        dump("plan.json", result.plan.to_json(result.scene.camera))
        dump("sim_report.json", result.report.to_json())
        start = layout_from_scene(result.scene)
        render_layout(start, out / "before.ppm", markers=config.render_markers)
        render_layout(result.report.final_layout, out / "after.ppm",
                      markers=config.render_markers)
        result.audit.write(out / "audit.jsonl")
    except OSError as err:
        raise IoFailure(f"cannot write artifacts to {out}: {err}") from err


def run_pipeline(scene_path: str | Path, config: PipelineConfig,
                 out_dir: str | Path | None = None,
                 provider: GoalProvider | None = None) -> PipelineResult:
    """Load a scene file, run the pipeline, optionally write artifacts."""
    with _stage("load_scene"):
        scene = load_scene(scene_path)
    if provider is None:
        provider = make_provider(config.provider)
    result = run_pipeline_on_scene(scene, provider, config)
    if out_dir is not None:
        write_artifacts(result, out_dir, config)
    return result


# --- missing-object evaluation ------------------------------------------------

def pipeline_predictor(provider_factory: ProviderFactory,
                       config: PipelineConfig) -> Callable[[EvalBundle, str], Pose2D]:
    """Missing-object pose via the full generation pipeline."""

    def predict(bundle: EvalBundle, object_id: str) -> Pose2D:
        scene = held_out_scene(bundle, object_id)
        audit = AuditLog()
        _, _, goal_layout = predict_goal_layout(
            scene, provider_factory(), config, audit, fixed_objects_mode=True)
        return goal_layout.entry(object_id).pose

    return predict


def random_predictor(seed: int = 0, margin: float = 2.0
                     ) -> Callable[[EvalBundle, str], Pose2D]:
    """Missing-object pose drawn uniformly, avoiding the fixed objects."""

    def predict(bundle: EvalBundle, object_id: str) -> Pose2D:
        scene = held_out_scene(bundle, object_id)
        layout = baseline_random(scene, rng_seed=seed, margin=margin)
        return layout.entry(object_id).pose

    return predict


def geometric_predictor(margin: float = 2.0) -> Callable[[EvalBundle, str], Pose2D]:
    """Missing-object pose on the line through the two nearest fixed objects."""

    def predict(bundle: EvalBundle, object_id: str) -> Pose2D:
        scene = held_out_scene(bundle, object_id)
        fixed = fixed_objects_layout(bundle, object_id)
        return baseline_geometric_missing(
            scene, fixed, scene.object_by_id(object_id), margin=margin)

    return predict


def run_missing_object_eval(bundles: list[EvalBundle],
                            methods: dict[str, Callable[[EvalBundle, str], Pose2D]]
                            ) -> dict[str, dict[str, ErrorSummary]]:
    return {name: evaluate_method(bundles, predictor)
            for name, predictor in methods.items()}
