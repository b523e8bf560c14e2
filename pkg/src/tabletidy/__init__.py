"""Tabletop rearrangement: goal arrangements from a generative image provider.

The pipeline turns an object-level scene description into a prompt and an
inpainting mask, samples candidate goal images from a pluggable provider,
matches and registers objects between the initial and generated scenes, and
plans a collision-aware pick-and-place sequence that a 2D simulator validates.
"""

from .masks import BinaryMask, mask_bbox, mask_centroid, mask_dilate, masks_overlap
from .transforms import Pose2D, RigidTransform2D
from .scene import (
    CameraModel,
    CandidateScene,
    ObjectInstance,
    SceneDescription,
    load_scene,
    save_scene,
)
from .prompting import InpaintMask, Prompt, build_prompt, compose_inpaint_mask, \
    extract_class_noun
from .matching import Assignment, GoalSelection, optimal_assignment, select_goal, \
    similarity_matrix
from .registration import IcpConfig, IcpResult, estimate_object_transform, \
    icp_align, rescale_mask
from .layout import Layout, LayoutEntry, anchor_index, resolve_collisions, \
    scale_normalize
from .planning import PickPlacePlan, SimReport, WorkspaceTransform, \
    pixel_to_workspace, plan_moves, simulate, to_workspace_transform
from .evaluation import AcceptablePoseSet, PoseError, aggregate_median, \
    baseline_geometric, baseline_random, pose_error
from .pipeline import PipelineConfig, run_pipeline

__all__ = [
    "AcceptablePoseSet",
    "Assignment",
    "BinaryMask",
    "CameraModel",
    "CandidateScene",
    "GoalSelection",
    "IcpConfig",
    "IcpResult",
    "InpaintMask",
    "Layout",
    "LayoutEntry",
    "ObjectInstance",
    "PickPlacePlan",
    "PipelineConfig",
    "Pose2D",
    "PoseError",
    "Prompt",
    "RigidTransform2D",
    "SceneDescription",
    "SimReport",
    "WorkspaceTransform",
    "aggregate_median",
    "anchor_index",
    "baseline_geometric",
    "baseline_random",
    "build_prompt",
    "compose_inpaint_mask",
    "estimate_object_transform",
    "extract_class_noun",
    "icp_align",
    "load_scene",
    "mask_bbox",
    "mask_centroid",
    "mask_dilate",
    "masks_overlap",
    "optimal_assignment",
    "pixel_to_workspace",
    "plan_moves",
    "pose_error",
    "rescale_mask",
    "resolve_collisions",
    "run_pipeline",
    "save_scene",
    "scale_normalize",
    "select_goal",
    "similarity_matrix",
    "simulate",
    "to_workspace_transform",
]

__version__ = "0.1.0"
