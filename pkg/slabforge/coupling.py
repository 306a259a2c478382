"""
Staggered fluid-rigid body coupling over space-time slabs.

Each slab runs a predictor for both degrees of freedom and then loops: move
the mesh to the current iterate, decide the sliding-layer swap, extrude the
slab, evaluate the force provider and correct the rigid body. The loop stops
when both corrector updates are below the rigid-body tolerance.

Sign convention: the provider's force and moment enter the rigid-body
equations as the load exactly as integrated, without a sign flip.
"""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from .analysis import plot_time_series, response_metrics
from .block_cuts import BlockSetCache
from .config import CouplingConfig, MeshConfig, MotionConfig
from .errors import DivergenceError
from .extrude import SpaceTimeSlab, extrude_slab
from .forces import ForceMoment
from .mesh_core import SpatialMesh, build_box_mesh, build_mixed_mesh
from .mesh_io import TIME_SERIES_COLUMNS, write_slab_vtk, write_time_series
from .motion import MotionMap, advance_vertices, moved_points
from .providers import ForceProvider, build_provider
from .rigid_body import DofState, RigidBodyState, StateHistory, corrector, predictor
from .sliding import (
    AnnulusState,
    SwapDecision,
    apply_swap,
    check_rotation_bound,
    decide_swap,
    representative_diagonals,
    update_sliding_layer,
)

logger = logging.getLogger(__name__)

__all__ = [
    "StepResult",
    "SimulationResult",
    "initial_mesh",
    "initial_annulus_state",
    "mesh_at",
    "staggered_step",
    "run_simulation",
]


@dataclass
class StepResult:
    state: RigidBodyState
    mesh: SpatialMesh
    annulus: Optional[AnnulusState]
    slab: SpaceTimeSlab
    load: ForceMoment
    outer_iterations: int
    residual: float
    decision: Optional[SwapDecision] = None

    @property
    def swapped(self) -> bool:
        return self.slab.swapped


@dataclass
class SimulationResult:
    rows: List[Dict[str, float]]
    final_state: RigidBodyState
    final_mesh: SpatialMesh
    configurations: Counter = field(default_factory=Counter)
    slabs: List[SpaceTimeSlab] = field(default_factory=list)
    outputs: Dict[str, Path] = field(default_factory=dict)
    history: StateHistory = field(default_factory=StateHistory)

    @property
    def n_steps(self) -> int:
        return len(self.rows)

    def frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=TIME_SERIES_COLUMNS)


def initial_mesh(config: MeshConfig) -> SpatialMesh:
    """Reference mesh at the zero rotation and displacement."""
    if config.kind == "box":
        return build_box_mesh(
            tuple(config.x_range), tuple(config.y_range), config.nx, config.ny, tuple(config.body_box)
        )
    return build_mixed_mesh(
        (config.center_x, config.center_y),
        config.r_body,
        config.r_rotating,
        config.r_mid,
        config.r_outer,
        config.r_far,
        config.n_quads,
        config.n_rotating_layers,
        config.n_static_layers,
        config.start_angle,
    )


def initial_annulus_state(mesh: SpatialMesh) -> Optional[AnnulusState]:
    if mesh.annulus is None:
        return None
    return AnnulusState(mesh.annulus.n_quads, offset=mesh.sliding_offset)


def _motion_map(
    mesh: SpatialMesh, motion: MotionConfig, before: RigidBodyState, after: RigidBodyState
) -> MotionMap:
    """Increment taking the mesh from the pose ``before`` to the pose ``after``."""
    dy = before.d if motion.translate else 0.0
    inner, outer = motion.boxes()
    return MotionMap(
        center=np.asarray(mesh.center, dtype=float) + np.array([0.0, dy]),
        angle=after.theta - before.theta if motion.rotate else 0.0,
        displacement=after.d - before.d if motion.translate else 0.0,
        inner_box=None if inner is None else inner.shifted(dy),
        outer_box=None if outer is None else outer.shifted(dy),
        rotate=motion.rotate,
        translate=motion.translate,
    )


def mesh_at(
    reference: SpatialMesh, annulus: Optional[AnnulusState], motion: MotionConfig, state: RigidBodyState
) -> Tuple[SpatialMesh, Optional[AnnulusState]]:
    """
    Place the level-0 mesh at a rigid-body state, settling the sliding offset.

    Used for the starting mesh, where the initial angle may be several
    pitches away from the constructed triangulation.
    """
    rest = RigidBodyState(state.time, DofState(), DofState())
    placed = reference.with_points(moved_points(reference, _motion_map(reference, motion, rest, state)))
    if annulus is None:
        return placed, None
    for _ in range(annulus.n_quads):
        diagonals = representative_diagonals(placed, annulus)
        decision = decide_swap(annulus, diagonals.primary, diagonals.secondary, diagonals.candidate_offset)
        if not decision.swap:
            break
        annulus = apply_swap(annulus, decision)
        placed = placed.with_sliding_offset(annulus.offset)
    annulus = replace(annulus, accumulated_rotation=state.theta if motion.rotate else 0.0)
    return placed, annulus


def _advance(
    mesh: SpatialMesh,
    annulus: Optional[AnnulusState],
    motion: MotionConfig,
    before: RigidBodyState,
    after: RigidBodyState,
) -> Tuple[SpatialMesh, Optional[AnnulusState], Optional[SwapDecision]]:
    top = advance_vertices(mesh, _motion_map(mesh, motion, before, after))
    if annulus is None:
        return top, None, None
    delta = after.theta - before.theta if motion.rotate else 0.0
    check_rotation_bound(delta, annulus.angular_pitch)
    top, new_annulus, decision = update_sliding_layer(top, annulus)
    return top, new_annulus.rotated(delta), decision


def _trial_state(time: float, translation: DofState, rotation: DofState, tr, rot) -> RigidBodyState:
    return RigidBodyState(time, translation.advanced(*tr), rotation.advanced(*rot))


def staggered_step(
    state: RigidBodyState,
    mesh: SpatialMesh,
    annulus: Optional[AnnulusState],
    provider: ForceProvider,
    config: CouplingConfig,
    load: ForceMoment,
    dt: Optional[float] = None,
    block_sets: Optional[BlockSetCache] = None,
) -> StepResult:
    """
    Advance the coupled system over one slab.

    Args:
        state: Converged rigid-body state at t^n.
        mesh: Spatial mesh at t^n, consistent with ``state``.
        annulus: Sliding-layer state of ``mesh`` (None without an annulus).
        provider: Force provider, evaluated at every outer iterate.
        config: Rigid-body parameters, tolerances and motion settings.
        load: Converged load at t^n, used by the predictor.
        dt: Slab length; ``config.time.dt`` when omitted.
        block_sets: Block connectivity sets for swap slabs.

    Returns:
        The converged state, the mesh and conforming slab at t^{n+1}, and diagnostics.

    Raises:
        DivergenceError: the outer loop did not converge within ``max_outer``.
        MotionRejected: an iterate inverted a mesh element.
        RotationBoundError: an iterate rotated half a pitch or more within the slab.
        ConformityError: a trial or the accepted slab failed validation.
    """
    dt = config.time.dt if dt is None else dt
    t1 = state.time + dt
    rb = config.rigid_body
    tr_params, rot_params = rb.translation(), rb.rotation()
    translation = state.translation.backfilled(dt, tr_params.acceleration(state.d, state.ddot, load.fy))
    rotation = state.rotation.backfilled(dt, rot_params.acceleration(state.theta, state.thetadot, load.moment))

    tr = predictor(tr_params, translation, load.fy, dt)
    rot = predictor(rot_params, rotation, load.moment, dt)

    residual = float("inf")
    new_load = load
    for iteration in range(1, rb.max_outer + 1):
        trial = _trial_state(t1, state.translation, state.rotation, tr, rot)
        top, _, decision = _advance(mesh, annulus, config.motion, state, trial)
        extrude_slab(mesh, top, state.time, t1, swap=decision, block_sets=block_sets, validate=True)
        new_load = provider.evaluate(t1, trial, top)
        tr_next = corrector(tr_params, translation, tr, new_load.fy, dt)
        rot_next = corrector(rot_params, rotation, rot, new_load.moment, dt)
        residual = max(
            float(np.hypot(tr_next[0] - tr[0], tr_next[1] - tr[1])),
            float(np.hypot(rot_next[0] - rot[0], rot_next[1] - rot[1])),
        )
        tr, rot = tr_next, rot_next
        if residual < rb.tolerance:
            break
    else:
        raise DivergenceError("outer coupling loop", rb.max_outer, residual)

    converged = _trial_state(t1, state.translation, state.rotation, tr, rot)
    top, new_annulus, decision = _advance(mesh, annulus, config.motion, state, converged)
    slab = extrude_slab(mesh, top, state.time, t1, swap=decision, block_sets=block_sets, validate=True)
    logger.debug(
        "slab %d: t=%.6g outer=%d residual=%.3e swapped=%s",
        mesh.level, t1, iteration, residual, slab.swapped,
    )
    return StepResult(converged, top, new_annulus, slab, new_load, iteration, residual, decision)


def _row(result: StepResult) -> Dict[str, float]:
    s = result.state
    return {
        "t": s.time,
        "d": s.d,
        "ddot": s.ddot,
        "theta": s.theta,
        "thetadot": s.thetadot,
        "Fy": result.load.fy,
        "M": result.load.moment,
        "outer_iters": result.outer_iterations,
        "swapped": int(result.swapped),
    }


def _summary(
    status: str, rows: List[Dict[str, float]], configurations: Counter, config: CouplingConfig,
    error: Optional[str] = None,
) -> Dict:
    summary = {
        "status": status,
        "steps": len(rows),
        "t_end": rows[-1]["t"] if rows else config.time.t_start,
        "swap_slabs": int(sum(configurations.values())),
        "configurations": {str(k): int(v) for k, v in sorted(configurations.items())},
        "max_outer_iters": max((int(r["outer_iters"]) for r in rows), default=0),
        "config": config.to_dict(),
    }
    if len(rows) >= 2:
        times = np.array([r["t"] for r in rows])
        summary["metrics"] = {
            name: response_metrics(times, np.array([r[name] for r in rows])).to_dict()
            for name in ("d", "theta")
        }
    if error is not None:
        summary["error"] = error
    return summary


def _flush(out_dir: Path, rows, configurations, config, status, error=None) -> Dict[str, Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = write_time_series(rows, out_dir / "timeseries.csv")
    summary_path = out_dir / "summary.json"
    with open(summary_path, "w") as fh:
        json.dump(_summary(status, rows, configurations, config, error), fh, indent=2, default=str)
    return {"timeseries": csv_path, "summary": summary_path}


def run_simulation(
    config: CouplingConfig,
    provider: Optional[ForceProvider] = None,
    out_dir: Optional[Path] = None,
    block_sets: Optional[BlockSetCache] = None,
    keep_slabs: bool = False,
    progress: bool = True,
) -> SimulationResult:
    """
    Run the staggered loop over the whole time grid.

    Args:
        config: Parsed run configuration.
        provider: Force provider; built from ``config.provider`` when omitted.
        out_dir: Results directory (time series, summary, optional VTK and plot).
            Nothing is written when omitted.
        block_sets: Block connectivity sets for swap slabs.
        keep_slabs: Keep every accepted slab in the result.
        progress: Show a tqdm progress bar.

    Partial outputs are written before an error propagates.
    """
    if provider is None:
        provider = build_provider(config.provider.name, config.provider.options, config.fluid.params())
    times = config.time.grid()
    rb = config.rigid_body
    state = RigidBodyState(
        time=float(times[0]),
        translation=DofState(rb.d0, rb.ddot0),
        rotation=DofState(rb.theta0, rb.thetadot0),
    )
    reference = initial_mesh(config.mesh)
    mesh, annulus = mesh_at(reference, initial_annulus_state(reference), config.motion, state)
    load = provider.evaluate(state.time, state, mesh)
    history = StateHistory()
    history.append(state)

    out_dir = Path(out_dir) if out_dir is not None else None
    rows: List[Dict[str, float]] = []
    configurations: Counter = Counter()
    slabs: List[SpaceTimeSlab] = []
    outputs: Dict[str, Path] = {}
    status, error = "aborted", None
    logger.info(
        "simulating %d slabs with provider %s on a %d-vertex mesh",
        len(times) - 1, provider.name, mesh.n_vertices,
    )
    try:
        for n in tqdm(range(len(times) - 1), desc="slabs", disable=not progress):
            result = staggered_step(
                state, mesh, annulus, provider, config, load,
                dt=float(times[n + 1] - times[n]), block_sets=block_sets,
            )
            state, mesh, annulus, load = result.state, result.mesh, result.annulus, result.load
            rows.append(_row(result))
            history.append(state)
            if result.slab.configuration is not None:
                configurations[result.slab.configuration] += 1
            if keep_slabs:
                slabs.append(result.slab)
            if out_dir is not None and config.output.vtk and n % max(config.output.vtk_every, 1) == 0:
                write_slab_vtk(result.slab, out_dir / f"slab_{n:05d}.vtk")
        status = "ok"
    except Exception as exc:
        error = f"{type(exc).__name__}: {exc}"
        raise
    finally:
        if out_dir is not None:
            outputs = _flush(out_dir, rows, configurations, config, status, error)
            if status == "ok" and config.output.plot and rows:
                outputs["plot"] = plot_time_series(outputs["timeseries"], out_dir / "response.png")
    logger.info(
        "finished %d slabs, %d swap slabs, configurations %s",
        len(rows), sum(configurations.values()), dict(configurations),
    )
    return SimulationResult(rows, state, mesh, configurations, slabs, outputs, history)
