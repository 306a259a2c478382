"""
slabforge command-line entry point.

Sub-commands:
    generate     build the starting mesh of a run configuration
    extrude      build the space-time slab between two mesh files
    validate     check the conformity of a slab file
    simulate     run the staggered coupling over the configured time grid
    cuts-census  enumerate prism cuts; optionally derive and store the block sets

Exit codes: 0 success, 1 validation or run failure, 2 usage or configuration error.
"""
import argparse
import json
import sys
from pathlib import Path

from slabforge.analysis import print_metrics, response_metrics
from slabforge.block_cuts import CONFIGURATIONS, BlockSetCache
from slabforge.config import LOG_LEVELS, Settings, configure_logging, load_config
from slabforge.coupling import initial_annulus_state, initial_mesh, mesh_at, run_simulation
from slabforge.errors import ConfigError, ConformityError, SlabforgeError
from slabforge.extrude import extrude_slab, validate_slab
from slabforge.mesh_io import read_block_sets, read_mesh, read_slab, write_block_sets, write_mesh, write_slab
from slabforge.prism import cuts_census
from slabforge.rigid_body import DofState, RigidBodyState
from slabforge.sliding import AnnulusState, update_sliding_layer


def banner(title: str):
    print("=" * 70)
    print(f"   {title}")
    print("=" * 70)


def cmd_generate(args, settings: Settings) -> int:
    config = load_config(args.config)
    rb = config.rigid_body
    state = RigidBodyState(
        config.time.t_start, DofState(rb.d0, rb.ddot0), DofState(rb.theta0, rb.thetadot0)
    )
    reference = initial_mesh(config.mesh)
    mesh, annulus = mesh_at(reference, initial_annulus_state(reference), config.motion, state)
    path = write_mesh(mesh, args.output)
    print(f"✓ Mesh: {mesh.n_vertices} vertices, {len(mesh.triangles)} triangles, {len(mesh.quads)} quads")
    if annulus is not None:
        print(f"✓ Annulus: {annulus.n_quads} quads per layer, sliding offset {annulus.offset}")
    print(f"✓ Written to {path}")
    return 0


def cmd_extrude(args, settings: Settings) -> int:
    bottom = read_mesh(args.mesh)
    top = read_mesh(args.mesh_next)
    decision = None
    if args.swap:
        if top.annulus is None:
            raise ConfigError("--swap needs meshes with a sliding annulus")
        top, _, decision = update_sliding_layer(top, AnnulusState(top.annulus.n_quads, top.sliding_offset))
        print(f"✓ Swap decision: {decision.direction.value} (offset {bottom.sliding_offset} -> {top.sliding_offset})")
    slab = extrude_slab(bottom, top, args.t0, args.t1, swap=decision, block_sets=_block_sets(settings))
    path = write_slab(slab, args.output)
    print(f"✓ Slab: {slab.n_tets} tetrahedra over [{args.t0}, {args.t1}]")
    if slab.configuration is not None:
        print(f"✓ Block configuration {slab.configuration}")
    print(f"✓ Written to {path}")
    report = validate_slab(slab)
    if report:
        raise ConformityError(report)
    return 0


def cmd_validate(args, settings: Settings) -> int:
    slab = read_slab(args.slab)
    report = validate_slab(slab)
    if report:
        raise ConformityError(report)
    print(f"✓ {args.slab}: {slab.n_tets} tetrahedra, conforming")
    return 0


def cmd_simulate(args, settings: Settings) -> int:
    config = load_config(args.config)
    if args.vtk:
        config.output.vtk = True
    if args.plot:
        config.output.plot = True
    out_dir = Path(args.out_dir or config.output.directory or settings.output_dir)
    banner("SLABFORGE - STAGGERED FLUID-RIGID BODY RUN")
    print(f"✓ Configuration: {args.config}")
    print(f"✓ Provider: {config.provider.name}")
    print(f"✓ Output directory: {out_dir}")
    print()
    result = run_simulation(
        config, out_dir=out_dir, block_sets=_block_sets(settings), progress=not args.quiet
    )
    frame = result.frame()
    if len(frame) >= 2:
        print_metrics(
            {name: response_metrics(frame["t"].values, frame[name].values) for name in ("d", "theta")},
            "Rigid-body response",
        )
    output = {
        "status": "success",
        "steps": result.n_steps,
        "swap_slabs": int(sum(result.configurations.values())),
        "configurations": {str(k): v for k, v in sorted(result.configurations.items())},
        "outputs": {k: str(v) for k, v in result.outputs.items()},
    }
    print(json.dumps(output, indent=2))
    return 0


def cmd_cuts_census(args, settings: Settings) -> int:
    bottom, top = (0, 1, 2), (3, 4, 5)
    census = cuts_census(bottom, top)
    banner("PRISM CUT CENSUS")
    for diagonals, valid in census:
        sides = "  ".join(f"{u}-{v}" for u, v in diagonals)
        print(f"   {sides:<24} {'valid' if valid else 'invalid'}")
    n_valid = sum(valid for _, valid in census)
    print(f"\n✓ {n_valid} of {len(census)} diagonal assignments admit a 3-tetrahedron cut")
    if args.blocks:
        cache = BlockSetCache().derive_all()
        for configuration, conn in cache.items():
            direction, agreement = CONFIGURATIONS[configuration]
            print(
                f"✓ Configuration {configuration} ({direction.value}, {agreement.value}): "
                f"{len(conn.tets)} tetrahedra"
            )
        print(f"✓ Block sets written to {write_block_sets(cache, args.blocks)}")
    return 0


def _block_sets(settings: Settings):
    if settings.block_cache is not None and settings.block_cache.exists():
        return read_block_sets(settings.block_cache)
    return None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="slabforge", description="Space-time sliding-mesh slabs")
    parser.add_argument("--log-level", choices=sorted(LOG_LEVELS), help="overrides SLABFORGE_LOG")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="build the starting mesh of a configuration")
    p.add_argument("--config", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("extrude", help="build the slab between two meshes")
    p.add_argument("--mesh", required=True)
    p.add_argument("--mesh-next", required=True)
    p.add_argument("--swap", action="store_true", help="decide the sliding-layer swap on the next mesh")
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--t1", type=float, default=1.0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(handler=cmd_extrude)

    p = sub.add_parser("validate", help="check slab conformity")
    p.add_argument("slab")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("simulate", help="run the staggered coupling")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir")
    p.add_argument("--vtk", action="store_true")
    p.add_argument("--plot", action="store_true")
    p.add_argument("--quiet", action="store_true", help="no progress bar")
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("cuts-census", help="enumerate prism cuts")
    p.add_argument("--blocks", help="derive the four block sets and write them to this file")
    p.set_defaults(handler=cmd_cuts_census)
    return parser


def _error(exc: Exception, code: int) -> int:
    print(f"❌ Error: {exc}", file=sys.stderr)
    print(json.dumps({"status": "error", "error": str(exc), "type": type(exc).__name__}, indent=2))
    return code


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    settings = Settings()
    configure_logging(args.log_level or settings.log_level)
    try:
        return args.handler(args, settings)
    except ConformityError as exc:
        print(exc.report.summary(), file=sys.stderr)
        return _error(exc, 1)
    except ConfigError as exc:
        return _error(exc, 2)
    except OSError as exc:
        return _error(exc, 2)
    except SlabforgeError as exc:
        return _error(exc, 1)


if __name__ == '__main__':
    sys.exit(main())
