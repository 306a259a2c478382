#!/usr/bin/env python3
"""
Space-Time Slab Solver
======================
Step-by-step run of the staggered fluid-rigid body loop on a sliding mesh.

This solver:
1. Loads a run configuration
2. Builds and checks the starting mesh
3. Prepares the block connectivity sets used by swap slabs
4. Builds the force provider
5. Runs the staggered loop over every slab
6. Reports the response metrics
7. Writes the time series, summary and plot

Usage:
    python slab_solver.py [config.cfg] [out_dir]
"""

import sys
from pathlib import Path

from slabforge.analysis import plot_time_series, print_metrics, response_metrics
from slabforge.block_cuts import BlockSetCache
from slabforge.config import BASE_DIR, Settings, configure_logging, load_config
from slabforge.coupling import initial_mesh, run_simulation
from slabforge.errors import MeshError
from slabforge.mesh_core import validate_spatial_mesh
from slabforge.mesh_io import read_block_sets, write_block_sets
from slabforge.providers import build_provider

DEFAULT_CONFIG = BASE_DIR / 'data' / 'prescribed_rotation.cfg'


def print_banner():
    """Print solver banner"""
    print("=" * 80)
    print("  SPACE-TIME SLAB SOLVER")
    print("  Staggered coupling on a sliding-mesh annulus")
    print("=" * 80)
    print()


def load_run_config(path):
    print("📂 Step 1: Loading configuration...")
    config = load_config(path)
    print(f"✓ {path}")
    print(f"✓ Time grid: [{config.time.t_start}, {config.time.t_end}] with dt = {config.time.dt}")
    print(f"✓ Provider: {config.provider.name}")
    print()
    return config


def build_mesh(config):
    print("🕸  Step 2: Building the starting mesh...")
    mesh = initial_mesh(config.mesh)
    report = validate_spatial_mesh(mesh)
    if report:
        raise MeshError(f"starting mesh is invalid: {report.summary()}")
    print(f"✓ {mesh.n_vertices} vertices, {len(mesh.triangles)} triangles, {len(mesh.quads)} quads")
    if mesh.annulus is not None:
        print(f"✓ Annulus with {mesh.annulus.n_quads} quads per layer, pitch {mesh.annulus.pitch:.6f} rad")
    print()
    return mesh


def prepare_block_sets(settings):
    print("🧱 Step 3: Preparing block connectivity sets...")
    cache_path = settings.block_cache
    if cache_path is not None and cache_path.exists():
        cache = read_block_sets(cache_path)
        print(f"✓ Loaded from {cache_path}")
    else:
        cache = BlockSetCache().derive_all()
        print("✓ Derived all four configurations")
        if cache_path is not None:
            write_block_sets(cache, cache_path)
            print(f"✓ Cached to {cache_path}")
    for configuration, conn in cache.items():
        print(f"   configuration {configuration}: {len(conn.tets)} tetrahedra")
    print()
    return cache


def make_provider(config):
    print("🌬  Step 4: Building the force provider...")
    provider = build_provider(config.provider.name, config.provider.options, config.fluid.params())
    print(f"✓ {type(provider).__name__}")
    print()
    return provider


def run(config, provider, cache, out_dir):
    print("⏱  Step 5: Running the staggered loop...")
    result = run_simulation(config, provider=provider, out_dir=out_dir, block_sets=cache)
    print(f"✓ {result.n_steps} slabs, {sum(result.configurations.values())} with a sliding-layer swap")
    print()
    return result


def evaluate(result):
    print("📊 Step 6: Response metrics...")
    frame = result.frame()
    metrics = {name: response_metrics(frame['t'].values, frame[name].values) for name in ('d', 'theta')}
    print_metrics(metrics, "Rigid-body response")
    return metrics


def save_outputs(result, out_dir):
    print("💾 Step 7: Saving results...")
    plot = plot_time_series(result.outputs['timeseries'], Path(out_dir) / 'response.png')
    for name, path in result.outputs.items():
        print(f"✓ {name}: {path}")
    print(f"✓ plot: {plot}")
    print()


def main(argv=None):
    """Main solver pipeline"""
    argv = sys.argv[1:] if argv is None else argv
    settings = Settings()
    configure_logging(settings.log_level)
    print_banner()

    config = load_run_config(Path(argv[0]) if argv else DEFAULT_CONFIG)
    out_dir = Path(argv[1]) if len(argv) > 1 else settings.output_dir

    build_mesh(config)
    cache = prepare_block_sets(settings)
    provider = make_provider(config)
    result = run(config, provider, cache, out_dir)
    evaluate(result)
    save_outputs(result, out_dir)

    print("=" * 80)
    print("✅ SLAB SOLVER COMPLETED SUCCESSFULLY!")
    print("=" * 80)
    return 0


if __name__ == '__main__':
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\n⚠️  Solver interrupted by user.")
        sys.exit(1)
    except Exception as e:
        print(f"\n\n❌ Error: {e}")
        import traceback
        traceback.print_exc()
        sys.exit(1)
