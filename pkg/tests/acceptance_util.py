"""Shared plumbing for the acceptance suite.

The headline sweep takes tens of minutes, so its CSV is cached under
``.acceptance_cache/`` keyed by the sweep configuration AND a digest of the
package sources: any code change invalidates the cache, so a cached result
is always byte-identical to what a fresh run would produce.
"""

import hashlib
import json
import os
from pathlib import Path

import colorcode_rg
from colorcode_rg.harness import SweepConfig, read_sweep_csv, run_sweep, write_sweep_csv

REPO_ROOT = Path(__file__).resolve().parent.parent
CACHE_DIR = REPO_ROOT / ".acceptance_cache"

ACCEPTANCE_SEED = 20260810
ACCEPTANCE_P_GRID = tuple(round(0.040 + 0.005 * i, 3) for i in range(9))


def source_digest() -> str:
    h = hashlib.sha256()
    src = Path(colorcode_rg.__file__).parent
    for path in sorted(src.glob("*.py")):
        h.update(path.name.encode())
        h.update(path.read_bytes())
    return h.hexdigest()[:16]


def cached_sweep(config: SweepConfig, tag: str):
    """Run (or reuse) a sweep; returns the parsed CSV rows."""
    key = hashlib.sha256(
        (json.dumps({
            "m_list": list(config.m_list), "p_list": list(config.p_list),
            "trials": config.trials, "seed": config.seed,
            "bp_rounds": config.bp_rounds, "split_rounds": config.split_rounds,
            "mode": config.mode, "sigma_cutoff": config.sigma_cutoff,
        }, sort_keys=True) + source_digest()).encode()
    ).hexdigest()[:16]
    CACHE_DIR.mkdir(exist_ok=True)
    path = CACHE_DIR / f"{tag}_{key}.csv"
    if not path.exists():
        result = run_sweep(config)
        write_sweep_csv(result, path)
    return read_sweep_csv(path), path


def acceptance_sweep_config(trials: int = 20000) -> SweepConfig:
    return SweepConfig(
        m_list=(1, 2),
        p_list=ACCEPTANCE_P_GRID,
        trials=trials,
        seed=ACCEPTANCE_SEED,
    )


def full_fit_requested() -> bool:
    return os.environ.get("COLORCODE_RG_FULL_FIT", "") == "1"
