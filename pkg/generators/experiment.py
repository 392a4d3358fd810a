"""
Experiment runner: the feedback loop repeated over every combination of
feedback mode and prompt variant, tabulated with pandas.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence

import pandas as pd

import config
from fcl import ast as A
from generators.am_generator import run_loop
from generators.backends import GenBackend
from generators.feedback import FEEDBACK_MODES
from generators.prompt_generator import VARIANTS
from parsers.adsl import ArchitectureSpec

logger = logging.getLogger(__name__)

COLUMNS = ["mode", "variant", "repeat", "iterations", "valid"]
ABORTED = "aborted"

BackendFactory = Callable[[], GenBackend]


def run_experiment(spec: ArchitectureSpec, domain_text: str, constraints: Sequence[A.Constraint],
                   backend_factory: BackendFactory, modes: Sequence[str] = FEEDBACK_MODES,
                   variants: Sequence[str] = VARIANTS, repeats: int = 10,
                   max_iterations: int = config.MAX_ITERATIONS, jobs: int = 1) -> pd.DataFrame:
    """
    Run one feedback loop per (mode, variant, repeat)

    Args:
        backend_factory: builds a new backend for every loop
        repeats: loops per cell
        jobs: loops run in parallel

    Returns:
        DataFrame with one row per loop; iterations of an aborted loop is the
        number of iterations it used
    """
    if repeats < 1:
        raise ValueError("repeats must be at least 1")
    cells = [(mode, variant, repeat) for mode, variant in product(modes, variants)
             for repeat in range(1, repeats + 1)]

    def run_cell(cell) -> Dict:
        mode, variant, repeat = cell
        logger.info("experiment cell %s / %s, repeat %d", mode, variant, repeat)
        result = run_loop(spec, domain_text, constraints, backend_factory(), mode=mode,
                          variant=variant, max_iterations=max_iterations)
        return {"mode": mode, "variant": variant, "repeat": repeat,
                "iterations": result.iterations, "valid": result.valid}

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(run_cell, cells))
    else:
        rows = [run_cell(cell) for cell in cells]
    return pd.DataFrame(rows, columns=COLUMNS)


def iteration_histogram(table: pd.DataFrame, max_iterations: Optional[int] = None) -> pd.DataFrame:
    """
    Counts per (mode, variant) of the iteration at which a valid AM was found;
    loops without a valid AM go to the "aborted" bin. Every row sums to the
    number of repeats of its cell.
    """
    if max_iterations is None:
        max_iterations = int(table["iterations"].max()) if len(table) else 0
    bins: List = list(range(1, max_iterations + 1)) + [ABORTED]
    outcome = table["iterations"].where(table["valid"].astype(bool), ABORTED)
    counts = (
        table.assign(outcome=outcome)
        .groupby(["mode", "variant", "outcome"], sort=False)
        .size()
        .unstack("outcome", fill_value=0)
    )
    return counts.reindex(columns=bins, fill_value=0).astype(int)


def save_table(table: pd.DataFrame, path: str) -> None:
    table.to_csv(path, index=False)
    logger.info("experiment table saved to %s", path)


def load_table(path: str) -> pd.DataFrame:
    return pd.read_csv(path)


def plot_histogram(table: pd.DataFrame, path: str, max_iterations: Optional[int] = None) -> bool:
    """Bar chart per feedback mode, one colour per prompt variant; False without matplotlib"""
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        logger.warning("matplotlib is not installed, skipping %s", path)
        return False

    histogram = iteration_histogram(table, max_iterations)
    modes = list(dict.fromkeys(histogram.index.get_level_values("mode")))
    variants = list(dict.fromkeys(histogram.index.get_level_values("variant")))
    labels = [str(column) for column in histogram.columns]
    width = 0.8 / max(len(variants), 1)

    figure, axes = plt.subplots(1, len(modes), figsize=(5 * len(modes), 3.5), sharey=True, squeeze=False)
    for ax, mode in zip(axes[0], modes):
        for offset, variant in enumerate(variants):
            if (mode, variant) not in histogram.index:
                continue
            values = histogram.loc[(mode, variant)].tolist()
            positions = [i + offset * width for i in range(len(labels))]
            ax.bar(positions, values, width=width, label=variant)
        ax.set_title(mode)
        ax.set_xticks([i + width * (len(variants) - 1) / 2 for i in range(len(labels))])
        ax.set_xticklabels(labels)
        ax.set_xlabel("iterations")
    axes[0][0].set_ylabel("loops")
    axes[0][-1].legend()
    figure.tight_layout()
    figure.savefig(path)
    plt.close(figure)
    logger.info("experiment histogram saved to %s", path)
    return True
