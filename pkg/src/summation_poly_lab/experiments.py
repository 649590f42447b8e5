"""Seeded first-fall-degree experiment batches.

Each trial builds a subspace-restricted descent of S_3 and profiles it. Results
are gathered into a DataFrame sorted by n then seed, exported as CSV with one
JSON provenance sidecar per trial, and optionally cached in sqlite.
"""
import importlib
import importlib.metadata
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Set, Tuple

import pandas as pd

from . import curves, database, descent, fields, gbprofiler, sumpoly
from .errors import ResourceCapError
from .formatting import TRIAL_COLUMNS, format_trials_dataframe
from .schemas import TrialDocument, dump_document

Task = Tuple[int, int]

# Module-level caps a trial reads; spawned workers start from the defaults.
WORKER_CAPS = (
    (fields, "TABLE_MAX_ORDER"),
    (curves, "NAIVE_COUNT_MAX_ORDER"),
    (curves, "SEARCH_TRIALS_PER_FIELD"),
    (curves, "SEARCH_MAX_TRIALS"),
    (curves, "MAX_ORDER"),
    (sumpoly, "MAX_ARITY"),
    (sumpoly, "LITERAL_MAX_ARITY"),
    (descent, "EXHAUSTIVE_MAX_N"),
    (descent, "SYMBOLIC_MAX_N"),
    (descent, "DRAW_RETRIES"),
    (gbprofiler, "DMAX"),
    (gbprofiler, "MEMORY_BUDGET_BYTES"),
    (gbprofiler, "ENUMERATION_MAX_DIM"),
    (gbprofiler, "DRAW_RETRIES"),
)


def capture_caps() -> Dict[Tuple[str, str], int]:
    return {(module.__name__, attribute): getattr(module, attribute) for module, attribute in WORKER_CAPS}


def install_caps(caps: Dict[Tuple[str, str], int]) -> None:
    """Worker initializer: reapply the caps captured in the parent process."""
    for (module_name, attribute), value in caps.items():
        setattr(importlib.import_module(module_name), attribute, value)


def package_version() -> str:
    try:
        return importlib.metadata.version("summation-poly-lab")
    except importlib.metadata.PackageNotFoundError:
        return "unknown"


def run_trial(n: int, seed: int, dmax: int, memory_budget: int, enumeration_max_dim: int,
              subspace: str = "random", add_trace_relation: bool = False,
              timings: bool = False) -> Tuple[Dict[str, Any], TrialDocument]:
    """Build and profile one instance. Instances that cannot be drawn within the caps are reported as capped."""
    start = time.perf_counter()
    try:
        system = gbprofiler.build_subspace_instance(n, seed, subspace=subspace, add_trace_relation=add_trace_relation)
        result = gbprofiler.profile(system, dmax, memory_budget, enumeration_max_dim)
        status = result.status.value
        ffd, solving_degree, dims = result.first_fall_degree, result.solving_degree, result.matrix_max_dims
        provenance, profile_json = system.provenance, result.to_json()
    except ResourceCapError as e:
        logging.warning(f"Trial n={n} seed={seed} capped: {e}")
        status = gbprofiler.ProfileStatus.CAPPED.value
        ffd, solving_degree, dims = None, None, "0x0"
        provenance, profile_json = {"n": n, "seed": seed, "error": str(e)}, {}
    elapsed = round((time.perf_counter() - start) * 1000, 1) if timings else None
    row = {
        "n": n,
        "seed": seed,
        "ffd": ffd,
        "solving_degree": solving_degree,
        "matrix_max_dims": dims,
        "wall_time_ms": elapsed,
        "status": status,
    }
    document = TrialDocument(n=n, seed=seed, status=status, first_fall_degree=ffd, solving_degree=solving_degree,
                             matrix_max_dims=dims, provenance=provenance, profile=profile_json)
    return row, document


class ExperimentBatch:
    """
    A batch of seeded trials over several extension degrees.

    Trial t for degree n uses seed `seed + t`, so a batch is reproducible from its
    flags alone and any subset of its trials can be rerun on its own.
    """

    def __init__(self, n_list: Sequence[int], trials: int, seed: int, dmax: Optional[int] = None,
                 memory_budget: Optional[int] = None, enumeration_max_dim: Optional[int] = None,
                 subspace: str = "random", add_trace_relation: bool = False, timings: bool = False,
                 use_cache: bool = False, workers: int = 1):
        if trials < 0:
            raise ResourceCapError(f"trial count must be >= 0, got {trials}")
        if workers < 1:
            raise ResourceCapError(f"worker count must be >= 1, got {workers}")
        self.n_list = sorted(set(int(n) for n in n_list))
        outside = [n for n in self.n_list if not gbprofiler.SUBSPACE_MIN_N <= n <= gbprofiler.SUBSPACE_MAX_N]
        if outside:
            raise ResourceCapError(f"n must lie in {gbprofiler.SUBSPACE_MIN_N}..{gbprofiler.SUBSPACE_MAX_N}, got {outside}")
        self.trials = trials
        self.seed = seed
        self.dmax = gbprofiler.DMAX if dmax is None else dmax
        self.memory_budget = gbprofiler.MEMORY_BUDGET_BYTES if memory_budget is None else memory_budget
        if self.dmax < 2 or self.memory_budget <= 0:
            raise ResourceCapError(f"caps must be positive (dmax >= 2), got dmax={self.dmax}, memory={self.memory_budget}")
        self.enumeration_max_dim = gbprofiler.ENUMERATION_MAX_DIM if enumeration_max_dim is None else enumeration_max_dim
        self.subspace = subspace
        self.add_trace_relation = add_trace_relation
        self.timings = timings
        self.use_cache = use_cache
        self.workers = workers
        self.version = package_version()
        self.trials_df = pd.DataFrame(columns=TRIAL_COLUMNS)
        self.documents: Dict[Task, TrialDocument] = {}
        self.computed: Set[Task] = set()

    @property
    def variant(self) -> str:
        return self.subspace + ("+trace" if self.add_trace_relation else "")

    def tasks(self) -> List[Task]:
        return [(n, self.seed + t) for n in self.n_list for t in range(self.trials)]

    def parameters(self) -> Dict[str, Any]:
        return {
            "n_list": self.n_list,
            "trials": self.trials,
            "seed": self.seed,
            "dmax": self.dmax,
            "memory_budget": self.memory_budget,
            "subspace": self.subspace,
            "add_trace_relation": self.add_trace_relation,
        }

    def _from_cache(self, task: Task) -> Optional[Tuple[Dict[str, Any], TrialDocument]]:
        cached = database.load_trial(task[0], task[1], self.dmax, self.memory_budget, self.version, self.variant)
        if cached is None:
            return None
        document = TrialDocument.model_validate_json(cached.pop("document"))
        cached["ffd"] = document.first_fall_degree
        cached["solving_degree"] = document.solving_degree
        if not self.timings:
            cached["wall_time_ms"] = None
        return cached, document

    def run(self) -> pd.DataFrame:
        """
        Runs every trial, reusing cached rows, and returns the trials DataFrame.
        """
        tasks = self.tasks()
        results: Dict[Task, Tuple[Dict[str, Any], TrialDocument]] = {}
        if self.use_cache and tasks:
            database.create_tables()
            for task in tasks:
                hit = self._from_cache(task)
                if hit is not None:
                    results[task] = hit
            if results:
                logging.info(f"Reusing {len(results)} cached trial(s)")
        pending = [task for task in tasks if task not in results]
        worker = partial(run_trial, dmax=self.dmax, memory_budget=self.memory_budget,
                         enumeration_max_dim=self.enumeration_max_dim, subspace=self.subspace,
                         add_trace_relation=self.add_trace_relation, timings=self.timings)
        ns = [n for n, _ in pending]
        seeds = [s for _, s in pending]
        if self.workers > 1 and len(pending) > 1:
            with ProcessPoolExecutor(max_workers=self.workers, initializer=install_caps,
                                     initargs=(capture_caps(),)) as executor:
                computed = list(executor.map(worker, ns, seeds))
        else:
            computed = [worker(n, s) for n, s in pending]
        for task, result in zip(pending, computed):
            results[task] = result
            self.computed.add(task)
            logging.debug(f"Trial n={task[0]} seed={task[1]}: {result[0]['status']}, ffd {result[0]['ffd']}")

        self.documents = {task: results[task][1] for task in tasks}
        self.trials_df = format_trials_dataframe(pd.DataFrame([results[task][0] for task in tasks], columns=TRIAL_COLUMNS))
        logging.info(f"Profiled {len(tasks)} trial(s) over n in {self.n_list}")
        return self.trials_df

    def to_csv(self, output_dir: str) -> Optional[str]:
        """
        Exports the trials to `ffd_seed<seed>.csv`; an empty batch still writes the header.

        Returns:
            The file path, or None if the write failed.
        """
        filepath = os.path.join(output_dir, f"ffd_seed{self.seed}.csv")
        try:
            format_trials_dataframe(self.trials_df).to_csv(filepath, index=False)
            logging.info(f"Successfully exported {len(self.trials_df)} trial(s) to {filepath}")
            return filepath
        except IOError as e:
            logging.error(f"Error exporting trials to {filepath}: {e}")
            return None

    def write_sidecars(self, output_dir: str) -> List[str]:
        """
        Writes one JSON provenance document per trial under `ffd_seed<seed>/`.
        """
        sidecar_dir = os.path.join(output_dir, f"ffd_seed{self.seed}")
        written = []
        try:
            os.makedirs(sidecar_dir, exist_ok=True)
            for (n, seed), document in sorted(self.documents.items()):
                filepath = os.path.join(sidecar_dir, f"n{n}_seed{seed}.json")
                with open(filepath, "w") as f:
                    f.write(dump_document(document))
                written.append(filepath)
        except IOError as e:
            logging.error(f"Error writing trial sidecars to {sidecar_dir}: {e}")
        return written

    def save_to_db(self):
        """
        Saves the freshly computed trials to the cache database.
        """
        if not self.computed:
            logging.info("No new trials to save to the database.")
            return

        database.create_tables()
        conn = database.get_db_connection()
        try:
            run_id = database.save_experiment_run(conn, datetime.now(), self.parameters(), self.version)
            if run_id:
                rows = self.trials_df.set_index(['n', 'seed'])
                for task in sorted(self.computed):
                    row = rows.loc[task].to_dict()
                    row.update({"n": task[0], "seed": task[1]})
                    for key in ("ffd", "solving_degree", "wall_time_ms"):
                        if pd.isna(row[key]):
                            row[key] = None
                        elif key != "wall_time_ms":
                            row[key] = int(row[key])
                    database.save_trial(conn, run_id, row, self.dmax, self.memory_budget, self.version,
                                        dump_document(self.documents[task]), self.variant)
                conn.commit()
                logging.info(f"Cached {len(self.computed)} trial(s) with run ID: {run_id}")
        except Exception as e:
            conn.rollback()
            logging.error(f"Error saving trials to the database: {e}")
        finally:
            conn.close()
