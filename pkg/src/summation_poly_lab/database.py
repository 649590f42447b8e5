import sqlite3
import logging
import json
from pathlib import Path
import pandas as pd
from datetime import datetime, timedelta
from typing import Any, Dict, Optional

# Define the path for the trial cache in a dedicated data directory
DB_PATH = Path(__file__).parent.parent.parent / "data" / "experiments.db"

def get_db_connection() -> sqlite3.Connection:
    """Establishes a connection to the SQLite database."""
    Path(DB_PATH).parent.mkdir(parents=True, exist_ok=True)
    conn = sqlite3.connect(DB_PATH)
    conn.execute("PRAGMA foreign_keys = ON;")  # Enforce foreign key constraints
    conn.row_factory = sqlite3.Row
    return conn

def create_tables():
    """Creates the necessary tables in the database if they don't already exist."""
    conn = get_db_connection()
    cursor = conn.cursor()

    # One row per `ffd run` invocation
    cursor.execute("""
        CREATE TABLE IF NOT EXISTS experiment_runs (
            run_id INTEGER PRIMARY KEY AUTOINCREMENT,
            creation_timestamp INTEGER NOT NULL,
            version TEXT NOT NULL,
            parameters TEXT NOT NULL
        );
    """)

    # Profiled trials; the UNIQUE key is the cache key
    cursor.execute("""
        CREATE TABLE IF NOT EXISTS trial_results (
            trial_id INTEGER PRIMARY KEY AUTOINCREMENT,
            run_id INTEGER NOT NULL,
            n INTEGER NOT NULL,
            seed INTEGER NOT NULL,
            dmax INTEGER NOT NULL,
            memory_budget INTEGER NOT NULL,
            version TEXT NOT NULL,
            variant TEXT NOT NULL,
            status TEXT NOT NULL,
            ffd INTEGER,
            solving_degree INTEGER,
            matrix_max_dims TEXT NOT NULL,
            wall_time_ms REAL,
            document TEXT NOT NULL,
            FOREIGN KEY (run_id) REFERENCES experiment_runs (run_id) ON DELETE CASCADE,
            UNIQUE(n, seed, dmax, memory_budget, version, variant)
        );
    """)

    conn.commit()
    conn.close()

def purge_old_runs(retention_days: int):
    """Removes experiment runs and their cached trials older than the specified retention period."""
    conn = get_db_connection()
    cursor = conn.cursor()

    cutoff_date = datetime.now() - timedelta(days=retention_days)

    cursor.execute("SELECT run_id FROM experiment_runs WHERE creation_timestamp < ?", (int(cutoff_date.timestamp()),))
    old_runs = cursor.fetchall()

    if not old_runs:
        logging.info("No old experiment runs to purge.")
        conn.close()
        return

    logging.info(f"Found {len(old_runs)} old run(s) to purge.")

    # Cached trials go with their run through ON DELETE CASCADE.
    cursor.executemany("DELETE FROM experiment_runs WHERE run_id = ?", [(row["run_id"],) for row in old_runs])

    conn.commit()
    conn.close()
    logging.info(f"Successfully purged {len(old_runs)} old experiment run(s).")

def save_experiment_run(conn: sqlite3.Connection, creation_timestamp: datetime, parameters: Dict[str, Any], version: str) -> Optional[int]:
    """
    Saves an experiment run entry to the database.

    Returns:
        The ID of the newly created run.
    """
    cursor = conn.cursor()
    cursor.execute("INSERT INTO experiment_runs (creation_timestamp, version, parameters) VALUES (?, ?, ?)",
                   (int(creation_timestamp.timestamp()), version, json.dumps(parameters, sort_keys=True)))
    conn.commit()
    logging.info(f"Experiment run at {creation_timestamp} recorded.")
    return cursor.lastrowid

def save_trial(conn: sqlite3.Connection, run_id: int, row: Dict[str, Any], dmax: int, memory_budget: int, version: str, document: str,
               variant: str = "random"):
    """
    Saves one profiled trial. An existing row with the same cache key is kept.

    Args:
        conn: An open connection; the caller commits.
        run_id: The experiment run the trial was computed in.
        row: The CSV row (n, seed, ffd, solving_degree, matrix_max_dims, wall_time_ms, status).
        document: The JSON sidecar text.
        variant: How the instance was built, e.g. "random" or "fixed+trace".
    """
    cursor = conn.cursor()
    cursor.execute("""
        INSERT OR IGNORE INTO trial_results (run_id, n, seed, dmax, memory_budget, version, variant, status, ffd, solving_degree, matrix_max_dims, wall_time_ms, document)
        VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)
    """, (run_id, row["n"], row["seed"], dmax, memory_budget, version, variant, row["status"], row["ffd"], row["solving_degree"],
          row["matrix_max_dims"], row.get("wall_time_ms"), document))
    logging.debug(f"Cached trial n={row['n']} seed={row['seed']}.")

def load_trial(n: int, seed: int, dmax: int, memory_budget: int, version: str, variant: str = "random") -> Optional[Dict[str, Any]]:
    """
    Looks up a cached trial.

    Returns:
        A dict with the CSV row fields plus 'document', or None on a cache miss.
    """
    conn = get_db_connection()
    cursor = conn.cursor()
    cursor.execute("""
        SELECT n, seed, status, ffd, solving_degree, matrix_max_dims, wall_time_ms, document
        FROM trial_results
        WHERE n = ? AND seed = ? AND dmax = ? AND memory_budget = ? AND version = ? AND variant = ?
    """, (n, seed, dmax, memory_budget, version, variant))
    result = cursor.fetchone()
    conn.close()

    if result is None:
        return None
    return dict(result)

def load_trials(run_id: int) -> pd.DataFrame:
    """
    Loads every trial first computed in the given run, sorted by n then seed.
    """
    conn = get_db_connection()
    trials_query = """
        SELECT n, seed, ffd, solving_degree, matrix_max_dims, wall_time_ms, status
        FROM trial_results
        WHERE run_id = ?
        ORDER BY n, seed
    """
    trials_df = pd.read_sql_query(trials_query, conn, params=(run_id,))
    conn.close()
    return trials_df
