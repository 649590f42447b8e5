import os
import json
import multiprocessing
from concurrent.futures import ProcessPoolExecutor

import pytest
from unittest.mock import patch

from src.summation_poly_lab import database, gbprofiler, sumpoly
from src.summation_poly_lab.errors import ResourceCapError
from src.summation_poly_lab.experiments import ExperimentBatch, capture_caps, install_caps, run_trial
from src.summation_poly_lab.formatting import TRIAL_COLUMNS
from src.summation_poly_lab.schemas import dump_document

DB_FILE = "test_experiments_cache.db"

@pytest.fixture
def test_db():
    """Fixture to set up a test database file and patch the path."""
    if os.path.exists(DB_FILE):
        os.remove(DB_FILE)

    with patch.object(database, 'DB_PATH', DB_FILE):
        yield DB_FILE

    if os.path.exists(DB_FILE):
        os.remove(DB_FILE)

def test_empty_batch_writes_header_only(tmp_path):
    batch = ExperimentBatch([8, 12], trials=0, seed=1)
    trials_df = batch.run()

    assert trials_df.empty
    path = batch.to_csv(str(tmp_path))
    with open(path) as f:
        assert f.read().strip() == ','.join(TRIAL_COLUMNS)
    assert batch.write_sidecars(str(tmp_path)) == []

def test_batch_rows_sorted_and_reproducible(tmp_path):
    first = ExperimentBatch([5, 4], trials=2, seed=7)
    trials_df = first.run()

    assert list(zip(trials_df['n'], trials_df['seed'])) == [(4, 7), (4, 8), (5, 7), (5, 8)]
    assert set(trials_df['status']) <= {'resolved', 'unresolved', 'capped'}
    assert trials_df['wall_time_ms'].isna().all()

    second = ExperimentBatch([4, 5], trials=2, seed=7)
    second.run()
    first_dir, second_dir = tmp_path / "a", tmp_path / "b"
    first_dir.mkdir()
    second_dir.mkdir()
    with open(first.to_csv(str(first_dir))) as f1, open(second.to_csv(str(second_dir))) as f2:
        assert f1.read() == f2.read()

    sidecars = first.write_sidecars(str(first_dir))
    assert [os.path.basename(p) for p in sidecars] == ['n4_seed7.json', 'n4_seed8.json', 'n5_seed7.json', 'n5_seed8.json']
    with open(sidecars[0]) as f:
        document = json.load(f)
    assert document['schema_version'] == '1'
    assert document['kind'] == 'ffd-trial'
    assert (document['n'], document['seed']) == (4, 7)
    assert 'provenance' in document

def test_timings_fill_wall_time():
    row, document = run_trial(4, 0, dmax=4, memory_budget=1 << 26, enumeration_max_dim=16, timings=True)
    assert row['wall_time_ms'] is not None and row['wall_time_ms'] >= 0
    assert 'wall_time_ms' not in document.model_dump()

def test_unbuildable_instance_is_reported_capped():
    with patch('src.summation_poly_lab.experiments.gbprofiler.build_subspace_instance',
               side_effect=ResourceCapError("no usable draw")):
        row, document = run_trial(6, 3, dmax=4, memory_budget=1 << 26, enumeration_max_dim=16)

    assert row['status'] == 'capped'
    assert row['ffd'] is None and row['solving_degree'] is None
    assert document.provenance['error'] == 'no usable draw'

def test_spawned_workers_receive_configured_caps():
    with patch.object(gbprofiler, 'DRAW_RETRIES', 5), patch.object(sumpoly, 'MAX_ARITY', 4):
        caps = capture_caps()
    assert caps[(gbprofiler.__name__, 'DRAW_RETRIES')] == 5

    context = multiprocessing.get_context("spawn")
    with ProcessPoolExecutor(max_workers=1, mp_context=context, initializer=install_caps, initargs=(caps,)) as executor:
        assert executor.submit(capture_caps).result() == caps

def test_parallel_batch_hands_caps_to_workers():
    with patch('src.summation_poly_lab.experiments.ProcessPoolExecutor') as mock_executor, \
            patch.object(gbprofiler, 'DRAW_RETRIES', 0):
        mock_executor.return_value.__enter__.return_value.map.side_effect = lambda f, *args: map(f, *args)
        batch = ExperimentBatch([4], trials=2, seed=0, workers=2)
        trials_df = batch.run()
        expected = capture_caps()

    kwargs = mock_executor.call_args.kwargs
    assert kwargs['max_workers'] == 2
    assert kwargs['initializer'] is install_caps
    assert kwargs['initargs'] == (expected,)
    assert list(trials_df['status']) == ['capped', 'capped']

@pytest.mark.parametrize("kwargs", [
    {"n_list": [2], "trials": 1, "seed": 0},
    {"n_list": [3], "trials": 1, "seed": 0},
    {"n_list": [25], "trials": 1, "seed": 0},
    {"n_list": [8], "trials": -1, "seed": 0},
    {"n_list": [8], "trials": 1, "seed": 0, "dmax": 1},
    {"n_list": [8], "trials": 1, "seed": 0, "memory_budget": 0},
    {"n_list": [8], "trials": 1, "seed": 0, "workers": 0},
])
def test_caps_are_validated(kwargs):
    with pytest.raises(ResourceCapError):
        ExperimentBatch(**kwargs)

def test_cached_trials_are_reused(test_db, tmp_path):
    first = ExperimentBatch([4], trials=2, seed=0, use_cache=True)
    first.run()
    first.save_to_db()
    assert database.load_trial(4, 0, first.dmax, first.memory_budget, first.version) is not None

    second = ExperimentBatch([4], trials=2, seed=0, use_cache=True)
    with patch('src.summation_poly_lab.experiments.run_trial') as mock_run_trial:
        second.run()
    mock_run_trial.assert_not_called()
    assert second.computed == set()
    assert second.trials_df.to_csv(index=False) == first.trials_df.to_csv(index=False)
    assert [dump_document(d) for d in second.documents.values()] == [dump_document(d) for d in first.documents.values()]

    # nothing new to store
    second.save_to_db()

def test_cache_is_keyed_by_variant(test_db):
    first = ExperimentBatch([4], trials=1, seed=0, use_cache=True)
    first.run()
    first.save_to_db()

    variant = ExperimentBatch([4], trials=1, seed=0, add_trace_relation=True, use_cache=True)
    assert variant.variant == "random+trace"
    variant.run()
    assert variant.computed == {(4, 0)}
