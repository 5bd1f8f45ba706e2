import numpy as np
import pytest

from roofs.datagen import GenConfig, make_instance
from roofs.streamio import (
    GROUND_TRUTH_NAME,
    StreamError,
    iter_stream,
    load_ground_truth,
    load_response,
    read_manifest,
    write_stream,
)


@pytest.fixture
def written(tmp_path):
    cfg = GenConfig(p=10, n=8, mu=3, corruption_ratio=0.25, sigma=0.1, seed=0)
    design, y, truth = make_instance(cfg)
    manifest = write_stream(design, y, truth, batch_size=4, out_dir=tmp_path)
    return tmp_path, design, y, truth, manifest


def test_batch_file_count_is_ceiling_division(written):
    _, _, _, _, manifest = written
    assert len(manifest.batch_files) == 3  # 4, 4, 2


def test_round_trip_bit_exact(written):
    tmp, design, y, truth, _ = written
    batches = list(iter_stream(tmp))
    assert sum(len(b.ids) for b in batches) == 10
    stacked = np.vstack([b.values for b in batches])
    assert np.array_equal(stacked, design.rows(np.arange(10)))
    assert np.array_equal(load_response(tmp), y)


def test_ground_truth_round_trip(written):
    tmp, _, _, truth, _ = written
    loaded = load_ground_truth(tmp)
    assert loaded.beta_star == truth.beta_star
    assert loaded.s_star == truth.s_star
    assert np.array_equal(loaded.u, truth.u)
    assert loaded.psi_star == truth.psi_star


def test_tampering_detected(written):
    tmp, *_ , manifest = written
    victim = tmp / manifest.batch_files[1]
    text = victim.read_text().replace("0", "1", 1)
    victim.write_text(text)
    with pytest.raises(StreamError, match="checksum"):
        list(iter_stream(tmp))


def test_missing_manifest(tmp_path):
    with pytest.raises(StreamError, match="manifest"):
        read_manifest(tmp_path)


def test_manifest_covers_disjoint_ids(written):
    tmp, *_ = written
    seen = []
    for batch in iter_stream(tmp):
        seen.extend(batch.ids.ids.tolist())
    assert sorted(seen) == list(range(10))
    assert len(set(seen)) == len(seen)


def test_ground_truth_separate_file(written):
    tmp, *_ , manifest = written
    assert GROUND_TRUTH_NAME not in manifest.batch_files
    # a stream consumer reading only manifest-listed files never touches it
    assert (tmp / GROUND_TRUTH_NAME).exists()


def test_solver_runs_from_files(written):
    tmp, _, y, truth, _ = written
    from roofs.solver import SolverConfig, solve

    res = solve(iter_stream(tmp), load_response(tmp), SolverConfig(mu=3))
    assert len(res.psi_hat) <= 3
