"""Tests for run checkpoints"""

import json
from fractions import Fraction

import pytest

from checkpoint import CheckpointManager, decode_partial, encode_partial, run_key
from config import Config
from errors import CheckpointCorrupt, HashMismatch


class TestRunKey:
    def test_depends_on_inputs(self):
        base = run_key(b"package", 1000, "1.0.0")
        assert base == run_key(b"package", 1000, "1.0.0")
        assert base != run_key(b"package", 1001, "1.0.0")
        assert base != run_key(b"package!", 1000, "1.0.0")
        assert base != run_key(b"package", 1000, "1.0.1")

    def test_depends_on_chunking(self, monkeypatch):
        base = run_key(b"package", 1000, "1.0.0")
        monkeypatch.setattr(Config, "THETA_CHUNKS", Config.THETA_CHUNKS + 1)
        assert run_key(b"package", 1000, "1.0.0") != base

    def test_depends_on_lll_delta(self, monkeypatch):
        base = run_key(b"package", 1000, "1.0.0")
        monkeypatch.setattr(Config, "LLL_DELTA", "3/4")
        assert run_key(b"package", 1000, "1.0.0") != base


class TestPartialEncoding:
    def test_counts_and_sums(self):
        counts = {(3, -1): 2, (3, 0): 1}
        sums = {(2, 1): (Fraction(5, 2), Fraction(-1, 3))}
        assert decode_partial(json.loads(json.dumps(encode_partial(counts)))) == counts
        assert decode_partial(json.loads(json.dumps(encode_partial(sums)))) == sums


class TestCheckpointManager:
    """Save, resume and recovery"""

    def test_roundtrip(self, tmp_path):
        path = tmp_path / "run.json"
        manager = CheckpointManager(path, "k1", 100, {'package': 'q5_31a'})
        manager.record(0, 0, {(1, 0): 3})
        manager.record(1, 2, {(3, 0): 1})
        manager.save()

        resumed = CheckpointManager(path, "k1", 100)
        assert resumed.load()
        assert resumed.completed == {(0, 0): {(1, 0): 3}, (1, 2): {(3, 0): 1}}
        assert not resumed.finished
        assert CheckpointManager.read_meta(path) == {'package': 'q5_31a', 'X': 100, 'finished': False}

    def test_no_file(self, tmp_path):
        assert not CheckpointManager(tmp_path / "none.json", "k", 1).load()

    def test_hash_mismatch(self, tmp_path):
        path = tmp_path / "run.json"
        CheckpointManager(path, "k1", 100).save()
        with pytest.raises(HashMismatch):
            CheckpointManager(path, "k2", 100).load()

    def test_saves_every_interval(self, tmp_path):
        path = tmp_path / "run.json"
        manager = CheckpointManager(path, "k", 10)
        for j in range(Config.CHECKPOINT_INTERVAL):
            manager.record(0, j, {(1, 0): j})
        assert path.exists()

    def test_restore_from_backup(self, tmp_path):
        path = tmp_path / "run.json"
        manager = CheckpointManager(path, "k", 10)
        manager.record(0, 0, {(1, 0): 1})
        manager.save()
        manager.record(0, 1, {(1, 0): 2})
        manager.save()
        path.write_text("{truncated")

        resumed = CheckpointManager(path, "k", 10)
        assert resumed.load()
        assert (0, 0) in resumed.completed

    def test_corrupt_without_backups(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("garbage")
        with pytest.raises(CheckpointCorrupt):
            CheckpointManager(path, "k", 10).load()

    def test_backups_rotate(self, tmp_path):
        path = tmp_path / "run.json"
        manager = CheckpointManager(path, "k", 10)
        for j in range(Config.CHECKPOINT_BACKUPS + 3):
            manager.record(0, j, {(1, 0): j})
            manager.save()
        assert len(manager._backups()) == Config.CHECKPOINT_BACKUPS

    def test_mark_finished(self, tmp_path):
        path = tmp_path / "run.json"
        manager = CheckpointManager(path, "k", 10)
        manager.mark_finished()
        resumed = CheckpointManager(path, "k", 10)
        resumed.load()
        assert resumed.finished
        assert CheckpointManager.read_meta(path)['finished']

    def test_resume_with_other_chunk_count_rejected(self, tmp_path, monkeypatch):
        path = tmp_path / "run.json"
        manager = CheckpointManager(path, run_key(b"package", 100), 100)
        manager.record(0, 0, {(1, 0): 3})
        manager.save()

        monkeypatch.setattr(Config, "THETA_CHUNKS", Config.THETA_CHUNKS * 2)
        with pytest.raises(HashMismatch, match="chunking"):
            CheckpointManager(path, run_key(b"package", 100), 100).load()
