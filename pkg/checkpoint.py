"""
Checkpoint Manager
JSON checkpoints of partially enumerated theta series, with rotating backups and restore
"""

import hashlib
import json
import shutil
from datetime import datetime
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from config import Config
from errors import CheckpointCorrupt, HashMismatch
from logger import logger

ChunkKey = Tuple[int, int]


def run_key(package_bytes: bytes, X: int, version: str = None) -> str:
    """
    sha256 over the package file, the program version, the bound and the settings
    that shape chunk results (chunk count and LLL delta)
    """
    digest = hashlib.sha256()
    digest.update(package_bytes)
    settings = f"|{version or Config.APP_VERSION}|{X}|chunks={Config.THETA_CHUNKS}|delta={Config.LLL_DELTA}"
    digest.update(settings.encode('utf-8'))
    return digest.hexdigest()


def encode_partial(partial: Dict) -> list:
    """Chunk result as JSON: [[a, b, count]] or [[a, b, "r", "s"]]"""
    rows = []
    for (a, b), value in sorted(partial.items()):
        if isinstance(value, tuple):
            rows.append([a, b, str(value[0]), str(value[1])])
        else:
            rows.append([a, b, int(value)])
    return rows


def decode_partial(rows: list) -> Dict:
    partial = {}
    for row in rows:
        if len(row) == 3:
            partial[(row[0], row[1])] = int(row[2])
        else:
            partial[(row[0], row[1])] = (Fraction(row[2]), Fraction(row[3]))
    return partial


class CheckpointManager:
    """One checkpoint file per run; every write first backs up the previous file"""

    def __init__(self, file_path: Path, key: str, X: int, meta: Optional[Dict[str, Any]] = None):
        self.file_path = Path(file_path)
        self.key = key
        self.X = X
        self.meta = meta or {}
        self.backup_dir = self.file_path.parent / "backups"
        self.completed: Dict[ChunkKey, Dict] = {}
        self.finished = False
        self._unsaved = 0

    def _empty(self) -> Dict[str, Any]:
        return {
            'key': self.key, 'version': Config.APP_VERSION, 'X': self.X,
            'meta': self.meta, 'finished': False, 'chunks': {},
        }

    def _read(self, path: Path) -> Dict[str, Any]:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        if not isinstance(data, dict) or 'key' not in data or 'chunks' not in data:
            raise ValueError("missing checkpoint fields")
        return data

    @classmethod
    def read_meta(cls, file_path: Path) -> Dict[str, Any]:
        """Run settings stored with a checkpoint (falls back to its backups)"""
        probe = cls(file_path, "", 0)
        try:
            data = probe._read(probe.file_path)
        except (json.JSONDecodeError, ValueError, OSError) as e:
            data = probe._restore_from_backup()
            if data is None:
                raise CheckpointCorrupt(f"{file_path} and its backups are unreadable") from e
        return dict(data.get('meta', {}), X=data.get('X'), finished=bool(data.get('finished')))

    def load(self) -> bool:
        """
        Load an existing checkpoint

        Returns:
            True if a checkpoint was found

        Raises:
            HashMismatch: checkpoint was written for another package, version or bound
            CheckpointCorrupt: the file and every backup are unreadable
        """
        if not self.file_path.exists():
            return False
        try:
            data = self._read(self.file_path)
        except (json.JSONDecodeError, ValueError, OSError) as e:
            logger.error(f"Checkpoint {self.file_path} unreadable: {e}")
            data = self._restore_from_backup()
            if data is None:
                raise CheckpointCorrupt(f"{self.file_path} and its backups are unreadable") from e

        if data['key'] != self.key:
            raise HashMismatch(f"{self.file_path} was written for a different package, version, bound or chunking")
        self.completed = {
            tuple(int(x) for x in name.split(':')): decode_partial(rows)
            for name, rows in data['chunks'].items()
        }
        self.finished = bool(data.get('finished'))
        logger.info(f"Resumed checkpoint {self.file_path}: {len(self.completed)} chunks done")
        return True

    def record(self, lattice: int, chunk: int, partial: Dict) -> None:
        self.completed[(lattice, chunk)] = partial
        self._unsaved += 1
        if self._unsaved >= Config.CHECKPOINT_INTERVAL:
            self.save()

    def mark_finished(self) -> None:
        self.finished = True
        self.save()

    def save(self) -> None:
        data = self._empty()
        data['finished'] = self.finished
        data['chunks'] = {f"{i}:{j}": encode_partial(p) for (i, j), p in sorted(self.completed.items())}
        self.file_path.parent.mkdir(parents=True, exist_ok=True)
        if self.file_path.exists():
            self._create_backup()
        tmp = self.file_path.with_suffix('.tmp')
        with open(tmp, 'w', encoding='utf-8') as f:
            json.dump(data, f)
        tmp.replace(self.file_path)
        self._unsaved = 0
        logger.debug(f"Checkpoint saved: {len(self.completed)} chunks")

    def _backups(self):
        return sorted(
            self.backup_dir.glob(f"{self.file_path.stem}_backup_*.json"),
            key=lambda p: p.name,
            reverse=True,
        )

    def _create_backup(self) -> None:
        try:
            self.backup_dir.mkdir(parents=True, exist_ok=True)
            timestamp = datetime.now().strftime("%Y%m%d_%H%M%S_%f")
            shutil.copy2(self.file_path, self.backup_dir / f"{self.file_path.stem}_backup_{timestamp}.json")
            for old in self._backups()[Config.CHECKPOINT_BACKUPS:]:
                old.unlink()
        except OSError as e:
            logger.warning(f"Failed to create checkpoint backup: {e}")

    def _restore_from_backup(self) -> Optional[Dict[str, Any]]:
        for backup in self._backups():
            try:
                data = self._read(backup)
            except (json.JSONDecodeError, ValueError, OSError):
                continue
            logger.info(f"Restored checkpoint from backup: {backup}")
            return data
        return None
