import csv
import json
import logging
import os
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator, Mapping

from pydantic import BaseModel

from app.shared.decorators import retry_on_fail
from app.shared.exceptions import OutputLockedError
from app.shared.paths import LOCK_FILE_NAME

logger = logging.getLogger(__name__)


@retry_on_fail(max_retries=3, sleep_interval=0.5, exceptions=(FileExistsError,))
def _acquire(lock: Path) -> None:
    fd = os.open(lock, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    with os.fdopen(fd, "w") as fh:
        fh.write(f"{os.getpid()}\n")


@contextmanager
def output_lock(out_dir: Path) -> Iterator[Path]:
    """Hold ``<out_dir>/.spoison.lock`` while an experiment writes into ``out_dir``."""
    out_dir.mkdir(parents=True, exist_ok=True)
    lock = out_dir / LOCK_FILE_NAME
    try:
        _acquire(lock)
    except FileExistsError as e:
        raise OutputLockedError(f"{out_dir} is locked by another run ({lock})") from e
    try:
        yield out_dir
    finally:
        lock.unlink(missing_ok=True)


def write_json(path: Path, model: BaseModel) -> Path:
    path.write_text(model.model_dump_json(indent=2, by_alias=True) + "\n")
    logger.info(f"Wrote {path}")
    return path


def write_json_lines(path: Path, models: Iterable[BaseModel]) -> Path:
    with open(path, "w") as fh:
        for model in models:
            fh.write(model.model_dump_json(by_alias=True) + "\n")
    logger.info(f"Wrote {path}")
    return path


def write_rows(path: Path, columns: list[str], rows: Iterable[Mapping[str, object]]) -> Path:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({c: repr(float(row[c])) if isinstance(row[c], float) else row[c] for c in columns})
    logger.info(f"Wrote {path}")
    return path


def error_record(error: Exception) -> str:
    return json.dumps({"error": type(error).__name__, "message": str(error)})
