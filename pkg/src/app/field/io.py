"""Binary field files: 32-byte header, little-endian complex128 body, JSON sidecar."""

import logging
from pathlib import Path

import numpy as np

from app.shared.consts import FIELD_HEADER_BYTES, FIELD_MAGIC
from app.shared.exceptions import FieldError

from .models import Field3, FieldMetadata, Grid
from .utils import norm_l2sq

logger = logging.getLogger(__name__)

HEADER_DTYPE = np.dtype(
    [("magic", "S4"), ("n", "<u4"), ("box_half_width", "<f8"), ("reserved", "V16")]
)
assert HEADER_DTYPE.itemsize == FIELD_HEADER_BYTES


def sidecar_path(path: Path) -> Path:
    return path.with_suffix(".json")


def write_field(path: Path, field: Field3) -> Path:
    path = Path(path)
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header["magic"] = FIELD_MAGIC
    header["n"] = field.grid.n
    header["box_half_width"] = field.grid.box_half_width
    body = np.ascontiguousarray(field.values, dtype="<c16")

    with path.open("wb") as fh:
        fh.write(header.tobytes())
        fh.write(body.tobytes(order="C"))

    metadata = FieldMetadata(
        n=field.grid.n,
        box_half_width=field.grid.box_half_width,
        spacing=field.grid.h,
        l2_norm_sq=norm_l2sq(field),
    )
    sidecar_path(path).write_text(metadata.model_dump_json(indent=2))
    logger.info(f"Wrote field {path} (n={field.grid.n})")
    return path


def read_field(path: Path, real: bool = False) -> Field3:
    """Load a field; ``real`` drops the imaginary part after checking it vanishes."""
    path = Path(path)
    if not path.exists():
        raise FieldError(f"Field file not found: {path}")
    raw = path.read_bytes()
    if len(raw) < FIELD_HEADER_BYTES:
        raise FieldError(f"Truncated field file: {path}")

    header = np.frombuffer(raw[:FIELD_HEADER_BYTES], dtype=HEADER_DTYPE)[0]
    if header["magic"] != FIELD_MAGIC:
        raise FieldError(f"Bad magic {header['magic']!r} in {path}")
    grid = Grid(n=int(header["n"]), box_half_width=float(header["box_half_width"]))

    body = np.frombuffer(raw[FIELD_HEADER_BYTES:], dtype="<c16")
    if body.size != grid.n**3:
        raise FieldError(f"Expected {grid.n**3} values in {path}, found {body.size}")
    values = body.reshape(grid.shape).astype(np.complex128)
    if real:
        if np.max(np.abs(values.imag), initial=0.0) > 0.0:
            raise FieldError(f"Field in {path} is not real")
        values = values.real
    return Field3(grid=grid, values=values)
