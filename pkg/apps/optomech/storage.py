"""
Result files: CSV and JSON emitters, manifests and config hashes.

Every file is written to a temporary sibling and renamed into place, so a reader
never sees a partially written result.
"""

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from importlib import metadata
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .conf import get_setting
from .exceptions import ConfigurationError

logger = logging.getLogger('optomech')

FORMATS = ('csv', 'json')
TRACKED_PACKAGES = ('numpy', 'scipy', 'Django')


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def to_json(data: Any) -> str:
    return json.dumps(data, indent=2, sort_keys=True, default=_json_default, allow_nan=False) + '\n'


def config_hash(config: Dict[str, Any]) -> str:
    """sha256 of the canonical (sorted, compact) JSON form."""
    canonical = json.dumps(config, sort_keys=True, separators=(',', ':'), default=_json_default)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def package_versions() -> Dict[str, str]:
    versions = {}
    for name in TRACKED_PACKAGES:
        try:
            versions[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            versions[name] = 'unknown'
    return versions


# ========== Paths ==========

def resolve_output_path(output: Optional[str], default_stem: str, fmt: str) -> Path:
    """
    Bare file names (and a missing --output) land in OMBELL_OUTPUT_DIR; a missing
    suffix is taken from the format.
    """
    if fmt not in FORMATS:
        raise ConfigurationError(f"format must be one of {FORMATS}, got {fmt!r}")
    output_dir = Path(get_setting('OMBELL_OUTPUT_DIR'))
    path = Path(output) if output else Path(f"{default_stem}.{fmt}")
    if len(path.parts) == 1 and not path.is_absolute():
        path = output_dir / path
    if not path.suffix:
        path = path.with_suffix(f".{fmt}")
    return path


def labelled_path(path: Path, label: str) -> Path:
    """results/fig4.csv + 'baseline_sql' -> results/fig4_baseline_sql.csv"""
    return path.with_name(f"{path.stem}_{label}{path.suffix}")


def manifest_path_for(path: Path) -> Path:
    return path.with_name(f"{path.stem}.manifest.json")


# ========== Writers ==========

def atomic_write_text(path: Path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        handle, temporary = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix='.tmp')
        try:
            with os.fdopen(handle, 'w', encoding='utf-8', newline='') as stream:
                stream.write(text)
            os.replace(temporary, path)
        except BaseException:
            if os.path.exists(temporary):
                os.unlink(temporary)
            raise
    except OSError as exc:
        raise ConfigurationError(f"Cannot write {path}: {exc}") from exc
    logger.info(f"Saved {path} ({len(text)} bytes)")
    return path


def write_json(path: Path, data: Any) -> Path:
    return atomic_write_text(path, to_json(data))


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Comma-separated, '.' decimals, header row, LF line endings."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return atomic_write_text(path, buffer.getvalue())


def write_manifest(output_path: Path, manifest: Dict[str, Any]) -> Path:
    return write_json(manifest_path_for(output_path), manifest)


# ========== Readers ==========

def read_json(path: Path) -> Any:
    try:
        with open(path, encoding='utf-8') as stream:
            return json.load(stream)
    except FileNotFoundError:
        raise ConfigurationError(f"File not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"Invalid JSON in {path}: {exc}") from exc


def read_csv(path: Path) -> Tuple[List[str], List[List[str]]]:
    try:
        with open(path, encoding='utf-8', newline='') as stream:
            records = list(csv.reader(stream))
    except FileNotFoundError:
        raise ConfigurationError(f"File not found: {path}")
    if not records:
        raise ConfigurationError(f"Empty CSV file: {path}")
    return records[0], records[1:]
