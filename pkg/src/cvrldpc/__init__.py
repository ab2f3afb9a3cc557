"""Rate-compatible extended WiMAX LDPC codec and simulation toolkit."""

from pathlib import Path

__version__ = "0.1.0"

MOTHER_R34A = "wimax_r34a_z24.txt"
WIMAX_R12 = "wimax_r12_z36.txt"

_DATA_DIR = Path(__file__).parent / "data"


def data_path(name: str) -> Path:
    """Path of a bundled base-matrix file (see MOTHER_R34A, WIMAX_R12)."""
    p = _DATA_DIR / name
    if not p.exists():
        raise FileNotFoundError(f"no bundled data file named {name!r}")
    return p
