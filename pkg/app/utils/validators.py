"""Validation utilities."""
from pathlib import Path
from typing import Optional, Tuple


def validate_input_file(path: Optional[str]) -> Tuple[bool, str]:
    """
    Validate a solver input path.

    Args:
        path: Path given on the command line

    Returns:
        Tuple of (is_valid, message)
    """
    if not path:
        return False, "An input file is required"

    p = Path(path)
    if not p.exists():
        return False, f"Input file {path} does not exist"

    if not p.is_file():
        return False, f"{path} is not a file"

    return True, "Input file is valid"


def validate_bench_dir(path: Optional[str]) -> Tuple[bool, str]:
    """
    Validate a benchmark directory.

    Args:
        path: Directory given with --bench

    Returns:
        Tuple of (is_valid, message)
    """
    if not path:
        return False, "A benchmark directory is required"

    if not Path(path).is_dir():
        return False, f"{path} is not a directory"

    return True, "Benchmark directory is valid"


def validate_box(lo: int, hi: int, max_width: int = 10 ** 7) -> Tuple[bool, str]:
    """
    Validate an oracle box.

    Args:
        lo: Lower end
        hi: Upper end
        max_width: Largest accepted number of values

    Returns:
        Tuple of (is_valid, message)
    """
    if lo > hi:
        return False, f"Box lower end {lo} exceeds upper end {hi}"

    if hi - lo + 1 > max_width:
        return False, "Box is too wide to enumerate"

    return True, "Box is valid"
