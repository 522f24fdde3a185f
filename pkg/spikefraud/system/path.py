# pyright: strict

from pathlib import Path
from typing import Sequence, Set

from spikefraud.errors import InputError


def get_validated_file_path(
    path: Path,
    allowed_suffix: Sequence[str] | Set[str] | str | None = None,
) -> Path:
    """
    Validates that the provided path exists and is a file.

    Args:
        path (Path): The path to validate.
        allowed_suffix: optional accepted file suffix(es), e.g. '.json'
    Returns:
        Path: The validated, user expanded path.
    Raises:
        InputError: the path does not name an existing file of an allowed type
    """

    assert isinstance(path, Path), f'Path {path} is not a valid Path object'

    path = path.expanduser()

    if not path.exists():
        raise InputError(f'File {path} does not exist')
    if not path.is_file():
        raise InputError(f'Path {path} is not a file')

    if allowed_suffix is not None:
        if isinstance(allowed_suffix, str):
            allowed_suffix = (allowed_suffix,)

        if path.suffix not in allowed_suffix:
            raise InputError(f'File {path} is not a valid file type ({allowed_suffix})')

    return path
