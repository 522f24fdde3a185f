# pyright: strict

import logging
from pathlib import Path


logger = logging.getLogger(__name__)


class FileReader:
    """
    A simple file reader
    """

    def get_file_contents(self, path: Path) -> str:
        """
        Read the contents of a UTF-8 text file.

        Args:
            path (Path): The path to the file to open, read, and close.
        Returns:
            str: The contents of the file.
        """

        with open(file=path, mode='r', encoding='utf-8') as file:
            return file.read()

    def get_file_bytes(self, path: Path) -> bytes:
        with open(file=path, mode='rb') as file:
            return file.read()


class FileWriter:
    """
    A simple file writer
    """

    def write_file_contents(self, path: Path, contents: str) -> None:
        """
        Write the given contents to a UTF-8 text file.

        Notes:
        - Parent directories are created
        - Lines end with '\\n' on every platform

        Args:
            path (Path): The path to the file to open, write, and close.
            contents (str): The contents to write to the file.
        """

        assert path.is_file() or not path.exists(), \
            f'File path is not a file: {path}'

        path.parent.mkdir(parents=True, exist_ok=True)

        with open(file=path, mode='w', encoding='utf-8', newline='\n') as file:
            file.write(contents)

    def write_file_bytes(self, path: Path, contents: bytes) -> None:
        assert path.is_file() or not path.exists(), \
            f'File path is not a file: {path}'

        path.parent.mkdir(parents=True, exist_ok=True)

        with open(file=path, mode='wb') as file:
            file.write(contents)


class ArtifactWriter(FileWriter):
    """
    A file writer that remembers what it wrote so a failed command can
    remove its partial outputs.
    """

    def __init__(self) -> None:
        super().__init__()

        self.written: list[Path] = []

    def write_file_contents(self, path: Path, contents: str) -> None:
        self.written.append(path)
        super().write_file_contents(path, contents)

    def write_file_bytes(self, path: Path, contents: bytes) -> None:
        self.written.append(path)
        super().write_file_bytes(path, contents)

    def track(self, path: Path) -> Path:
        """Register a file written by another library (e.g. a CSV writer)."""

        path.parent.mkdir(parents=True, exist_ok=True)
        self.written.append(path)
        return path

    def remove_written(self) -> None:
        for path in reversed(self.written):
            if path.is_file():
                logger.info('Removing partial artifact %s', path)
                path.unlink()

        self.written.clear()
