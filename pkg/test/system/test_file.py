# pyright: strict

import tempfile
from pathlib import Path

from spikefraud.system.file import ArtifactWriter, FileReader, FileWriter
from test.test_case import TestCase


class TestFileWriter(TestCase):

    def setUp(self) -> None:
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        self.directory = Path(directory.name)

    def test_creates_parents_and_reads_back(self) -> None:
        # Arrange
        path = self.directory / 'a' / 'b' / 'report.json'

        # Act
        FileWriter().write_file_contents(path, '{}\n')
        FileWriter().write_file_bytes(path.with_suffix('.f32'), b'\x00\x01')

        # Assert
        self.assertEqual(FileReader().get_file_contents(path), '{}\n')
        self.assertEqual(FileReader().get_file_bytes(path.with_suffix('.f32')), b'\x00\x01')

    def test_writing_over_a_directory_fails(self) -> None:
        # Act & Assert
        with self.assertRaises(AssertionError):
            FileWriter().write_file_contents(self.directory, 'x')


class TestArtifactWriter(TestCase):

    def test_remove_written(self) -> None:
        # Arrange
        directory = tempfile.TemporaryDirectory()
        self.addCleanup(directory.cleanup)
        root = Path(directory.name)
        untouched = root / 'keep.txt'
        untouched.write_text('keep', encoding='utf-8')

        writer = ArtifactWriter()
        writer.write_file_contents(root / 'out' / 'metrics.json', '{}')
        writer.write_file_bytes(root / 'out' / 'params.f32', b'')
        tracked = writer.track(root / 'out' / 'data.csv')
        tracked.write_text('a\n', encoding='utf-8')
        writer.track(root / 'out' / 'never_written.csv')

        # Act
        with self.assertLogs('spikefraud.system.file', level='INFO'):
            writer.remove_written()

        # Assert
        self.assertEqual(list((root / 'out').iterdir()), [])
        self.assertTrue(untouched.is_file())
        self.assertEqual(writer.written, [])
