# pyright: strict

import json
import math
from pathlib import Path
from typing import Any, Union

import yaml

from spikefraud.system.file import FileReader


YamlSerializable = Union[
    None,
    str,
    int,
    float,
    bool,
    list['YamlSerializable'],
    dict[str, 'YamlSerializable']
]


class YamlDeserializer:
    """
    A deserializer for run configuration, schema and hyperparameter files.

    Notes:
    - JSON files are read with the same loader, JSON being a YAML subset
    - Performs static interpolations ($pwd)
    """

    def get_data_from_file(self, file_reader: FileReader, path: Path) -> YamlSerializable:
        """
        Read YAML (or JSON) data from a file.

        Notes:
        - `$pwd` in string values is replaced by the directory of the file,
          so relative data paths can be written next to a run configuration

        Args:
            file_reader (FileReader): The file reader to use.
            path (Path): The path to the file.

        Returns:
            YamlSerializable: The deserialized data.
        """

        content: str = file_reader.get_file_contents(path)
        data = self.get_deserialized_data(content)

        directory_path = str(path.parent.expanduser().resolve())

        return self.get_interpolated_data(
            data,
            {
                '$pwd': directory_path,
            },
        )

    def get_interpolated_data(
        self,
        data: YamlSerializable,
        replacements: dict[str, str],
    ) -> YamlSerializable:
        """
        Returns a new data structure with the replacements applied to all
        string leaf nodes.

        Notes:
        - New collections are created (originals objects are not modified).
        - Dictionary/map keys are not modified.
        """

        if isinstance(data, str):
            for search, replace in replacements.items():
                data = data.replace(search, replace)

        if isinstance(data, list):
            data = [
                self.get_interpolated_data(item, replacements)
                for item in data
            ]

        if isinstance(data, dict):
            data = {
                key: self.get_interpolated_data(item, replacements)
                for key, item in data.items()
            }

        return data

    def get_deserialized_data(self, content: str) -> YamlSerializable:
        return yaml.load(content, Loader=yaml.SafeLoader)


class JsonSerializer:
    """
    Serializer for reports, checkpoint manifests and the Q-table.

    Notes:
    - Keys keep insertion order and the output ends with a newline, so equal
      data always gives byte-identical files
    - Non-finite floats are written as the strings "inf", "-inf" and "nan";
      plain JSON has no literal for them
    """

    def get_serialized_data(self, data: Any) -> str:
        return json.dumps(
            self.get_encodable_data(data),
            indent=2,
            allow_nan=False,
        ) + '\n'

    def get_encodable_data(self, data: Any) -> Any:
        if isinstance(data, float):
            if math.isnan(data):
                return 'nan'
            if math.isinf(data):
                return 'inf' if data > 0 else '-inf'
            return data

        if isinstance(data, (list, tuple)):
            return [self.get_encodable_data(item) for item in data]  # pyright: ignore[reportUnknownVariableType]

        if isinstance(data, dict):
            return {
                str(key): self.get_encodable_data(item)  # pyright: ignore[reportUnknownArgumentType]
                for key, item in data.items()  # pyright: ignore[reportUnknownVariableType]
            }

        return data


def get_float(value: object) -> float:
    """Inverse of the non-finite float encoding of `JsonSerializer`."""

    if isinstance(value, str):
        return float(value)

    assert isinstance(value, (int, float)), f'Not a number: {value!r}'
    return float(value)
