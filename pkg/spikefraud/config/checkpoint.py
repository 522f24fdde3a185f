# pyright: strict

"""
Checkpoint directory layout:

    manifest.json   model config, schema and its digest, normalization
                    statistics, calibrated threshold, hyperparameters,
                    creation metadata and the tensor directory
    params.f32      every parameter, little-endian float32, concatenated in
                    tensor directory order
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

import numpy as np

from spikefraud.config.serialization import JsonSerializer, get_float
from spikefraud.core.tensor import Array
from spikefraud.data.dataset import NormStats
from spikefraud.data.schema import Schema
from spikefraud.errors import ConfigError, IntegrityError, SchemaError
from spikefraud.model.csnpc import PARAM_NAMES, ModelConfig, ModelParams
from spikefraud.search.space import HyperConfig
from spikefraud.system.file import FileReader, FileWriter


FORMAT = 'spikefraud-checkpoint'
VERSION = 1
MANIFEST_NAME = 'manifest.json'
BLOB_NAME = 'params.f32'
BLOB_DTYPE = np.dtype('<f4')


@dataclass
class Checkpoint:
    model_config: ModelConfig
    params: ModelParams
    schema: Schema
    norm_stats: NormStats
    threshold: float
    hyper: HyperConfig | None = None
    metadata: dict[str, Any] = field(default_factory=lambda: {})


class CheckpointStore:
    """Saves and loads checkpoint directories."""

    def __init__(
        self,
        file_reader: FileReader,
        file_writer: FileWriter,
        serializer: JsonSerializer,
    ) -> None:
        super().__init__()

        self.file_reader = file_reader
        self.file_writer = file_writer
        self.serializer = serializer

    def save(self, checkpoint: Checkpoint, directory: Path) -> None:
        tensors: list[dict[str, Any]] = []
        chunks: list[bytes] = []
        offset = 0
        for name, array in checkpoint.params:
            chunk = np.ascontiguousarray(array, dtype=BLOB_DTYPE).tobytes()
            tensors.append({
                'name': name,
                'shape': list(array.shape),
                'offset': offset,
                'length': len(chunk),
            })
            chunks.append(chunk)
            offset += len(chunk)

        manifest = {
            'format': FORMAT,
            'version': VERSION,
            'model_config': checkpoint.model_config.to_data(),
            'schema': checkpoint.schema.to_data(),
            'schema_digest': checkpoint.schema.digest(),
            'norm_stats': checkpoint.norm_stats.to_data(),
            'threshold': checkpoint.threshold,
            'hyper': checkpoint.hyper.to_data() if checkpoint.hyper is not None else None,
            'metadata': checkpoint.metadata,
            'blob': BLOB_NAME,
            'tensors': tensors,
        }

        self.file_writer.write_file_bytes(directory / BLOB_NAME, b''.join(chunks))
        self.file_writer.write_file_contents(
            directory / MANIFEST_NAME,
            self.serializer.get_serialized_data(manifest),
        )

    def load(self, directory: Path) -> Checkpoint:
        """
        Raises:
            IntegrityError: missing files, a malformed manifest, or a blob whose
                length disagrees with the tensor directory
        """

        try:
            manifest = json.loads(self.file_reader.get_file_contents(directory / MANIFEST_NAME))
            blob = self.file_reader.get_file_bytes(directory / BLOB_NAME)
        except (OSError, ValueError) as e:
            raise IntegrityError(f'Cannot read checkpoint {directory}: {e}') from e

        if not isinstance(manifest, dict) or manifest.get('format') != FORMAT:
            raise IntegrityError(f'{directory / MANIFEST_NAME} is not a checkpoint manifest')

        try:
            return self._create_from_manifest(manifest, blob)  # pyright: ignore[reportUnknownArgumentType]
        except (AttributeError, IndexError, KeyError, TypeError, ValueError, ConfigError, SchemaError) as e:
            raise IntegrityError(f'Malformed checkpoint manifest in {directory}: {e}') from e

    def _create_from_manifest(self, manifest: Mapping[str, Any], blob: bytes) -> Checkpoint:
        model_config = ModelConfig.create_from_data(manifest['model_config'])
        schema = Schema.create_from_data(manifest['schema'])
        if schema.digest() != manifest['schema_digest']:
            raise IntegrityError('Schema digest does not match the stored schema')

        params = self._read_params(manifest['tensors'], blob, model_config)
        hyper = manifest.get('hyper')

        return Checkpoint(
            model_config=model_config,
            params=params,
            schema=schema,
            norm_stats=NormStats.create_from_data(manifest['norm_stats']),
            threshold=get_float(manifest['threshold']),
            hyper=HyperConfig.create_from_data(hyper) if hyper is not None else None,
            metadata=dict(manifest.get('metadata') or {}),
        )

    def _read_params(
        self,
        tensors: list[Mapping[str, Any]],
        blob: bytes,
        model_config: ModelConfig,
    ) -> ModelParams:
        total = sum(int(entry['length']) for entry in tensors)
        if total != len(blob):
            raise IntegrityError(
                f'Tensor directory covers {total} bytes but the blob has {len(blob)}',
            )

        expected_shapes = model_config.get_param_shapes()
        arrays: dict[str, Array] = {}
        offset = 0
        for entry in tensors:
            name = str(entry['name'])
            shape = tuple(int(d) for d in entry['shape'])
            length = int(entry['length'])

            if expected_shapes.get(name) != shape:
                raise IntegrityError(f'Tensor {name!r} has shape {shape}, expected {expected_shapes.get(name)}')
            if int(entry['offset']) != offset or length != int(np.prod(shape)) * BLOB_DTYPE.itemsize:
                raise IntegrityError(f'Tensor {name!r} has an inconsistent offset or length')

            values = np.frombuffer(blob, dtype=BLOB_DTYPE, count=length // BLOB_DTYPE.itemsize, offset=offset)
            arrays[name] = values.astype(np.float64).reshape(shape)
            offset += length

        missing = [name for name in PARAM_NAMES if name not in arrays]
        if missing:
            raise IntegrityError(f'Checkpoint is missing tensors {missing}')

        return ModelParams(arrays)


def to_stored_precision(params: ModelParams) -> ModelParams:
    """The parameters exactly as a saved checkpoint reloads them."""

    return ModelParams({
        name: array.astype(BLOB_DTYPE).astype(np.float64)
        for name, array in params
    })
