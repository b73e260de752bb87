from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from nn.network import encode


@dataclass
class LatentMatrix:
    values: np.ndarray
    contig_ids: list
    sample_of_contig: list

    def __post_init__(self):
        self.values = np.atleast_2d(np.asarray(self.values, dtype=np.float64))
        if self.values.shape[0] != len(self.contig_ids):
            raise ValidationError(
                'Число строк латентной матрицы не равно числу контигов',
                code='misaligned')
        if not np.isfinite(self.values).all():
            raise ValidationError(
                'Латентная матрица содержит нечисловые значения',
                code='non_finite')

    @property
    def n_contigs(self):
        return self.values.shape[0]

    @classmethod
    def from_features(cls, features, values):
        return cls(values=values, contig_ids=list(features.contig_ids),
                   sample_of_contig=list(features.sample_of_contig))


def encode_features(params, features, chunk_size=4096):
    """
    Латентные представления контигов: средние mu кодировщика.
    """
    values = encode(params, features.values, chunk_size=chunk_size)
    return LatentMatrix.from_features(features, values)


def write_latent_tsv(latent, stream):
    dims = latent.values.shape[1]
    stream.write('\t'.join(
        ['contig_id', 'sample_id'] + [f'z{i}' for i in range(dims)]) + '\n')
    for contig_id, sample_id, row in zip(
            latent.contig_ids, latent.sample_of_contig, latent.values):
        stream.write('\t'.join(
            [contig_id, sample_id] + [f'{value:.6g}' for value in row]) + '\n')
