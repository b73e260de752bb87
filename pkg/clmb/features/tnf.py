from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from .kmers import count_kmers


@dataclass
class TnfMatrix:
    values: np.ndarray
    contig_ids: list
    sample_of_contig: list


def compute_composition(sequence, kernel):
    """
    Метод считает частоты k-меров из определенных оснований
    (окна с N пропускаются), нормирует их к сумме 1 и проецирует
    на ядро.
    Если ни одного окна нет - контиг нельзя описать признаками.
    """
    counts = count_kmers(sequence, kernel.k)
    total = counts.sum()
    if total == 0:
        raise ValidationError(
            'Нет ни одного окна длины %(k)d без N',
            code='unfeaturizable', params={'k': kernel.k})
    return (counts / total) @ kernel.matrix


def compute_tnf(records, kernel):
    values = np.empty((len(records), kernel.projected_dim))
    for row, record in enumerate(records):
        try:
            values[row] = compute_composition(record.sequence, kernel)
        except ValidationError:
            raise ValidationError(
                'Контиг %(id)s не содержит ни одного окна длины %(k)d без N',
                code='unfeaturizable',
                params={'id': record.contig_id, 'k': kernel.k})
    return TnfMatrix(
        values=values,
        contig_ids=[record.contig_id for record in records],
        sample_of_contig=[record.sample_id for record in records])
