from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

READS_SCALE = 1e6
LENGTH_SCALE = 1e3


@dataclass
class AbundanceMatrix:
    """
    RPKM: contigs x samples, все значения неотрицательны.
    """
    values: np.ndarray
    sample_ids: list
    contig_ids: list


def compute_rpkm(mappings, contigs, samples):
    """
    Прочтение, картированное на n контигов, дает каждому вклад 1/n.
    RPKM = вклад / (длина / 1000) / (прочтений в образце / 10^6),
    где прочтение в образце считается один раз.
    Образец без прочтений дает нулевой столбец.
    """
    index = {contig.contig_id: row for row, contig in enumerate(contigs)}
    column = {sample_id: col for col, sample_id in enumerate(samples)}
    totals = np.zeros(len(samples))
    rows, cols, weights = [], [], []
    for mapping in mappings:
        col = column.get(mapping.sample_id)
        if col is None:
            raise ValidationError(
                'Прочтение %(read)s из необъявленного образца %(sample)s',
                code='unknown_sample',
                params={'read': mapping.read_id, 'sample': mapping.sample_id})
        totals[col] += 1
        weight = 1.0 / len(mapping.mapped_contig_ids)
        for contig_id in mapping.mapped_contig_ids:
            row = index.get(contig_id)
            if row is None:
                raise ValidationError(
                    'Прочтение %(read)s картировано на неизвестный контиг '
                    '%(id)s', code='unknown_contig',
                    params={'read': mapping.read_id, 'id': contig_id})
            rows.append(row)
            cols.append(col)
            weights.append(weight)
    weighted = np.zeros((len(contigs), len(samples)))
    np.add.at(weighted, (np.array(rows, dtype=np.intp),
                         np.array(cols, dtype=np.intp)), weights)
    kilobases = np.array(
        [contig.length for contig in contigs], dtype=float) / LENGTH_SCALE
    millions = totals / READS_SCALE
    with np.errstate(divide='ignore', invalid='ignore'):
        values = weighted / kilobases[:, None] / millions[None, :]
    values[:, totals == 0] = 0.0
    return AbundanceMatrix(
        values=values, sample_ids=list(samples),
        contig_ids=[contig.contig_id for contig in contigs])
