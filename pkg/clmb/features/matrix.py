import logging
import struct
from dataclasses import dataclass, replace

import numpy as np
from django.core.exceptions import ValidationError

from .abundance import compute_rpkm
from .tnf import compute_tnf

logger = logging.getLogger(__name__)

MAGIC = 'CLMBFEAT'
VERSION = 'v1'
PARTS = ('abundance', 'tnf', 'both')


@dataclass
class FeatureMatrix:
    """
    Нормированная численность (contigs x s) и нормированный TNF
    (contigs x tnf_dim), логически склеенные в concat(A_in, T_in).
    """
    abundance: np.ndarray
    tnf: np.ndarray
    contig_ids: list
    sample_of_contig: list
    sample_ids: list

    @property
    def n_contigs(self):
        return self.abundance.shape[0]

    @property
    def n_samples(self):
        return self.abundance.shape[1]

    @property
    def tnf_dim(self):
        return self.tnf.shape[1]

    @property
    def values(self):
        return np.hstack([self.abundance, self.tnf])

    def select(self, part):
        """
        Оставляет только численность, только TNF или оба блока
        (эксперимент по слиянию признаков).
        """
        if part == 'abundance':
            return replace(self, tnf=self.tnf[:, :0])
        if part == 'tnf':
            return replace(self, abundance=self.abundance[:, :0])
        return self


def normalize_features(tnf, abundance):
    """
    Каждый столбец TNF приводится к нулевому среднему и единичному
    стандартному отклонению (столбец без разброса - нули).
    Каждая строка численности делится на свою сумму (нулевая строка -
    равномерное распределение 1/s).
    """
    if list(tnf.contig_ids) != list(abundance.contig_ids):
        raise ValidationError(
            'Матрицы TNF и численности не выровнены по контигам',
            code='misaligned')
    values = tnf.values
    mean = values.mean(axis=0)
    std = values.std(axis=0)
    scaled = np.zeros_like(values)
    varying = std > 0
    scaled[:, varying] = (values[:, varying] - mean[varying]) / std[varying]

    counts = abundance.values
    n_samples = counts.shape[1]
    sums = counts.sum(axis=1, keepdims=True)
    shares = np.full_like(counts, 1.0 / n_samples if n_samples else 0.0)
    filled = sums[:, 0] > 0
    shares[filled] = counts[filled] / sums[filled]
    if (~filled).any():
        logger.info(
            'Контигов без прочтений: %d, численность равномерная',
            int((~filled).sum()))
    return FeatureMatrix(
        abundance=shares, tnf=scaled, contig_ids=list(tnf.contig_ids),
        sample_of_contig=list(tnf.sample_of_contig),
        sample_ids=list(abundance.sample_ids))


def declared_samples(records, mappings=()):
    samples = {}
    for record in records:
        samples.setdefault(record.sample_id, None)
    for mapping in mappings:
        samples.setdefault(mapping.sample_id, None)
    return list(samples)


def featurize(records, mappings, kernel, sample_ids):
    tnf = compute_tnf(records, kernel)
    abundance = compute_rpkm(mappings, records, sample_ids)
    return normalize_features(tnf, abundance)


def _pack_strings(strings):
    chunks = []
    for value in strings:
        encoded = value.encode('utf-8')
        chunks.append(struct.pack('<I', len(encoded)) + encoded)
    return b''.join(chunks)


def _unpack_strings(buffer, offset, count):
    strings = []
    for _ in range(count):
        (size,) = struct.unpack_from('<I', buffer, offset)
        offset += 4
        strings.append(buffer[offset:offset + size].decode('utf-8'))
        offset += size
    return strings, offset


def save_features(features, stream):
    """
    Формат: строка `CLMBFEAT v1 <n> <s> <tnf_dim>`, затем float32
    little-endian построчно (численность, затем TNF), затем блок
    идентификаторов контигов (строки с префиксом длины uint32),
    число образцов и их идентификаторы, индекс образца каждого контига
    (uint32).
    """
    header = (f'{MAGIC} {VERSION} {features.n_contigs} '
              f'{features.n_samples} {features.tnf_dim}\n')
    stream.write(header.encode('ascii'))
    stream.write(features.values.astype('<f4').tobytes())
    stream.write(_pack_strings(features.contig_ids))
    stream.write(struct.pack('<I', len(features.sample_ids)))
    stream.write(_pack_strings(features.sample_ids))
    column = {sample_id: i for i, sample_id in enumerate(features.sample_ids)}
    owners = np.array(
        [column[s] for s in features.sample_of_contig], dtype='<u4')
    stream.write(owners.tobytes())


def load_features(stream):
    buffer = stream.read()
    newline = buffer.find(b'\n')
    fields = buffer[:newline].decode('ascii', errors='replace').split()
    if len(fields) != 5 or fields[0] != MAGIC or fields[1] != VERSION:
        raise ValidationError(
            'Файл не является файлом признаков CLMBFEAT v1',
            code='bad_feature_file')
    n, s, t = (int(value) for value in fields[2:])
    offset = newline + 1
    width = s + t
    size = n * width * 4
    if len(buffer) < offset + size:
        raise ValidationError(
            'Файл признаков обрезан', code='bad_feature_file')
    values = np.frombuffer(
        buffer, dtype='<f4', count=n * width, offset=offset)
    values = values.reshape(n, width).astype(np.float32)
    offset += size
    contig_ids, offset = _unpack_strings(buffer, offset, n)
    (n_samples,) = struct.unpack_from('<I', buffer, offset)
    sample_ids, offset = _unpack_strings(buffer, offset + 4, n_samples)
    owners = np.frombuffer(buffer, dtype='<u4', count=n, offset=offset)
    return FeatureMatrix(
        abundance=values[:, :s], tnf=values[:, s:], contig_ids=contig_ids,
        sample_of_contig=[sample_ids[i] for i in owners],
        sample_ids=sample_ids)


def write_features_tsv(features, stream):
    columns = list(features.sample_ids) + [
        f'tnf{i}' for i in range(features.tnf_dim)]
    stream.write('\t'.join(['contig_id', 'sample_id'] + columns) + '\n')
    for contig_id, sample_id, row in zip(
            features.contig_ids, features.sample_of_contig, features.values):
        stream.write('\t'.join(
            [contig_id, sample_id] + [f'{value:.6g}' for value in row]) + '\n')
