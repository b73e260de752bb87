import logging
import os
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

from ingest.parsers import write_fasta

logger = logging.getLogger(__name__)

CLUSTERS_HEADER = ('bin_id', 'contig_id')


@dataclass(frozen=True)
class Clustering:
    """
    Номер кластера для каждого контига; номера идут подряд с нуля
    в порядке первого появления.
    """
    labels: np.ndarray

    @classmethod
    def from_labels(cls, labels):
        labels = np.asarray(labels)
        _, first, inverse = np.unique(
            labels, return_index=True, return_inverse=True)
        order = np.argsort(np.argsort(first))
        return cls(labels=order[inverse.reshape(-1)].astype(np.int64))

    @property
    def n_clusters(self):
        return int(self.labels.max()) + 1 if self.labels.size else 0

    def members(self):
        groups = [[] for _ in range(self.n_clusters)]
        for index, label in enumerate(self.labels):
            groups[label].append(index)
        return groups


@dataclass(frozen=True)
class Bin:
    bin_id: str
    sample_id: str
    contig_ids: tuple


@dataclass(frozen=True)
class BinSet:
    bins: tuple

    def __len__(self):
        return len(self.bins)

    def assignment(self):
        return {contig_id: item.bin_id
                for item in self.bins for contig_id in item.contig_ids}


def multi_split(clustering, contig_ids, sample_of_contig):
    """
    Каждый кластер делится по образцам-источникам: бин `<кластер>C<образец>S`
    содержит контиги одного кластера из одного образца.
    """
    if not (len(contig_ids) == len(sample_of_contig)
            == clustering.labels.size):
        raise ValidationError(
            'Разбиение не выровнено с контигами', code='misaligned')
    bins = []
    for cluster, indices in enumerate(clustering.members()):
        by_sample = {}
        for index in indices:
            by_sample.setdefault(sample_of_contig[index], []).append(
                contig_ids[index])
        for sample_id, members in by_sample.items():
            bins.append(Bin(bin_id=f'{cluster}C{sample_id}S',
                            sample_id=sample_id, contig_ids=tuple(members)))
    logger.info('Разделение по образцам: %d кластеров -> %d бинов',
                clustering.n_clusters, len(bins))
    return BinSet(bins=tuple(bins))


def write_clusters(bin_set, stream):
    stream.write('\t'.join(CLUSTERS_HEADER) + '\n')
    for item in bin_set.bins:
        for contig_id in item.contig_ids:
            stream.write(f'{item.bin_id}\t{contig_id}\n')


def read_clusters(stream):
    """
    Читает TSV `bin_id<TAB>contig_id`; строка заголовка необязательна.
    """
    groups = {}
    seen = set()
    for number, line in enumerate(stream, start=1):
        if isinstance(line, bytes):
            line = line.decode('utf-8')
        line = line.rstrip('\r\n')
        if not line:
            continue
        fields = line.split('\t')
        if number == 1 and tuple(fields) == CLUSTERS_HEADER:
            continue
        if len(fields) != 2:
            raise ValidationError(
                'Строка %(line)d: ожидалось 2 поля, получено %(count)d',
                code='malformed_clusters',
                params={'line': number, 'count': len(fields)})
        bin_id, contig_id = fields
        if contig_id in seen:
            raise ValidationError(
                'Строка %(line)d: контиг %(contig)s уже отнесен к бину',
                code='duplicate_contig',
                params={'line': number, 'contig': contig_id})
        seen.add(contig_id)
        groups.setdefault(bin_id, []).append(contig_id)
    return BinSet(bins=tuple(
        Bin(bin_id=bin_id, sample_id=_sample_of_bin(bin_id),
            contig_ids=tuple(members))
        for bin_id, members in groups.items()))


def _sample_of_bin(bin_id):
    cluster, separator, rest = bin_id.partition('C')
    if separator and cluster.isdigit() and rest.endswith('S'):
        return rest[:-1]
    return ''


def write_bin_fastas(bin_set, records, directory, extension='fna'):
    """
    Один FASTA на бин; заголовки сохраняют исходные идентификаторы
    контигов. Возвращает список путей.
    """
    by_id = {record.contig_id: record for record in records}
    missing = [contig_id for item in bin_set.bins
               for contig_id in item.contig_ids if contig_id not in by_id]
    if missing:
        raise ValidationError(
            'Контиг %(contig)s отсутствует во входном FASTA',
            code='unknown_contig', params={'contig': missing[0]})
    os.makedirs(directory, exist_ok=True)
    paths = []
    for item in bin_set.bins:
        path = os.path.join(directory, f'{item.bin_id}.{extension}')
        with open(path, 'w', encoding='utf-8') as stream:
            write_fasta([by_id[contig_id] for contig_id in item.contig_ids],
                        stream)
        paths.append(path)
    return paths
