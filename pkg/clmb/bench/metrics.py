"""
Метрики бинов на уровне нуклеотидов.

Для пары (бин, геном): TP - позиции генома, покрытые контигами бина;
FP - позиции других геномов, покрытые контигами бина (плюс длины
контигов без эталона); FN - позиции генома, покрытые контигами набора,
но не контигами бина. Перекрытия участков объединяются.
"""
from dataclasses import dataclass

from django.core.exceptions import ValidationError


@dataclass(frozen=True)
class BinGenomeMetrics:
    bin_id: str
    genome_id: str
    tp: int
    fp: int
    fn: int

    @property
    def precision(self):
        total = self.tp + self.fp
        return self.tp / total if total else 0.0

    @property
    def recall(self):
        total = self.tp + self.fn
        return self.tp / total if total else 0.0


def merge_intervals(spans):
    """
    Объединение полуинтервалов [start, end): список непересекающихся
    отсортированных участков.
    """
    merged = []
    for start, end in sorted(spans):
        if start >= end:
            raise ValidationError(
                'Некорректный участок [%(start)d, %(end)d)',
                code='inverted_span', params={'start': start, 'end': end})
        if merged and start <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], end)
        else:
            merged.append([start, end])
    return merged


def covered_bases(spans):
    return sum(end - start for start, end in merge_intervals(spans))


def _spans_by_genome(contig_ids, by_contig):
    spans = {}
    for contig_id in contig_ids:
        entry = by_contig.get(contig_id)
        if entry is not None:
            spans.setdefault(entry.genome_id, []).append(
                (entry.start, entry.end))
    return spans


def evaluate_bins(bin_set, truth, contig_lengths=None,
                  dataset_contigs=None):
    """
    Метрики для всех пар (бин, геном) с TP > 0. Контиги без записи
    в эталоне считаются ложноположительными против любого генома;
    их длина берется из contig_lengths.

    FN считается от покрытия генома контигами набора dataset_contigs
    (по умолчанию - все контиги эталона), а не только попавшими в бины.
    """
    by_contig = truth.by_contig()
    contig_lengths = contig_lengths or {}
    if dataset_contigs is None:
        dataset_contigs = [entry.contig_id for entry in truth.entries]
    binned = [contig_id for item in bin_set.bins
              for contig_id in item.contig_ids]
    dataset = _spans_by_genome(list(dataset_contigs) + binned, by_contig)
    dataset_covered = {genome_id: covered_bases(spans)
                       for genome_id, spans in dataset.items()}
    metrics = []
    for item in bin_set.bins:
        unknown = 0
        for contig_id in item.contig_ids:
            if contig_id in by_contig:
                continue
            if contig_id not in contig_lengths:
                raise ValidationError(
                    'Контиг %(contig)s бина %(bin)s отсутствует в эталоне',
                    code='unknown_contig',
                    params={'contig': contig_id, 'bin': item.bin_id})
            unknown += contig_lengths[contig_id]
        covered = {genome_id: covered_bases(spans) for genome_id, spans
                   in _spans_by_genome(item.contig_ids, by_contig).items()}
        total = sum(covered.values())
        for genome_id in sorted(covered):
            tp = covered[genome_id]
            metrics.append(BinGenomeMetrics(
                bin_id=item.bin_id, genome_id=genome_id, tp=tp,
                fp=total - tp + unknown,
                fn=dataset_covered[genome_id] - tp))
    return metrics


def best_matches(metrics):
    """
    Для каждого бина - пара с наибольшим TP (при равенстве -
    с меньшим идентификатором генома).
    """
    best = {}
    for row in metrics:
        current = best.get(row.bin_id)
        if current is None or (row.tp, current.genome_id) > (
                current.tp, row.genome_id):
            best[row.bin_id] = row
    return list(best.values())
