from dataclasses import dataclass, field

from django.core.exceptions import ValidationError

from ingest.records import RANKS

RECALL_GRID = (0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99)
PRECISION_FLOOR = 0.95
NC_RECALL = 0.9
NC_PRECISION = 0.95


@dataclass
class EvalReport:
    """
    Число восстановленных таксонов по рангам и порогам полноты
    при точности не ниже precision_floor, число NC-геномов и лучшая
    полнота каждого генома.
    """
    recall_grid: tuple
    precision_floor: float
    counts: dict = field(default_factory=dict)
    near_complete: dict = field(default_factory=dict)
    best_recall: dict = field(default_factory=dict)
    label: str = ''


def _taxon(taxonomy, genome_id):
    try:
        return taxonomy[genome_id]
    except KeyError:
        raise ValidationError(
            'Нет таксономии для генома %(genome)s',
            code='missing_taxonomy', params={'genome': genome_id})


def count_recovered(metrics, taxonomy, precision_floor=PRECISION_FLOOR,
                    recall_grid=RECALL_GRID, label=''):
    """
    Таксон ранга считается восстановленным при пороге r, если некоторый
    бин достигает точности >= precision_floor и полноты > r хотя бы
    на одном геноме этого таксона. Каждый таксон учитывается один раз.
    NC: полнота > 0.9 и точность > 0.95.
    """
    rows = [(row, _taxon(taxonomy, row.genome_id)) for row in metrics]
    report = EvalReport(recall_grid=tuple(recall_grid),
                        precision_floor=precision_floor, label=label)
    for rank in RANKS:
        report.counts[rank] = [
            len({taxon.at(rank) for row, taxon in rows
                 if row.precision >= precision_floor
                 and row.recall > threshold})
            for threshold in recall_grid]
        report.near_complete[rank] = len(
            {taxon.at(rank) for row, taxon in rows
             if row.recall > NC_RECALL and row.precision > NC_PRECISION})
    report.best_recall = {genome_id: 0.0 for genome_id in taxonomy}
    for row, _ in rows:
        if row.precision >= precision_floor:
            report.best_recall[row.genome_id] = max(
                report.best_recall[row.genome_id], row.recall)
    return report


def write_report(reports, stream):
    """
    Таблица в раскладке: строки - конфигурация и ранг, столбцы -
    пороги полноты, затем NC.
    """
    grid = reports[0].recall_grid if reports else RECALL_GRID
    stream.write('\t'.join(
        ['config', 'rank'] + [f'{value:.2f}' for value in grid] + ['NC'])
        + '\n')
    for report in reports:
        for rank in RANKS:
            stream.write('\t'.join(
                [report.label or '-', rank]
                + [str(count) for count in report.counts[rank]]
                + [str(report.near_complete[rank])]) + '\n')


def write_bin_metrics(groups, stream):
    """
    groups - пары (конфигурация, список BinGenomeMetrics).
    """
    stream.write(
        'config\tbin_id\tgenome_id\tTP\tFP\tFN\tprecision\trecall\n')
    for label, metrics in groups:
        for row in metrics:
            stream.write(
                f'{label or "-"}\t{row.bin_id}\t{row.genome_id}\t'
                f'{row.tp}\t{row.fp}\t{row.fn}\t'
                f'{row.precision:.6f}\t{row.recall:.6f}\n')


def write_genome_recall(reports, stream):
    stream.write('\t'.join(
        ['genome_id'] + [report.label or '-' for report in reports]) + '\n')
    genome_ids = sorted({genome_id for report in reports
                         for genome_id in report.best_recall})
    for genome_id in genome_ids:
        stream.write('\t'.join(
            [genome_id] + [f'{report.best_recall.get(genome_id, 0.0):.6f}'
                           for report in reports]) + '\n')
