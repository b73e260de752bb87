from django.core.exceptions import ValidationError

from bench.fusion import TRANSFORMS
from features.matrix import PARTS
from ingest.parsers import parse_fasta
from runs.mixins import PipelineCommand
from runs.services import bench_step, fusion_step, read_truth


class Command(PipelineCommand):
    help = ('Оценка бинов по эталону: TP/FP/FN по нуклеотидам, '
            'восстановленные геномы по порогам полноты и рангам')
    overrides = {
        'algorithm': 'cluster.algorithm',
        'precision_floor': 'bench.precision_floor',
    }

    def add_pipeline_arguments(self, parser):
        parser.add_argument('reference', help='TSV contig, genome, start, end')
        parser.add_argument(
            'taxonomy', help='TSV genome, strain, species, genus[, length]')
        parser.add_argument('out_dir', help='Каталог отчетов')
        parser.add_argument('--clusters', help='clusters.tsv команды bin')
        parser.add_argument(
            '--fasta', help='FASTA для длин контигов вне эталона')
        parser.add_argument(
            '--matrix', help='Файл признаков для эксперимента слияния')
        parser.add_argument(
            '--features', nargs='+', choices=PARTS, default=['both'])
        parser.add_argument(
            '--transform', nargs='+', choices=TRANSFORMS,
            default=['encoded'])
        parser.add_argument('--checkpoint', help='Контрольная точка CLMBVAE')
        parser.add_argument(
            '--algorithm', choices=('medoid', 'kmeans', 'dbscan'))
        parser.add_argument('--precision-floor', type=float)

    def contig_lengths(self, path, config):
        if not path:
            return None
        with open(path, encoding='utf-8') as stream:
            records = parse_fasta(
                stream, separator=config['ingest']['separator'])
        self.record_input(path)
        return {record.contig_id: record.length for record in records}

    def run(self, config, options):
        if bool(options.get('clusters')) == bool(options.get('matrix')):
            raise ValidationError(
                'Нужен ровно один из параметров --clusters и --matrix',
                code='bench_mode')
        self.write_run_files(options['out_dir'])
        truth = read_truth(self, options['reference'], options['taxonomy'])
        if options.get('clusters'):
            report = bench_step(
                self, config, options['clusters'], truth, options['out_dir'],
                contig_lengths=self.contig_lengths(
                    options.get('fasta'), config))
            reports = [report]
        else:
            reports = fusion_step(
                self, config, options['matrix'], truth, options['out_dir'],
                options['features'], options['transform'],
                checkpoint=options.get('checkpoint'))
        summary = ', '.join(
            f'{report.label}: NC {report.near_complete["strain"]}'
            for report in reports)
        return f'Отчет записан в {options["out_dir"]} ({summary})'
