import os

from runs.mixins import PipelineCommand
from runs.services import featurize_step


class Command(PipelineCommand):
    help = ('Признаки контигов: TNF (проекция частот k-меров) '
            'и численность RPKM по образцам')
    overrides = {
        'k': 'features.k',
        'min_length': 'ingest.min_length',
        'samples': 'features.samples',
        'separator': 'ingest.separator',
    }

    def add_pipeline_arguments(self, parser):
        parser.add_argument('fasta', help='FASTA с заголовками образец|контиг')
        parser.add_argument(
            'mapping', help='TSV read_id, sample_id, контиги через запятую')
        parser.add_argument('out', help='Файл признаков CLMBFEAT')
        parser.add_argument('--k', type=int, help='Длина k-мера (2..5)')
        parser.add_argument('--min-length', type=int)
        parser.add_argument(
            '--samples', type=int, help='Оставить первые N образцов')
        parser.add_argument('--separator')
        parser.add_argument('--tsv', help='Дополнительно выгрузить TSV')

    def run(self, config, options):
        self.write_run_files(os.path.dirname(os.path.abspath(options['out'])))
        features = featurize_step(
            self, config, options['fasta'], options['mapping'],
            options['out'], tsv=options.get('tsv'))
        return (f'Признаки записаны: {features.n_contigs} контигов, '
                f'{features.n_samples} образцов, TNF {features.tnf_dim}')
