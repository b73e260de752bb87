from runs.mixins import PipelineCommand
from runs.services import bin_step


class Command(PipelineCommand):
    help = 'Кодирование, кластеризация и разделение контигов по бинам'
    overrides = {
        'algorithm': 'cluster.algorithm',
    }

    def add_pipeline_arguments(self, parser):
        parser.add_argument('features', help='Файл признаков CLMBFEAT')
        parser.add_argument('checkpoint', help='Контрольная точка CLMBVAE')
        parser.add_argument('out_dir', help='Каталог результатов')
        parser.add_argument(
            '--algorithm', choices=('medoid', 'kmeans', 'dbscan'))
        parser.add_argument('--fasta', help='FASTA для записи бинов')
        parser.add_argument('--latent', help='TSV латентных векторов')

    def run(self, config, options):
        self.write_run_files(options['out_dir'])
        bin_set = bin_step(
            self, config, options['features'], options['checkpoint'],
            options['out_dir'], fasta=options.get('fasta'),
            latent_tsv=options.get('latent'))
        return f'Бинов: {len(bin_set)}'
