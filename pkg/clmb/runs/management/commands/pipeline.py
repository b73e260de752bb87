import os

from django.core.exceptions import ValidationError

from runs.mixins import PipelineCommand
from runs.services import (BINS_DIR, CHECKPOINT_FILE, CLUSTERS_FILE,
                           CONTIGS_FILE, FEATURES_FILE, LATENT_FILE,
                           LOSS_LOG_FILE, MAPPING_FILE, REFERENCE_FILE,
                           TAXONOMY_FILE, bench_step, bin_step,
                           featurize_step, read_truth, synth_step,
                           train_step)

DATA_DIR = 'data'


class Command(PipelineCommand):
    help = ('Полный конвейер featurize -> train -> bin -> bench, '
            'по желанию на синтетическом наборе')
    overrides = {
        'epochs': 'train.epochs',
        'batch_size': 'train.batch_size',
        'algorithm': 'cluster.algorithm',
    }

    def add_pipeline_arguments(self, parser):
        parser.add_argument('out_dir', help='Каталог результатов')
        parser.add_argument(
            '--synthetic', action='store_true',
            help='Сначала создать синтетический набор в <out_dir>/data')
        parser.add_argument('--fasta')
        parser.add_argument('--mapping')
        parser.add_argument('--reference')
        parser.add_argument('--taxonomy')
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--batch-size', type=int)
        parser.add_argument(
            '--algorithm', choices=('medoid', 'kmeans', 'dbscan'))

    def run(self, config, options):
        out_dir = options['out_dir']
        self.write_run_files(out_dir)
        inputs = {key: options.get(key)
                  for key in ('fasta', 'mapping', 'reference', 'taxonomy')}
        if options.get('synthetic'):
            data_dir = os.path.join(out_dir, DATA_DIR)
            synth_step(self, config, data_dir)
            inputs = {
                'fasta': os.path.join(data_dir, CONTIGS_FILE),
                'mapping': os.path.join(data_dir, MAPPING_FILE),
                'reference': os.path.join(data_dir, REFERENCE_FILE),
                'taxonomy': os.path.join(data_dir, TAXONOMY_FILE),
            }
        if not inputs['fasta'] or not inputs['mapping']:
            raise ValidationError(
                'Нужны --fasta и --mapping либо --synthetic',
                code='missing_inputs')
        features_path = os.path.join(out_dir, FEATURES_FILE)
        checkpoint = os.path.join(out_dir, CHECKPOINT_FILE)
        features = featurize_step(
            self, config, inputs['fasta'], inputs['mapping'], features_path)
        train_step(self, config, features_path, checkpoint,
                   loss_log=os.path.join(out_dir, LOSS_LOG_FILE))
        bin_set = bin_step(
            self, config, features_path, checkpoint, out_dir,
            fasta=inputs['fasta'],
            latent_tsv=os.path.join(out_dir, LATENT_FILE))
        message = (f'Бинов: {len(bin_set)}, FASTA бинов в '
                   f'{os.path.join(out_dir, BINS_DIR)}')
        if inputs['reference'] and inputs['taxonomy']:
            truth = read_truth(self, inputs['reference'], inputs['taxonomy'])
            report = bench_step(
                self, config, os.path.join(out_dir, CLUSTERS_FILE), truth,
                out_dir, dataset_contigs=features.contig_ids)
            message += (f'; NC штаммов {report.near_complete["strain"]}'
                        f' из {len(truth.taxonomy)} геномов')
        return message
