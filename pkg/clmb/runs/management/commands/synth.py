from runs.mixins import PipelineCommand
from runs.services import synth_step


class Command(PipelineCommand):
    help = 'Синтетический набор: FASTA, картирование, эталон, таксономия'
    overrides = {
        'genomes': 'synth.genomes',
        'samples': 'synth.samples',
        'contigs_per_genome': 'synth.contigs_per_genome',
    }

    def add_pipeline_arguments(self, parser):
        parser.add_argument('out_dir', help='Каталог набора')
        parser.add_argument('--genomes', type=int)
        parser.add_argument('--samples', type=int)
        parser.add_argument('--contigs-per-genome', type=int)

    def run(self, config, options):
        self.write_run_files(options['out_dir'])
        synth_step(self, config, options['out_dir'])
        return (f'Синтетический набор записан в {options["out_dir"]}: '
                f'{config["synth"]["genomes"]} геномов, '
                f'{config["synth"]["samples"]} образцов')
