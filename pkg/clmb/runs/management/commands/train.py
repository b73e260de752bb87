import os

from runs.mixins import PipelineCommand
from runs.services import train_step


class Command(PipelineCommand):
    help = 'Обучение VAE с контрастной функцией потерь'
    overrides = {
        'epochs': 'train.epochs',
        'batch_size': 'train.batch_size',
        'learning_rate': 'train.learning_rate',
    }

    def add_pipeline_arguments(self, parser):
        parser.add_argument('features', help='Файл признаков CLMBFEAT')
        parser.add_argument('out', help='Контрольная точка CLMBVAE')
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--batch-size', type=int)
        parser.add_argument('--learning-rate', type=float)
        parser.add_argument('--loss-log', help='TSV потерь по эпохам')
        parser.add_argument('--resume', help='Продолжить с контрольной точки')

    def run(self, config, options):
        self.write_run_files(os.path.dirname(os.path.abspath(options['out'])))
        result = train_step(
            self, config, options['features'], options['out'],
            loss_log=options.get('loss_log'), resume=options.get('resume'))
        last = result.history[-1].total if result.history else float('nan')
        return (f'Обучение завершено: эпох {result.epochs_done}, '
                f'шагов Adam {result.state.step}, loss {last:.6g}')
