import hashlib
import json
import logging
import os
import time

from django.conf import settings
from django.core.exceptions import ValidationError
from django.core.management.base import BaseCommand, CommandError
from threadpoolctl import threadpool_limits

from clmb.exceptions import NumericalError

from .config import config_hash, dump_config, parse_config, resolve_config
from .models import PipelineRun

logger = logging.getLogger(__name__)

INPUT_ERROR = 2
NUMERIC_ERROR = 3
LOG_LEVELS = ('DEBUG', 'INFO', 'WARNING', 'ERROR')


def file_digest(path):
    """
    SHA-256 файла; для каталога - хэш от отсортированных пар
    (относительный путь, хэш файла).
    """
    if os.path.isdir(path):
        digest = hashlib.sha256()
        for root, _, files in sorted(os.walk(path)):
            for name in sorted(files):
                full = os.path.join(root, name)
                relative = os.path.relpath(full, path)
                digest.update(relative.encode('utf-8'))
                digest.update(file_digest(full).encode('ascii'))
        return digest.hexdigest()
    digest = hashlib.sha256()
    with open(path, 'rb') as stream:
        for chunk in iter(lambda: stream.read(1 << 20), b''):
            digest.update(chunk)
    return digest.hexdigest()


def error_text(error):
    if isinstance(error, ValidationError):
        return '; '.join(error.messages)
    return str(error)


class PipelineCommand(BaseCommand):
    """
    Общая часть команд конвейера: глобальные флаги --seed, --config,
    --threads, --log-level; сборка конфигурации; запись манифеста
    запуска в базу и в <команда>.manifest.json; коды выхода 2 (ошибка
    входных данных) и 3 (численный сбой).
    """
    # Соответствие флагов команды ключам конфигурации.
    overrides = {}

    def add_arguments(self, parser):
        parser.add_argument('--seed', type=int, help='Главное зерно')
        parser.add_argument(
            '--config', help='Файл конфигурации section.key = value')
        parser.add_argument(
            '--threads', type=int, help='Потоки BLAS/OpenMP')
        parser.add_argument(
            '--log-level', choices=LOG_LEVELS, help='Уровень логирования')
        self.add_pipeline_arguments(parser)

    def add_pipeline_arguments(self, parser):
        pass

    @property
    def command_name(self):
        return self.__module__.rsplit('.', 1)[-1]

    def resolve(self, options):
        layers = []
        if options.get('config'):
            with open(options['config'], encoding='utf-8') as stream:
                layers.append(parse_config(stream.read()))
        flags = {}
        overrides = dict(self.overrides, seed='run.seed',
                         threads='run.threads')
        for option, target in overrides.items():
            value = options.get(option)
            if value is not None:
                section, key = target.split('.')
                flags.setdefault(section, {})[key] = value
        layers.append(flags)
        return resolve_config(*layers)

    def record_input(self, path):
        self.inputs[path] = file_digest(path)

    def record_output(self, path):
        self.outputs[path] = file_digest(path)

    def write_run_files(self, directory):
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(
            directory,
            settings.CONFIG_FILE_NAME.format(command=self.command_name))
        with open(path, 'w', encoding='utf-8') as stream:
            stream.write(self.config_text)
        self.manifest_dir = directory

    def handle(self, *args, **options):
        if options.get('log_level'):
            logging.getLogger().setLevel(options['log_level'])
        self.inputs, self.outputs = {}, {}
        self.manifest_dir = None
        try:
            config = self.resolve(options)
        except (ValidationError, OSError) as error:
            self.stdout.write(self.style.ERROR('Ошибка конфигурации'))
            raise CommandError(error_text(error), returncode=INPUT_ERROR)
        config_text = dump_config(config)
        self.config_text = config_text
        run = PipelineRun.objects.create(
            command=self.command_name, seed=config['run']['seed'],
            config_text=config_text, config_hash=config_hash(config_text))
        started = time.monotonic()
        try:
            with threadpool_limits(limits=config['run']['threads']):
                message = self.run(config, options)
        except (ValidationError, OSError) as error:
            self.finish(run, PipelineRun.FAILED, started, error_text(error))
            self.stdout.write(self.style.ERROR('Ошибка входных данных'))
            raise CommandError(error_text(error), returncode=INPUT_ERROR)
        except NumericalError as error:
            self.finish(run, PipelineRun.FAILED, started, str(error))
            self.stdout.write(self.style.ERROR('Численный сбой'))
            raise CommandError(str(error), returncode=NUMERIC_ERROR)
        self.finish(run, PipelineRun.DONE, started, message)
        self.stdout.write(self.style.SUCCESS(message))

    def finish(self, run, status, started, message):
        run.status = status
        run.duration = time.monotonic() - started
        run.message = message
        run.inputs = self.inputs
        run.outputs = self.outputs
        run.save()
        if self.manifest_dir is not None:
            path = os.path.join(
                self.manifest_dir,
                settings.MANIFEST_FILE_NAME.format(command=self.command_name))
            with open(path, 'w', encoding='utf-8') as stream:
                json.dump(run.as_manifest(), stream, indent=2, sort_keys=True,
                          ensure_ascii=False)
        logger.info('Запуск %s: %s за %.1f с', self.command_name, status,
                    run.duration)

    def run(self, config, options):
        """
        Выполняет команду и возвращает итоговое сообщение.
        """
        raise NotImplementedError
