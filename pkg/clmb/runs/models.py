from django.db import models
from django.utils import timezone


class PipelineRun(models.Model):
    """
    Манифест одного запуска команды: по нему запуск можно повторить
    (конфигурация, зерно, хэши входов) и проверить (хэши выходов).
    """
    RUNNING = 'running'
    DONE = 'done'
    FAILED = 'failed'
    STATUS_CHOICES = (
        (RUNNING, 'Выполняется'),
        (DONE, 'Завершен'),
        (FAILED, 'Ошибка'),
    )

    command = models.CharField(
        verbose_name='Команда', max_length=32)
    seed = models.BigIntegerField(
        verbose_name='Зерно')
    config_text = models.TextField(
        verbose_name='Конфигурация')
    config_hash = models.CharField(
        verbose_name='SHA-256 конфигурации', max_length=64)
    inputs = models.JSONField(
        verbose_name='Входные файлы', default=dict)
    outputs = models.JSONField(
        verbose_name='Выходные файлы', default=dict)
    started = models.DateTimeField(
        verbose_name='Начало', default=timezone.now)
    duration = models.FloatField(
        verbose_name='Длительность, с', null=True, blank=True)
    status = models.CharField(
        verbose_name='Статус', max_length=16,
        choices=STATUS_CHOICES, default=RUNNING)
    message = models.TextField(
        verbose_name='Сообщение', blank=True, default='')

    class Meta:
        ordering = ['-started', ]
        verbose_name = 'Запуск конвейера'
        verbose_name_plural = 'Запуски конвейера'

    def __str__(self):
        return f'{self.command} ({self.status}, seed={self.seed})'

    def as_manifest(self):
        return {
            'command': self.command,
            'seed': self.seed,
            'config': self.config_text,
            'config_sha256': self.config_hash,
            'inputs': self.inputs,
            'outputs': self.outputs,
            'started': self.started.isoformat(),
            'duration': self.duration,
            'status': self.status,
            'message': self.message,
        }
