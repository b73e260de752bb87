import django.utils.timezone
from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='PipelineRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=32, verbose_name='Команда')),
                ('seed', models.BigIntegerField(verbose_name='Зерно')),
                ('config_text', models.TextField(verbose_name='Конфигурация')),
                ('config_hash', models.CharField(max_length=64, verbose_name='SHA-256 конфигурации')),
                ('inputs', models.JSONField(default=dict, verbose_name='Входные файлы')),
                ('outputs', models.JSONField(default=dict, verbose_name='Выходные файлы')),
                ('started', models.DateTimeField(default=django.utils.timezone.now, verbose_name='Начало')),
                ('duration', models.FloatField(blank=True, null=True, verbose_name='Длительность, с')),
                ('status', models.CharField(choices=[('running', 'Выполняется'), ('done', 'Завершен'), ('failed', 'Ошибка')], default='running', max_length=16, verbose_name='Статус')),
                ('message', models.TextField(blank=True, default='', verbose_name='Сообщение')),
            ],
            options={
                'verbose_name': 'Запуск конвейера',
                'verbose_name_plural': 'Запуски конвейера',
                'ordering': ['-started'],
            },
        ),
    ]
