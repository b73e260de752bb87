"""
Конфигурация запуска: значения по умолчанию из settings.CLMB,
поверх них файл `section.key = value` и флаги командной строки.
"""
import copy
import hashlib

from django.conf import settings
from django.core.exceptions import ValidationError

from .serializers import SECTION_SERIALIZERS


def parse_config(text):
    """
    Разбирает текст `section.key = value`; пустые строки и строки,
    начинающиеся с #, пропускаются. Значения остаются строками,
    их проверяют сериализаторы секций.
    """
    layer = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith('#'):
            continue
        name, separator, value = line.partition('=')
        section, dot, key = name.strip().partition('.')
        if not separator or not dot or not section or not key.strip():
            raise ValidationError(
                'Строка %(line)d конфигурации не имеет вид '
                'section.key = value', code='malformed_config',
                params={'line': number})
        if section not in SECTION_SERIALIZERS:
            raise ValidationError(
                'Неизвестная секция %(section)s в строке %(line)d',
                code='unknown_section',
                params={'section': section, 'line': number})
        layer.setdefault(section, {})[key.strip()] = value.strip()
    return layer


def _flatten_errors(errors, prefix=''):
    if isinstance(errors, dict):
        for key, value in errors.items():
            yield from _flatten_errors(value, f'{prefix}.{key}')
    elif isinstance(errors, list):
        for value in errors:
            yield from _flatten_errors(value, prefix)
    else:
        yield f'{prefix.lstrip(".")}: {errors}'


def resolve_config(*layers):
    """
    Накладывает слои на settings.CLMB и проверяет каждую секцию.
    Возвращает словарь секций с проверенными значениями.
    """
    merged = copy.deepcopy(settings.CLMB)
    for layer in layers:
        for section, values in (layer or {}).items():
            if section not in SECTION_SERIALIZERS:
                raise ValidationError(
                    'Неизвестная секция %(section)s',
                    code='unknown_section', params={'section': section})
            merged.setdefault(section, {}).update(values)
    resolved = {}
    for section, serializer_class in SECTION_SERIALIZERS.items():
        serializer = serializer_class(data=merged.get(section, {}))
        if not serializer.is_valid():
            details = '; '.join(_flatten_errors(serializer.errors, section))
            raise ValidationError(
                'Некорректная конфигурация: %(details)s',
                code='invalid_config', params={'details': details})
        resolved[section] = dict(serializer.validated_data)
    return resolved


def _format(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, (list, tuple)):
        return ','.join(str(item) for item in value)
    return str(value)


def dump_config(config):
    """
    Текст, который parse_config читает обратно в ту же конфигурацию.
    """
    lines = []
    for section in SECTION_SERIALIZERS:
        for key, value in config.get(section, {}).items():
            lines.append(f'{section}.{key} = {_format(value)}')
    return '\n'.join(lines) + '\n'


def config_hash(text):
    return hashlib.sha256(text.encode('utf-8')).hexdigest()
