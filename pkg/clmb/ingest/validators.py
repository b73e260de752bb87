import re

from django.core.exceptions import ValidationError

NUCLEOTIDES = re.compile(r'^[ACGTN]*\Z')


def validate_sequence_line(value, line_number):
    """
    Метод проверяет, что строка последовательности состоит только
    из символов A, C, G, T, N (после перевода в верхний регистр).
    Если нет - выбрасывает ValidationError с номером строки.
    """
    if not NUCLEOTIDES.fullmatch(value):
        bad = next(char for char in value if char not in 'ACGTN')
        raise ValidationError(
            'Недопустимый символ %(char)r в строке %(line)d',
            code='invalid_nucleotide',
            params={'char': bad, 'line': line_number})


def validate_unique_id(value, seen, line_number):
    """
    Метод проверяет, что идентификатор контига встречается впервые.
    """
    if value in seen:
        raise ValidationError(
            'Повторный идентификатор контига %(id)s в строке %(line)d',
            code='duplicate_contig',
            params={'id': value, 'line': line_number})


def validate_known_contigs(contig_ids, known, line_number):
    """
    Метод проверяет, что прочтение картировано хотя бы на один
    контиг и все контиги известны.
    """
    if not contig_ids:
        raise ValidationError(
            'Пустой список контигов в строке %(line)d',
            code='empty_mapping', params={'line': line_number})
    for contig_id in contig_ids:
        if contig_id not in known:
            raise ValidationError(
                'Неизвестный контиг %(id)s в строке %(line)d',
                code='unknown_contig',
                params={'id': contig_id, 'line': line_number})


def validate_span(start, end, line_number, genome_length=None):
    """
    Метод проверяет, что 0 <= start < end (<= длина генома).
    """
    if start < 0 or start >= end:
        raise ValidationError(
            'Некорректный участок [%(start)d, %(end)d) в строке %(line)d',
            code='inverted_span',
            params={'start': start, 'end': end, 'line': line_number})
    if genome_length is not None and end > genome_length:
        raise ValidationError(
            'Участок [%(start)d, %(end)d) выходит за длину генома %(length)d',
            code='span_out_of_genome',
            params={'start': start, 'end': end, 'length': genome_length})
