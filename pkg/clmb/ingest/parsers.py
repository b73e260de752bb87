from django.core.exceptions import ValidationError

from .records import (ContigRecord, MappingRecord, ReferenceEntry,
                      ReferenceMap, Taxon)
from .validators import (validate_known_contigs, validate_sequence_line,
                         validate_span, validate_unique_id)

FASTA_WIDTH = 60


def _lines(stream):
    line_number = 0
    try:
        for line in stream:
            if isinstance(line, bytes):
                line = line.decode('utf-8')
            line_number += 1
            yield line_number, line.rstrip('\r\n')
    except UnicodeDecodeError:
        raise ValidationError(
            'Строка %(line)d не является текстом в UTF-8',
            code='invalid_encoding', params={'line': line_number + 1})


def _split_header(header, line_number, separator, sample_of):
    token = header[1:].split(maxsplit=1)
    if not token:
        raise ValidationError(
            'Пустой заголовок в строке %(line)d',
            code='malformed_header', params={'line': line_number})
    token = token[0]
    if separator and separator in token:
        sample_id, contig_id = token.split(separator, 1)
    elif sample_of is not None and token in sample_of:
        sample_id, contig_id = sample_of[token], token
    else:
        raise ValidationError(
            'Заголовок %(header)s в строке %(line)d не содержит образец',
            code='malformed_header',
            params={'header': token, 'line': line_number})
    if not sample_id or not contig_id:
        raise ValidationError(
            'Некорректный заголовок %(header)s в строке %(line)d',
            code='malformed_header',
            params={'header': token, 'line': line_number})
    return sample_id, contig_id


def parse_fasta(stream, separator='|', sample_of=None):
    """
    Метод читает FASTA. Заголовок имеет вид `>sampleid|contigid`
    или содержит голый идентификатор, образец которого берется
    из словаря sample_of. Последовательности переводятся в верхний
    регистр, многострочные записи склеиваются.
    """
    records = []
    seen = set()
    current = None
    chunks = []

    def flush():
        sample_id, contig_id, header_line = current
        sequence = ''.join(chunks)
        if not sequence:
            raise ValidationError(
                'Пустая последовательность %(id)s (строка %(line)d)',
                code='empty_sequence',
                params={'id': contig_id, 'line': header_line})
        records.append(ContigRecord(contig_id, sample_id, sequence))

    for line_number, line in _lines(stream):
        if line.startswith('>'):
            if current is not None:
                flush()
            sample_id, contig_id = _split_header(
                line, line_number, separator, sample_of)
            validate_unique_id(contig_id, seen, line_number)
            seen.add(contig_id)
            current = (sample_id, contig_id, line_number)
            chunks = []
            continue
        line = line.strip().upper()
        if not line:
            continue
        if current is None:
            raise ValidationError(
                'Последовательность без заголовка в строке %(line)d',
                code='malformed_header', params={'line': line_number})
        validate_sequence_line(line, line_number)
        chunks.append(line)
    if current is not None:
        flush()
    return records


def write_fasta(records, stream, separator='|', width=FASTA_WIDTH):
    for record in records:
        stream.write(f'>{record.sample_id}{separator}{record.contig_id}\n')
        for start in range(0, record.length, width):
            stream.write(record.sequence[start:start + width] + '\n')


def filter_contigs(records, min_length=2000):
    return [record for record in records if record.length >= min_length]


def parse_mapping(stream, contigs):
    """
    Метод читает TSV картирования
    `read_id<TAB>sample_id<TAB>contig1,contig2,...`.
    contigs - записи ContigRecord или множество идентификаторов.
    """
    known = {getattr(c, 'contig_id', c) for c in contigs}
    mappings = []
    for line_number, line in _lines(stream):
        if not line.strip():
            continue
        fields = line.split('\t')
        if len(fields) != 3:
            raise ValidationError(
                'Ожидается 3 поля, получено %(count)d в строке %(line)d',
                code='malformed_mapping',
                params={'count': len(fields), 'line': line_number})
        read_id, sample_id, targets = fields
        contig_ids = tuple(c for c in targets.split(',') if c)
        validate_known_contigs(contig_ids, known, line_number)
        mappings.append(MappingRecord(read_id, sample_id, contig_ids))
    return mappings


def write_mapping(mappings, stream):
    for mapping in mappings:
        stream.write(
            f'{mapping.read_id}\t{mapping.sample_id}\t'
            f'{",".join(mapping.mapped_contig_ids)}\n')


def _genome_length(value, line_number):
    try:
        length = int(value)
    except ValueError:
        length = 0
    if length <= 0:
        raise ValidationError(
            'Длина генома %(value)s в строке таксономии %(line)d '
            'не является положительным числом', code='malformed_taxonomy',
            params={'value': value, 'line': line_number})
    return length


def parse_reference(stream, taxonomy_stream=None):
    """
    Метод читает `contig_id<TAB>genome_id<TAB>start<TAB>end` и,
    если передан, TSV таксономии
    `genome_id<TAB>strain<TAB>species<TAB>genus[<TAB>length]`.
    Без колонки length длиной генома считается наибольший конец участка.
    """
    reference = ReferenceMap()
    if taxonomy_stream is not None:
        for line_number, line in _lines(taxonomy_stream):
            if not line.strip():
                continue
            fields = line.split('\t')
            if len(fields) not in (4, 5):
                raise ValidationError(
                    'Некорректная строка таксономии %(line)d',
                    code='malformed_taxonomy', params={'line': line_number})
            genome_id = fields[0]
            reference.taxonomy[genome_id] = Taxon(*fields[1:4])
            if len(fields) == 5:
                reference.genome_lengths[genome_id] = _genome_length(
                    fields[4], line_number)
    seen = set()
    for line_number, line in _lines(stream):
        if not line.strip():
            continue
        fields = line.split('\t')
        if len(fields) != 4:
            raise ValidationError(
                'Ожидается 4 поля в строке %(line)d',
                code='malformed_reference', params={'line': line_number})
        contig_id, genome_id = fields[0], fields[1]
        try:
            start, end = int(fields[2]), int(fields[3])
        except ValueError:
            raise ValidationError(
                'Координаты не являются числами в строке %(line)d',
                code='malformed_reference', params={'line': line_number})
        validate_span(start, end, line_number,
                      reference.genome_lengths.get(genome_id))
        validate_unique_id(contig_id, seen, line_number)
        seen.add(contig_id)
        reference.entries.append(
            ReferenceEntry(contig_id, genome_id, start, end))
    for entry in reference.entries:
        declared = reference.genome_lengths.get(entry.genome_id, 0)
        reference.genome_lengths[entry.genome_id] = max(declared, entry.end)
    return reference


def write_reference(reference, stream, taxonomy_stream=None):
    for entry in reference.entries:
        stream.write(
            f'{entry.contig_id}\t{entry.genome_id}\t'
            f'{entry.start}\t{entry.end}\n')
    if taxonomy_stream is None:
        return
    for genome_id, taxon in reference.taxonomy.items():
        length = reference.genome_lengths.get(genome_id)
        row = [genome_id, taxon.strain, taxon.species, taxon.genus]
        if length:
            row.append(str(length))
        taxonomy_stream.write('\t'.join(row) + '\n')


def restrict_mappings(mappings, contig_ids, sample_ids=None):
    """
    Оставляет в картировании только заданные контиги (и образцы).
    Вклад прочтения делится между оставшимися контигами; прочтения,
    у которых не осталось контигов, отбрасываются.
    """
    contig_ids = set(contig_ids)
    kept = []
    for mapping in mappings:
        if sample_ids is not None and mapping.sample_id not in sample_ids:
            continue
        targets = tuple(contig_id for contig_id in mapping.mapped_contig_ids
                        if contig_id in contig_ids)
        if targets:
            kept.append(MappingRecord(
                mapping.read_id, mapping.sample_id, targets))
    return kept
