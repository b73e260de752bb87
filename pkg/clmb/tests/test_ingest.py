import io
import itertools

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from bench.metrics import covered_bases
from ingest.parsers import (filter_contigs, parse_fasta, parse_mapping,
                            parse_reference, restrict_mappings, write_fasta,
                            write_reference)
from ingest.records import ContigRecord, MappingRecord
from ingest.synthetic import (SynthConfig, synthesize_dataset,
                              tetramer_profile)


def test_parse_single_record():
    records = parse_fasta(io.StringIO('>s1|c1\nACGT\n'))
    assert records == [ContigRecord('c1', 's1', 'ACGT')]
    assert records[0].length == 4


def test_parse_multiline_record_is_case_folded():
    records = parse_fasta(io.StringIO('>s1|c1\nacgt\nACGT\n'))
    assert records[0].sequence == 'ACGTACGT'
    assert records[0].length == 8


def test_parse_rejects_invalid_character_with_line_number():
    with pytest.raises(ValidationError) as excinfo:
        parse_fasta(io.StringIO('>s1|c1\nACXT\n'))
    assert excinfo.value.code == 'invalid_nucleotide'
    assert excinfo.value.params['line'] == 2


@pytest.mark.parametrize('text, code', [
    ('>s1|c1\nACGT\n>s2|c1\nACGT\n', 'duplicate_contig'),
    ('>s1|c1\n>s1|c2\nACGT\n', 'empty_sequence'),
    ('>\nACGT\n', 'malformed_header'),
    ('ACGT\n', 'malformed_header'),
    ('>c1\nACGT\n', 'malformed_header'),
])
def test_parse_errors(text, code):
    with pytest.raises(ValidationError) as excinfo:
        parse_fasta(io.StringIO(text))
    assert excinfo.value.code == code


def test_parse_rejects_invalid_utf8_header():
    stream = io.BytesIO(b'>s1|c1\nACGT\n>s1|c\xff2\nACGT\n')
    with pytest.raises(ValidationError) as excinfo:
        parse_fasta(stream)
    assert excinfo.value.code == 'invalid_encoding'
    assert excinfo.value.params['line'] == 3


def test_parse_bare_ids_with_sample_assignment():
    records = parse_fasta(io.StringIO('>c1 описание\nAC\nGT\n'),
                          sample_of={'c1': 'sampleA'})
    assert records == [ContigRecord('c1', 'sampleA', 'ACGT')]


def test_fasta_round_trip():
    records = [ContigRecord('c1', 's1', 'ACGT' * 40),
               ContigRecord('c2', 's2', 'NNACG')]
    stream = io.StringIO()
    write_fasta(records, stream)
    assert parse_fasta(io.StringIO(stream.getvalue())) == records


def test_filter_contigs_keeps_long_records_in_order():
    records = [ContigRecord(f'c{n}', 's', 'A' * n)
               for n in (1999, 2000, 5000)]
    kept = filter_contigs(records, 2000)
    assert [record.length for record in kept] == [2000, 5000]
    assert filter_contigs([], 2000) == []
    assert filter_contigs(records, 0) == records


def test_parse_mapping_splits_targets():
    mappings = parse_mapping(io.StringIO('r1\ts1\tc1,c2\n'), {'c1', 'c2'})
    assert mappings == [MappingRecord('r1', 's1', ('c1', 'c2'))]


def test_same_read_in_two_samples_gives_two_records():
    mappings = parse_mapping(
        io.StringIO('r1\ts1\tc1\nr1\ts2\tc1\n'), {'c1'})
    assert [mapping.sample_id for mapping in mappings] == ['s1', 's2']


@pytest.mark.parametrize('text, code', [
    ('r1\ts1\t\n', 'empty_mapping'),
    ('r1\ts1\tc9\n', 'unknown_contig'),
    ('r1\ts1\n', 'malformed_mapping'),
])
def test_parse_mapping_errors(text, code):
    with pytest.raises(ValidationError) as excinfo:
        parse_mapping(io.StringIO(text), {'c1'})
    assert excinfo.value.code == code


def test_unknown_contig_error_names_the_id():
    with pytest.raises(ValidationError) as excinfo:
        parse_mapping(io.StringIO('r1\ts1\tc1,cX\n'), {'c1'})
    assert excinfo.value.params['id'] == 'cX'


def test_parse_reference_with_taxonomy_lengths():
    reference = parse_reference(
        io.StringIO('c1\tg1\t0\t600\nc2\tg1\t500\t800\n'),
        io.StringIO('g1\tg1\tsp1\tgen1\t1000\n'))
    assert reference.genome_lengths == {'g1': 1000}
    assert reference.taxonomy['g1'].at('species') == 'sp1'
    assert reference.by_contig()['c2'].span == 300


def test_parse_reference_without_lengths_uses_largest_end():
    reference = parse_reference(io.StringIO('c1\tg1\t100\t700\n'))
    assert reference.genome_lengths == {'g1': 700}


@pytest.mark.parametrize('text, code', [
    ('c1\tg1\t10\t10\n', 'inverted_span'),
    ('c1\tg1\tx\t10\n', 'malformed_reference'),
    ('c1\tg1\t0\t2000\n', 'span_out_of_genome'),
])
def test_parse_reference_errors(text, code):
    with pytest.raises(ValidationError) as excinfo:
        parse_reference(io.StringIO(text),
                        io.StringIO('g1\tg1\tsp\tgen\t1000\n'))
    assert excinfo.value.code == code


@pytest.mark.parametrize('length', ['1kb', '0', '-5'])
def test_taxonomy_length_must_be_a_positive_number(length):
    with pytest.raises(ValidationError) as excinfo:
        parse_reference(io.StringIO('c1\tg1\t0\t10\n'),
                        io.StringIO(f'g1\tg1\tsp\tgen\t{length}\n'))
    assert excinfo.value.code == 'malformed_taxonomy'
    assert excinfo.value.params['line'] == 1


def test_restrict_mappings_drops_filtered_contigs_and_samples():
    mappings = [MappingRecord('r1', 's1', ('c1', 'c2')),
                MappingRecord('r2', 's1', ('c2',)),
                MappingRecord('r3', 's2', ('c1',))]
    kept = restrict_mappings(mappings, {'c1'}, {'s1'})
    assert kept == [MappingRecord('r1', 's1', ('c1',))]


def test_single_contig_dataset_reference_covers_its_span():
    dataset = synthesize_dataset(SynthConfig(
        genomes=1, samples=1, contigs_per_genome=1, genome_length=3000,
        reads_per_sample=50))
    entry, = dataset.reference.entries
    assert (entry.start, entry.end) == (0, 3000)
    assert dataset.contigs[0].sequence == dataset.genomes['genome0']


def test_synthesis_is_deterministic(tiny_synth):
    first = synthesize_dataset(tiny_synth)
    second = synthesize_dataset(tiny_synth)
    assert first.contigs == second.contigs
    assert first.mappings == second.mappings
    assert first.reference == second.reference


def test_synthetic_genomes_keep_divergence(dataset, tiny_synth):
    profiles = [tetramer_profile(sequence)
                for sequence in dataset.genomes.values()]
    for left, right in itertools.combinations(profiles, 2):
        assert np.abs(left - right).sum() >= tiny_synth.divergence


def test_synthetic_spans_stay_inside_genomes(dataset, tiny_synth):
    reference = dataset.reference
    by_contig = reference.by_contig()
    for record in dataset.contigs:
        entry = by_contig[record.contig_id]
        genome = dataset.genomes[entry.genome_id]
        assert genome[entry.start:entry.end] == record.sequence
        assert record.length >= tiny_synth.min_contig_length
    for genome_id, length in reference.genome_lengths.items():
        spans = [(e.start, e.end) for e in reference.entries
                 if e.genome_id == genome_id]
        assert covered_bases(spans) <= length


def test_every_sample_assembles_every_genome(dataset, tiny_synth):
    owners = {(record.contig_id.split('s')[0], record.sample_id)
              for record in dataset.contigs}
    assert len(owners) == tiny_synth.genomes * tiny_synth.samples
    reads = {mapping.sample_id for mapping in dataset.mappings}
    assert reads == {f'sample{j}' for j in range(tiny_synth.samples)}


def test_synthetic_taxonomy_groups_strains():
    dataset = synthesize_dataset(SynthConfig(
        genomes=4, samples=1, contigs_per_genome=1, genome_length=3000,
        divergence=0.2, reads_per_sample=10))
    taxonomy = dataset.reference.taxonomy
    assert taxonomy['genome0'].species == taxonomy['genome1'].species
    assert taxonomy['genome1'].species != taxonomy['genome2'].species
    assert len({taxon.genus for taxon in taxonomy.values()}) == 1


def test_infeasible_fragmenting_is_rejected():
    with pytest.raises(ValidationError) as excinfo:
        synthesize_dataset(SynthConfig(
            genomes=1, contigs_per_genome=3, genome_length=5000))
    assert excinfo.value.code == 'infeasible_fragmenting'


def test_written_reference_parses_back(dataset):
    stream, taxonomy = io.StringIO(), io.StringIO()
    write_reference(dataset.reference, stream, taxonomy)
    parsed = parse_reference(
        io.StringIO(stream.getvalue()), io.StringIO(taxonomy.getvalue()))
    assert parsed.entries == dataset.reference.entries
    assert parsed.genome_lengths == dataset.reference.genome_lengths
