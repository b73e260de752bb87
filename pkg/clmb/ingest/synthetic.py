import itertools
import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from django.core.exceptions import ValidationError

from clmb.seeding import substream
from features.kmers import count_kmers

from .records import (ContigRecord, MappingRecord, ReferenceEntry,
                      ReferenceMap, Taxon)

logger = logging.getLogger(__name__)

BASES = np.array(list('ACGT'))
MAX_TABLE_ATTEMPTS = 200


@dataclass(frozen=True)
class SynthConfig:
    genomes: int = 20
    samples: int = 5
    contigs_per_genome: int = 100
    genome_length: int = 250000
    min_contig_length: int = 2000
    divergence: float = 0.3
    concentration: float = 0.5
    abundance_sigma: float = 1.0
    reads_per_sample: int = 100000
    multimap_fraction: float = 0.05
    strains_per_species: int = 2
    species_per_genus: int = 2
    seed: int = 0


class SyntheticDataset(NamedTuple):
    contigs: list
    mappings: list
    reference: ReferenceMap
    genomes: dict


def tetramer_profile(sequence):
    counts = count_kmers(sequence, 4)
    return counts / counts.sum()


def markov_sequence(table, length, rng):
    """
    Последовательность цепи Маркова третьего порядка:
    table[i] - распределение следующего основания после тримера i.
    """
    cumulative = np.cumsum(table, axis=1)
    cumulative[:, -1] = 1.0
    draws = rng.random(length)
    codes = np.empty(length, dtype=np.int8)
    codes[:3] = rng.integers(0, 4, size=3)
    state = int(codes[0]) * 16 + int(codes[1]) * 4 + int(codes[2])
    rows = cumulative.tolist()
    for position in range(3, length):
        row = rows[state]
        draw = draws[position]
        base = 0
        while draw >= row[base]:
            base += 1
        codes[position] = base
        state = (state * 4 + base) & 63
    return ''.join(BASES[codes])


def _distinct_genomes(config, rng):
    genomes = []
    profiles = []
    attempts = 0
    while len(genomes) < config.genomes:
        attempts += 1
        if attempts > MAX_TABLE_ATTEMPTS * config.genomes:
            raise ValidationError(
                'Не удалось получить %(count)d геномов с расхождением '
                '%(divergence)s', code='infeasible_divergence',
                params={'count': config.genomes,
                        'divergence': config.divergence})
        table = rng.dirichlet(np.full(4, config.concentration), size=64)
        sequence = markov_sequence(table, config.genome_length, rng)
        profile = tetramer_profile(sequence)
        if any(np.abs(profile - other).sum() < config.divergence
               for other in profiles):
            continue
        genomes.append(sequence)
        profiles.append(profile)
    return genomes


def _fragment(config, rng):
    slack = config.genome_length - (
        config.contigs_per_genome * config.min_contig_length)
    weights = rng.dirichlet(np.ones(config.contigs_per_genome))
    lengths = config.min_contig_length + rng.multinomial(slack, weights)
    ends = np.cumsum(lengths)
    return list(zip((ends - lengths).tolist(), ends.tolist()))


def synthesize_dataset(config):
    """
    Метод строит настольный набор данных: G геномов как цепи Маркова
    третьего порядка с разными таблицами переходов; каждый образец
    собирает каждый геном заново: своя нарезка на contigs_per_genome
    контигов не короче min_contig_length. Картирования прочтений по образцам
    (лог-нормальные численности геномов, распределение по контигам
    пропорционально длине) и истинная карта происхождения.
    Полностью детерминирован при фиксированном seed.
    """
    if config.genomes < 1 or config.samples < 1:
        raise ValidationError(
            'Нужен хотя бы один геном и один образец', code='invalid_config')
    if config.genome_length < (
            config.contigs_per_genome * config.min_contig_length):
        raise ValidationError(
            'Геном длиной %(length)d нельзя нарезать на %(count)d контигов '
            'длиной от %(min)d', code='infeasible_fragmenting',
            params={'length': config.genome_length,
                    'count': config.contigs_per_genome,
                    'min': config.min_contig_length})
    rng = substream(config.seed, 'synth')
    sample_ids = [f'sample{j}' for j in range(config.samples)]
    sequences = _distinct_genomes(config, rng)

    contigs = []
    reference = ReferenceMap()
    spans_of_genome = []
    for g, sequence in enumerate(sequences):
        genome_id = f'genome{g}'
        species = g // config.strains_per_species
        reference.genome_lengths[genome_id] = len(sequence)
        reference.taxonomy[genome_id] = Taxon(
            strain=genome_id, species=f'species{species}',
            genus=f'genus{species // config.species_per_genus}')
        indices = []
        for j, sample_id in enumerate(sample_ids):
            for i, (start, end) in enumerate(_fragment(config, rng)):
                contig_id = f'g{g}s{j}c{i}'
                contigs.append(ContigRecord(
                    contig_id, sample_id, sequence[start:end]))
                reference.entries.append(
                    ReferenceEntry(contig_id, genome_id, start, end))
                indices.append(len(contigs) - 1)
        spans_of_genome.append(np.array(indices))

    abundance = rng.lognormal(
        0.0, config.abundance_sigma, size=(config.genomes, config.samples))
    lengths = np.array([c.length for c in contigs], dtype=float)
    genome_lengths = np.array([len(s) for s in sequences], dtype=float)
    mappings = []
    counter = itertools.count()
    for j, sample_id in enumerate(sample_ids):
        weights = abundance[:, j] * genome_lengths
        per_genome = rng.multinomial(
            config.reads_per_sample, weights / weights.sum())
        for g, indices in enumerate(spans_of_genome):
            share = lengths[indices] / lengths[indices].sum()
            per_contig = rng.multinomial(per_genome[g], share)
            for index, reads in zip(indices, per_contig):
                multi = rng.random(reads) < config.multimap_fraction
                partners = rng.choice(indices, size=reads)
                for is_multi, partner in zip(multi, partners):
                    targets = (contigs[index].contig_id,)
                    if is_multi and partner != index:
                        targets += (contigs[partner].contig_id,)
                    mappings.append(MappingRecord(
                        f'r{next(counter)}', sample_id, targets))
    logger.info(
        'Синтезировано %d геномов, %d контигов, %d прочтений',
        config.genomes, len(contigs), len(mappings))
    genomes = {f'genome{g}': s for g, s in enumerate(sequences)}
    return SyntheticDataset(contigs, mappings, reference, genomes)
