import io
import itertools

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from bench.fusion import fusion_latent
from bench.metrics import (BinGenomeMetrics, best_matches, covered_bases,
                           evaluate_bins, merge_intervals)
from bench.pca import pca_project
from bench.recovery import RECALL_GRID, count_recovered, write_report
from cluster.partition import Bin, BinSet
from ingest.records import RANKS, ReferenceEntry, ReferenceMap, Taxon
from nn.network import init_params


def reference(*entries):
    return ReferenceMap(entries=[ReferenceEntry(*entry) for entry in entries])


def test_interval_union():
    assert merge_intervals([(5, 9), (0, 3), (2, 4), (9, 10)]) == [
        [0, 4], [5, 10]]
    assert covered_bases([(0, 10), (5, 15), (20, 25)]) == 20
    with pytest.raises(ValidationError) as excinfo:
        merge_intervals([(5, 5)])
    assert excinfo.value.code == 'inverted_span'


def test_partial_bin_of_partially_covered_genome():
    # Геном 1000 п.н., набор покрывает 800, бин - 600 из них.
    truth = reference(('c1', 'g1', 0, 600), ('c2', 'g1', 600, 800))
    bin_set = BinSet(bins=(Bin('b1', 's1', ('c1',)),
                           Bin('b2', 's1', ('c2',))))
    row = next(row for row in evaluate_bins(bin_set, truth)
               if row.bin_id == 'b1')
    assert (row.tp, row.fp, row.fn) == (600, 0, 200)
    assert row.precision == 1.0
    assert row.recall == 0.75


def test_bin_with_whole_dataset_has_full_recall():
    truth = reference(('c1', 'g1', 0, 100), ('c2', 'g1', 300, 350),
                      ('c3', 'g1', 80, 120))
    row, = evaluate_bins(
        BinSet(bins=(Bin('b', 's1', ('c1', 'c2', 'c3')),)), truth)
    assert row.recall == 1.0
    assert row.tp == 170


def test_unbinned_contigs_count_as_false_negatives():
    truth = reference(('c1', 'g1', 0, 100), ('c2', 'g1', 200, 400))
    bin_set = BinSet(bins=(Bin('b1', 's1', ('c1',)),))
    row, = evaluate_bins(bin_set, truth)
    assert (row.tp, row.fp, row.fn) == (100, 0, 200)
    assert row.recall == pytest.approx(1 / 3)
    row, = evaluate_bins(bin_set, truth, dataset_contigs=['c1'])
    assert row.fn == 0


def test_foreign_and_unknown_contigs_are_false_positives():
    truth = reference(('c1', 'g1', 0, 100), ('c2', 'g2', 0, 30))
    bin_set = BinSet(bins=(Bin('b', 's1', ('c1', 'c2', 'cx')),))
    metrics = evaluate_bins(bin_set, truth, contig_lengths={'cx': 50})
    by_genome = {row.genome_id: row for row in metrics}
    assert by_genome['g1'].fp == 30 + 50
    assert by_genome['g2'].fp == 100 + 50
    with pytest.raises(ValidationError) as excinfo:
        evaluate_bins(bin_set, truth)
    assert excinfo.value.code == 'unknown_contig'


def per_base_oracle(bin_set, truth):
    """
    Подсчет по отдельным позициям: множества (геном, позиция),
    покрытые бином и всеми контигами эталона.
    """
    by_contig = truth.by_contig()

    def positions(contig_ids):
        marked = set()
        for contig_id in contig_ids:
            entry = by_contig[contig_id]
            marked.update((entry.genome_id, base)
                          for base in range(entry.start, entry.end))
        return marked

    dataset = positions(entry.contig_id for entry in truth.entries)
    result = {}
    for item in bin_set.bins:
        marked = positions(item.contig_ids)
        for genome_id in {genome for genome, _ in marked}:
            tp = sum(1 for genome, _ in marked if genome == genome_id)
            on_genome = sum(1 for genome, _ in dataset if genome == genome_id)
            result[(item.bin_id, genome_id)] = (
                tp, len(marked) - tp, on_genome - tp)
    return result


@pytest.mark.parametrize('seed', range(200))
def test_metrics_match_per_base_counting(seed):
    rng = np.random.default_rng(seed)
    n_genomes = int(rng.integers(1, 6))
    entries = []
    for index in range(int(rng.integers(1, 31))):
        start = int(rng.integers(0, 150))
        end = start + int(rng.integers(1, 60))
        entries.append((f'c{index}', f'g{rng.integers(n_genomes)}',
                        start, end))
    truth = reference(*entries)
    groups = {}
    for contig_id, *_ in entries:
        group = int(rng.integers(5))
        if group < 4:
            groups.setdefault(f'b{group}', []).append(contig_id)
    bin_set = BinSet(bins=tuple(Bin(bin_id, 's1', tuple(members))
                                for bin_id, members in groups.items()))
    metrics = evaluate_bins(bin_set, truth)
    assert {(row.bin_id, row.genome_id): (row.tp, row.fp, row.fn)
            for row in metrics} == per_base_oracle(bin_set, truth)
    covered = per_base_oracle(BinSet(bins=(Bin(
        'all', 's1', tuple(e[0] for e in entries)),)), truth)
    for row in metrics:
        assert row.tp <= covered[('all', row.genome_id)][0]


def test_best_match_prefers_largest_overlap_then_genome_id():
    metrics = [BinGenomeMetrics('b1', 'g2', 5, 0, 0),
               BinGenomeMetrics('b1', 'g3', 10, 0, 0),
               BinGenomeMetrics('b2', 'g9', 4, 0, 0),
               BinGenomeMetrics('b2', 'g1', 4, 0, 0)]
    best = {row.bin_id: row.genome_id for row in best_matches(metrics)}
    assert best == {'b1': 'g3', 'b2': 'g1'}


def single_taxonomy(*genome_ids):
    return {genome_id: Taxon(genome_id, f'sp_{genome_id}', 'genus')
            for genome_id in genome_ids}


def test_recovery_thresholds_and_near_complete():
    report = count_recovered([BinGenomeMetrics('b', 'g1', 92, 0, 8)],
                             single_taxonomy('g1'))
    assert report.counts['strain'] == [1, 1, 1, 1, 1, 0, 0]
    assert report.near_complete['strain'] == 1
    assert report.best_recall == {'g1': pytest.approx(0.92)}


def test_imprecise_bin_is_not_counted():
    report = count_recovered([BinGenomeMetrics('b', 'g1', 90, 10, 0)],
                             single_taxonomy('g1'))
    assert report.counts['strain'] == [0] * len(RECALL_GRID)
    assert report.best_recall == {'g1': 0.0}


def test_strains_of_one_species_are_counted_once_per_rank():
    taxonomy = {'g1': Taxon('st1', 'sp1', 'ge1'),
                'g2': Taxon('st2', 'sp1', 'ge1')}
    metrics = [BinGenomeMetrics('b1', 'g1', 100, 0, 0),
               BinGenomeMetrics('b2', 'g2', 100, 0, 0)]
    report = count_recovered(metrics, taxonomy)
    assert report.counts['strain'][0] == 2
    assert report.counts['species'][0] == 1
    assert report.counts['genus'][0] == 1


def test_missing_taxonomy_names_the_genome():
    with pytest.raises(ValidationError) as excinfo:
        count_recovered([BinGenomeMetrics('b', 'g7', 1, 0, 0)], {})
    assert excinfo.value.params['genome'] == 'g7'


@pytest.mark.parametrize('seed', range(200))
def test_recovery_matches_exhaustive_enumeration(seed):
    rng = np.random.default_rng(seed)
    genomes = [f'g{i}' for i in range(6)]
    taxonomy = {genome_id: Taxon(genome_id, f'sp{i // 2}', f'ge{i // 4}')
                for i, genome_id in enumerate(genomes)}
    metrics = [BinGenomeMetrics(f'b{b}', genome_id,
                                int(rng.integers(1, 100)),
                                int(rng.integers(0, 4)),
                                int(rng.integers(0, 60)))
               for b, genome_id in itertools.product(range(4), genomes)
               if rng.random() < 0.5]
    report = count_recovered(metrics, taxonomy)
    for rank in RANKS:
        expected = []
        for threshold in RECALL_GRID:
            recovered = set()
            for row in metrics:
                tp, fp, fn = row.tp, row.fp, row.fn
                if tp / (tp + fp) >= 0.95 and tp / (tp + fn) > threshold:
                    recovered.add(taxonomy[row.genome_id].at(rank))
            expected.append(len(recovered))
        assert report.counts[rank] == expected
        assert expected == sorted(expected, reverse=True)


def test_empty_bin_set_gives_zero_report():
    truth = reference(('c1', 'g1', 0, 10))
    metrics = evaluate_bins(BinSet(bins=()), truth)
    report = count_recovered(metrics, single_taxonomy('g1'))
    assert metrics == []
    assert all(count == 0 for rank in RANKS
               for count in report.counts[rank])
    assert report.best_recall == {'g1': 0.0}


def test_report_layout():
    report = count_recovered([BinGenomeMetrics('b', 'g1', 92, 0, 8)],
                             single_taxonomy('g1'), label='CLMB')
    stream = io.StringIO()
    write_report([report], stream)
    header, *rows = stream.getvalue().splitlines()
    assert header.split('\t') == ['config', 'rank', '0.50', '0.60', '0.70',
                                  '0.80', '0.90', '0.95', '0.99', 'NC']
    assert [row.split('\t')[1] for row in rows] == list(RANKS)
    assert rows[0].split('\t') == ['CLMB', 'strain', '1', '1', '1', '1',
                                   '1', '0', '0', '1']


def test_pca_reconstructs_data_in_a_subspace():
    rng = np.random.default_rng(0)
    values = rng.standard_normal((200, 2)) @ rng.standard_normal((2, 5)) + 3
    projection = pca_project(values, dims=2)
    np.testing.assert_allclose(projection.reconstruct(), values, atol=1e-9)


def test_pca_variances_are_sorted():
    rng = np.random.default_rng(1)
    values = rng.standard_normal((300, 6)) * np.arange(1, 7)
    projection = pca_project(values, dims=4)
    spread = projection.values.var(axis=0, ddof=1)
    assert (np.diff(spread) <= 1e-9).all()
    np.testing.assert_allclose(spread, projection.explained_variance)


def test_pca_keeps_total_variance_of_isotropic_cloud():
    values = np.random.default_rng(2).standard_normal((5000, 4))
    projection = pca_project(values, dims=4)
    assert projection.values.var(axis=0, ddof=1).sum() == pytest.approx(
        4.0, rel=0.05)


def test_pca_dimension_checks(caplog):
    values = np.random.default_rng(3).standard_normal((50, 2)) @ np.ones(
        (2, 5))
    with pytest.raises(ValidationError) as excinfo:
        pca_project(values, dims=6)
    assert excinfo.value.code == 'invalid_dims'
    with caplog.at_level('WARNING', logger='bench.pca'):
        pca_project(values, dims=3)
    assert 'Ранг данных' in caplog.text


@pytest.mark.parametrize('part, transform, width', [
    ('both', 'raw', 8), ('tnf', 'raw', 5), ('abundance', 'pca', 3),
    ('both', 'pca', 4)])
def test_fusion_without_model(random_features, part, transform, width):
    latent = fusion_latent(random_features, part=part, transform=transform,
                           pca_dims=4)
    assert latent.values.shape == (10, width)
    assert latent.contig_ids == random_features.contig_ids


def test_fusion_through_encoder(random_features, small_spec):
    params = init_params(small_spec, np.random.default_rng(0))
    latent = fusion_latent(random_features, params=params)
    assert latent.values.shape == (10, small_spec.latent_dim)


@pytest.mark.parametrize('options, code', [
    ({'part': 'reads'}, 'unknown_part'),
    ({'transform': 'umap'}, 'unknown_transform'),
    ({'transform': 'encoded'}, 'missing_model'),
])
def test_fusion_errors(random_features, options, code):
    with pytest.raises(ValidationError) as excinfo:
        fusion_latent(random_features, **options)
    assert excinfo.value.code == code
