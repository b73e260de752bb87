"""
Шаги конвейера, общие для отдельных команд и команды pipeline.
Каждый шаг получает команду (для учета входных и выходных файлов
в манифесте), проверенную конфигурацию и пути.
"""
import logging
import os

from django.core.exceptions import ValidationError

from bench.fusion import fusion_latent
from bench.metrics import evaluate_bins
from bench.recovery import (count_recovered, write_bin_metrics,
                            write_genome_recall, write_report)
from clmb.seeding import substream
from cluster.algorithms import cluster_latent
from cluster.latent import encode_features, write_latent_tsv
from cluster.partition import (multi_split, read_clusters, write_bin_fastas,
                               write_clusters)
from features.kernel import build_kernel
from features.matrix import (declared_samples, featurize, load_features,
                             save_features, write_features_tsv)
from ingest.parsers import (filter_contigs, parse_fasta, parse_mapping,
                            parse_reference, restrict_mappings, write_fasta,
                            write_mapping, write_reference)
from ingest.synthetic import synthesize_dataset
from nn.checkpoint import load_checkpoint
from train.loop import load_training, save_training, train, write_loss_log

from .factories import (augment_config, loss_weights, network_spec,
                        synth_config, train_config)

logger = logging.getLogger(__name__)

FEATURES_FILE = 'features.clmb'
CHECKPOINT_FILE = 'model.clmbvae'
LOSS_LOG_FILE = 'loss.tsv'
CLUSTERS_FILE = 'clusters.tsv'
LATENT_FILE = 'latent.tsv'
BINS_DIR = 'bins'
REPORT_FILE = 'report.tsv'
BIN_METRICS_FILE = 'bin_metrics.tsv'
GENOME_RECALL_FILE = 'genome_recall.tsv'
CONTIGS_FILE = 'contigs.fna'
MAPPING_FILE = 'mapping.tsv'
REFERENCE_FILE = 'reference.tsv'
TAXONOMY_FILE = 'taxonomy.tsv'


def _read_fasta(command, config, path):
    with open(path, encoding='utf-8') as stream:
        records = parse_fasta(stream, separator=config['ingest']['separator'])
    command.record_input(path)
    return records


def featurize_step(command, config, fasta, mapping, out, tsv=None):
    """
    FASTA + картирование -> файл признаков CLMBFEAT. Контиги короче
    ingest.min_length отбрасываются; при features.samples = N остаются
    контиги и прочтения первых N образцов.
    """
    if not os.path.isfile(mapping):
        raise ValidationError(
            'Файл картирования %(path)s не найден: без численности '
            'признаки не строятся', code='missing_mapping',
            params={'path': mapping})
    records = _read_fasta(command, config, fasta)
    with open(mapping, encoding='utf-8') as stream:
        mappings = parse_mapping(stream, records)
    command.record_input(mapping)
    kept = filter_contigs(records, config['ingest']['min_length'])
    logger.info('Контигов не короче %d: %d из %d',
                config['ingest']['min_length'], len(kept), len(records))
    samples = declared_samples(kept, mappings)
    if config['features']['samples']:
        samples = samples[:config['features']['samples']]
        kept = [record for record in kept if record.sample_id in samples]
    if not kept:
        raise ValidationError(
            'После фильтрации не осталось контигов', code='no_contigs')
    mappings = restrict_mappings(
        mappings, {record.contig_id for record in kept}, set(samples))
    kernel = build_kernel(config['features']['k'])
    features = featurize(kept, mappings, kernel, samples)
    with open(out, 'wb') as stream:
        save_features(features, stream)
    command.record_output(out)
    if tsv:
        with open(tsv, 'w', encoding='utf-8') as stream:
            write_features_tsv(features, stream)
        command.record_output(tsv)
    return features


def read_features(command, path):
    with open(path, 'rb') as stream:
        features = load_features(stream)
    command.record_input(path)
    return features


def train_features(config, features, resume_stream=None):
    """
    Обучение на уже выбранных столбцах признаков; resume_stream -
    открытая контрольная точка для продолжения.
    """
    spec = network_spec(config, features.n_samples, features.tnf_dim)
    params = state = weights = None
    start_epoch = 0
    if resume_stream is not None:
        params, state, weights, start_epoch = load_training(
            resume_stream, expected_spec=spec)
        logger.info('Продолжение обучения с эпохи %d', start_epoch)
    else:
        weights = loss_weights(config, spec)
    return train(
        features, spec, train_config(config),
        aug_config=augment_config(config), loss_weights=weights,
        contrast_on=config['loss']['contrast_on'], params=params,
        state=state, start_epoch=start_epoch)


def train_step(command, config, features_path, out, loss_log=None,
               resume=None):
    features = read_features(command, features_path)
    if resume:
        with open(resume, 'rb') as stream:
            result = train_features(config, features, stream)
        command.record_input(resume)
    else:
        result = train_features(config, features)
    with open(out, 'wb') as stream:
        save_training(stream, result, train_config(config))
    command.record_output(out)
    if loss_log:
        append = bool(resume) and os.path.isfile(loss_log)
        with open(loss_log, 'a' if append else 'w',
                  encoding='utf-8') as stream:
            write_loss_log(result.history, stream, header=not append)
        command.record_output(loss_log)
    return result


def check_compatible(spec, features):
    if (spec.n_samples, spec.tnf_dim) != (
            features.n_samples, features.tnf_dim):
        raise ValidationError(
            'Модель обучена на %(model)s (образцы, TNF), признаки имеют '
            '%(features)s', code='shape_mismatch',
            params={'model': (spec.n_samples, spec.tnf_dim),
                    'features': (features.n_samples, features.tnf_dim)})


def cluster_seed(config):
    return int(substream(config['run']['seed'], 'cluster').integers(2 ** 31))


def bin_step(command, config, features_path, checkpoint, out_dir,
             fasta=None, latent_tsv=None):
    """
    Кодирование -> кластеризация -> разделение по образцам ->
    clusters.tsv и, если передан FASTA, по файлу на бин.
    """
    features = read_features(command, features_path)
    with open(checkpoint, 'rb') as stream:
        params, _, _ = load_checkpoint(stream)
    command.record_input(checkpoint)
    check_compatible(params.spec, features)
    latent = encode_features(params, features)
    clustering = cluster_latent(
        latent, config['cluster']['algorithm'], config['cluster'],
        seed=cluster_seed(config))
    bin_set = multi_split(
        clustering, latent.contig_ids, latent.sample_of_contig)
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, CLUSTERS_FILE)
    with open(path, 'w', encoding='utf-8') as stream:
        write_clusters(bin_set, stream)
    command.record_output(path)
    if latent_tsv:
        with open(latent_tsv, 'w', encoding='utf-8') as stream:
            write_latent_tsv(latent, stream)
        command.record_output(latent_tsv)
    if fasta:
        records = _read_fasta(command, config, fasta)
        directory = os.path.join(out_dir, BINS_DIR)
        write_bin_fastas(bin_set, records, directory)
        command.record_output(directory)
    return bin_set


def read_truth(command, reference, taxonomy):
    with open(reference, encoding='utf-8') as stream, \
            open(taxonomy, encoding='utf-8') as taxonomy_stream:
        truth = parse_reference(stream, taxonomy_stream)
    command.record_input(reference)
    command.record_input(taxonomy)
    return truth


def write_bench(command, out_dir, reports, groups):
    """
    groups - пары (конфигурация, метрики) в порядке reports.
    """
    os.makedirs(out_dir, exist_ok=True)
    writers = (
        (REPORT_FILE, lambda stream: write_report(reports, stream)),
        (BIN_METRICS_FILE, lambda stream: write_bin_metrics(groups, stream)),
        (GENOME_RECALL_FILE,
         lambda stream: write_genome_recall(reports, stream)),
    )
    for name, writer in writers:
        path = os.path.join(out_dir, name)
        with open(path, 'w', encoding='utf-8') as stream:
            writer(stream)
        command.record_output(path)


def bench_step(command, config, clusters, truth, out_dir,
               contig_lengths=None, label='clmb', dataset_contigs=None):
    with open(clusters, encoding='utf-8') as stream:
        bin_set = read_clusters(stream)
    command.record_input(clusters)
    metrics = evaluate_bins(bin_set, truth, contig_lengths, dataset_contigs)
    report = count_recovered(
        metrics, truth.taxonomy,
        precision_floor=config['bench']['precision_floor'], label=label)
    write_bench(command, out_dir, [report], [(label, metrics)])
    return report


def fusion_step(command, config, features_path, truth, out_dir, parts,
                transforms, checkpoint=None):
    """
    Матрица эксперимента слияния: для каждого набора признаков и
    преобразования - кластеризация, разделение по образцам и отчет.
    Для encoded без подходящей контрольной точки модель обучается
    на выбранных столбцах.
    """
    features = read_features(command, features_path)
    params = None
    if checkpoint:
        with open(checkpoint, 'rb') as stream:
            params, _, _ = load_checkpoint(stream)
        command.record_input(checkpoint)
    reports = []
    groups = []
    for part in parts:
        selected = features.select(part)
        for transform in transforms:
            model = None
            if transform == 'encoded':
                model = params
                if model is None or (
                        model.spec.n_samples, model.spec.tnf_dim) != (
                        selected.n_samples, selected.tnf_dim):
                    logger.info('Обучение модели для признаков %s', part)
                    model = train_features(config, selected).params
            latent = fusion_latent(
                features, part, transform, params=model,
                pca_dims=config['bench']['pca_dims'])
            clustering = cluster_latent(
                latent, config['cluster']['algorithm'], config['cluster'],
                seed=cluster_seed(config))
            bin_set = multi_split(
                clustering, latent.contig_ids, latent.sample_of_contig)
            metrics = evaluate_bins(
                bin_set, truth, dataset_contigs=features.contig_ids)
            label = f'{transform}-{part}'
            reports.append(count_recovered(
                metrics, truth.taxonomy,
                precision_floor=config['bench']['precision_floor'],
                label=label))
            groups.append((label, metrics))
            logger.info('%s: NC штаммов %d', label,
                        reports[-1].near_complete['strain'])
    write_bench(command, out_dir, reports, groups)
    return reports


def synth_step(command, config, out_dir):
    dataset = synthesize_dataset(synth_config(config))
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, name) for name in (
        CONTIGS_FILE, MAPPING_FILE, REFERENCE_FILE, TAXONOMY_FILE)}
    with open(paths[CONTIGS_FILE], 'w', encoding='utf-8') as stream:
        write_fasta(dataset.contigs, stream,
                    separator=config['ingest']['separator'])
    with open(paths[MAPPING_FILE], 'w', encoding='utf-8') as stream:
        write_mapping(dataset.mappings, stream)
    with open(paths[REFERENCE_FILE], 'w', encoding='utf-8') as stream, \
            open(paths[TAXONOMY_FILE], 'w', encoding='utf-8') as taxonomy:
        write_reference(dataset.reference, stream, taxonomy)
    for path in paths.values():
        command.record_output(path)
    return paths
