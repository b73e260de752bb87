import logging
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from sklearn.cluster import DBSCAN, MiniBatchKMeans

from .medoid import MedoidConfig, iterative_medoid
from .partition import Clustering

logger = logging.getLogger(__name__)

ALGORITHMS = ('medoid', 'kmeans', 'dbscan')


@dataclass(frozen=True)
class KMeansConfig:
    k: int = 750
    batch_size: int = 4096
    max_iter: int = 25
    init_size: int = 20000
    reassignment_ratio: float = 0.02
    n_init: int = 3


@dataclass(frozen=True)
class DbscanConfig:
    eps: float = 0.35
    min_samples: int = 2


def minibatch_kmeans(latent, config=KMeansConfig(), seed=0):
    """
    MiniBatchKMeans с параметрами бенчмарка; k больше числа контигов
    уменьшается до числа контигов. Итоговое разбиение - по ближайшему
    центру (евклидово расстояние) для всех точек.
    """
    values = latent.values
    n_points = values.shape[0]
    k = config.k
    if k > n_points:
        logger.warning(
            'k=%d больше числа контигов %d, используется k=%d',
            k, n_points, n_points)
        k = n_points
    model = MiniBatchKMeans(
        n_clusters=k, batch_size=config.batch_size,
        max_iter=config.max_iter,
        init_size=max(min(config.init_size, n_points), k),
        reassignment_ratio=config.reassignment_ratio,
        n_init=config.n_init, random_state=seed)
    model.fit(values)
    labels = model.predict(values)
    logger.info('MiniBatchKMeans: k=%d, инерция %.6g', k, model.inertia_)
    return Clustering.from_labels(labels)


def dbscan(latent, config=DbscanConfig()):
    """
    DBSCAN по евклидову расстоянию; шумовые точки становятся
    отдельными кластерами из одного контига.
    """
    labels = DBSCAN(
        eps=config.eps, min_samples=config.min_samples).fit_predict(
            latent.values)
    noise = labels < 0
    if noise.any():
        labels = labels.copy()
        start = labels.max() + 1
        labels[noise] = start + np.arange(int(noise.sum()))
        logger.info('DBSCAN: %d шумовых точек стали одиночными кластерами',
                    int(noise.sum()))
    return Clustering.from_labels(labels)


def cluster_latent(latent, algorithm='medoid', options=None, seed=0):
    """
    Выбор алгоритма по имени; options - секция cluster конфигурации.
    """
    options = options or {}
    if latent.n_contigs == 0:
        return Clustering.from_labels(np.empty(0, dtype=np.int64))
    if algorithm == 'medoid':
        return iterative_medoid(latent, MedoidConfig(
            max_steps=options.get('max_steps', 25),
            neighbor_radius=options.get('neighbor_radius', 0.05),
            default_radius=options.get('default_radius', 0.15),
            min_cluster_size=options.get('min_cluster_size', 1)))
    if algorithm == 'kmeans':
        return minibatch_kmeans(latent, KMeansConfig(
            k=options.get('kmeans_k', 750),
            batch_size=options.get('kmeans_batch', 4096),
            max_iter=options.get('kmeans_max_iter', 25),
            init_size=options.get('kmeans_init_size', 20000),
            reassignment_ratio=options.get(
                'kmeans_reassignment_ratio', 0.02)), seed=seed)
    if algorithm == 'dbscan':
        return dbscan(latent, DbscanConfig(
            eps=options.get('eps', 0.35),
            min_samples=options.get('min_samples', 2)))
    raise ValidationError(
        'Неизвестный алгоритм кластеризации %(name)s',
        code='unknown_algorithm', params={'name': algorithm})
