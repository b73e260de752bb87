"""
Итеративная кластеризация медоидами по косинусному расстоянию.

Пока остаются точки вне кластеров: берется неразмеченная точка
с наименьшим индексом, затем она переносится в медоид своей ближней
окрестности, пока медоид не перестанет меняться. Радиус кластера
выбирается по гистограмме расстояний от медоида: первая впадина между
ближней модой и фоном, иначе радиус по умолчанию.
"""
import logging
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter1d
from scipy.signal import find_peaks

from .partition import Clustering

logger = logging.getLogger(__name__)

HISTOGRAM_RANGE = 2.0
HISTOGRAM_BIN = 0.005
SMOOTHING_BINS = 2.0
VALLEY_DEPTH = 0.5


@dataclass(frozen=True)
class MedoidConfig:
    max_steps: int = 25
    neighbor_radius: float = 0.05
    default_radius: float = 0.15
    min_cluster_size: int = 1


def unit_rows(values):
    values = np.asarray(values, dtype=np.float64)
    norms = np.linalg.norm(values, axis=1, keepdims=True)
    return np.divide(values, norms, out=np.zeros_like(values),
                     where=norms > 0)


def cosine_distances(unit, index, candidates):
    """
    1 - cos между точкой index и точками candidates; нулевой вектор
    считается удаленным на 1 от всех остальных.
    """
    distances = 1.0 - unit[candidates] @ unit[index]
    return np.clip(distances, 0.0, HISTOGRAM_RANGE)


def find_medoid(unit, seed, remaining, config):
    """
    Перемещает затравку в медоид окрестности радиуса neighbor_radius
    не более max_steps раз; возвращает конечный медоид.
    """
    current = seed
    visited = {seed}
    for _ in range(config.max_steps):
        distances = cosine_distances(unit, current, remaining)
        neighbors = remaining[distances <= config.neighbor_radius]
        if neighbors.size <= 1:
            break
        block = 1.0 - unit[neighbors] @ unit[neighbors].T
        medoid = int(neighbors[np.argmin(block.sum(axis=1))])
        if medoid in visited:
            break
        visited.add(medoid)
        current = medoid
    return current


def _flat_middle(segment, floor):
    start = int(np.flatnonzero(segment <= floor + 1e-12)[0])
    end = start
    while end + 1 < segment.size and segment[end + 1] <= floor + 1e-12:
        end += 1
    return (start + end) // 2


def valley_radius(distances):
    """
    Радиус по сглаженной гистограмме расстояний: середина плоского
    минимума между первым пиком и первым из следующих пиков, перед
    которым плотность падает хотя бы вдвое. Без такого пика впадина
    принимается, только если плотность после первого пика падает
    до нуля. None - впадины нет.
    """
    bins = int(round(HISTOGRAM_RANGE / HISTOGRAM_BIN))
    counts, edges = np.histogram(
        distances, bins=bins, range=(0.0, HISTOGRAM_RANGE))
    smooth = gaussian_filter1d(
        counts.astype(np.float64), SMOOTHING_BINS, mode='constant')
    peaks, _ = find_peaks(np.concatenate([[0.0], smooth, [0.0]]))
    peaks = peaks - 1
    if peaks.size == 0:
        return None
    first = peaks[0]
    middle = None
    for peak in peaks[1:]:
        segment = smooth[first:peak]
        floor = segment.min()
        if floor <= VALLEY_DEPTH * min(smooth[first], smooth[peak]):
            middle = first + _flat_middle(segment, floor)
            break
    if middle is None:
        segment = smooth[first:]
        if segment.min() > 1e-12:
            return None
        middle = first + _flat_middle(segment, segment.min())
    return float((edges[middle] + edges[middle + 1]) / 2)


def iterative_medoid(latent, config=MedoidConfig()):
    """
    Кластеризация латентных векторов; детерминирована при заданном
    порядке строк.
    """
    unit = unit_rows(latent.values)
    n_points = unit.shape[0]
    labels = np.full(n_points, -1, dtype=np.int64)
    next_label = 0
    fallbacks = 0
    while True:
        remaining = np.flatnonzero(labels < 0)
        if remaining.size == 0:
            break
        seed = int(remaining[0])
        medoid = find_medoid(unit, seed, remaining, config)
        distances = cosine_distances(unit, medoid, remaining)
        distances[remaining == medoid] = 0.0
        radius = valley_radius(distances)
        if radius is None:
            radius = config.default_radius
            fallbacks += 1
        members = remaining[distances <= radius]
        if members.size < config.min_cluster_size:
            for member in members:
                labels[member] = next_label
                next_label += 1
            continue
        labels[members] = next_label
        next_label += 1
    logger.info(
        'Итеративные медоиды: %d кластеров из %d контигов '
        '(радиус по умолчанию: %d раз)', next_label, n_points, fallbacks)
    return Clustering.from_labels(labels)
