import logging
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PcaProjection:
    values: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray
    mean: np.ndarray

    def reconstruct(self):
        return self.values @ self.components.T + self.mean


def pca_project(values, dims=32):
    """
    Центрирование и проекция на dims главных направлений,
    найденных разложением ковариационной матрицы (numpy.linalg.eigh).
    Столбцы упорядочены по невозрастанию дисперсии; знак каждого
    направления фиксирован (наибольшая по модулю координата > 0).
    """
    values = np.asarray(getattr(values, 'values', values), dtype=np.float64)
    n_rows, dim = values.shape
    if dims > dim:
        raise ValidationError(
            'Число компонент %(dims)d больше размерности %(dim)d',
            code='invalid_dims', params={'dims': dims, 'dim': dim})
    mean = values.mean(axis=0) if n_rows else np.zeros(dim)
    centered = values - mean
    covariance = centered.T @ centered / max(n_rows - 1, 1)
    eigenvalues, eigenvectors = np.linalg.eigh(covariance)
    order = np.argsort(eigenvalues)[::-1][:dims]
    components = eigenvectors[:, order]
    signs = np.sign(components[np.abs(components).argmax(axis=0),
                               np.arange(dims)])
    components = components * np.where(signs == 0, 1.0, signs)
    rank = np.linalg.matrix_rank(centered) if n_rows else 0
    if dims > rank:
        logger.warning(
            'Ранг данных %d меньше числа компонент %d: последние '
            'компоненты имеют нулевую дисперсию', rank, dims)
    return PcaProjection(
        values=centered @ components, components=components,
        explained_variance=np.clip(eigenvalues[order], 0.0, None),
        mean=mean)
