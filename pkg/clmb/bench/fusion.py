"""
Сравнение способов слияния признаков: численность, состав или оба
блока, в сыром виде, после PCA или после кодировщика VAE.
"""
import logging

from django.core.exceptions import ValidationError

from cluster.latent import LatentMatrix, encode_features
from features.matrix import PARTS

from .pca import pca_project

logger = logging.getLogger(__name__)

TRANSFORMS = ('raw', 'pca', 'encoded')


def fusion_latent(features, part='both', transform='encoded', params=None,
                  pca_dims=32):
    """
    Матрица для кластеризации. Для encoded нужны параметры сети,
    обученной на тех же столбцах признаков.
    """
    if part not in PARTS:
        raise ValidationError(
            'Неизвестный набор признаков %(part)s', code='unknown_part',
            params={'part': part})
    selected = features.select(part)
    if transform == 'raw':
        return LatentMatrix.from_features(selected, selected.values)
    if transform == 'pca':
        dims = min(pca_dims, selected.values.shape[1])
        if dims < pca_dims:
            logger.warning(
                'PCA: размерность %d меньше %d, используется %d',
                selected.values.shape[1], pca_dims, dims)
        projection = pca_project(selected.values, dims)
        return LatentMatrix.from_features(selected, projection.values)
    if transform == 'encoded':
        if params is None:
            raise ValidationError(
                'Для encoded нужна обученная модель', code='missing_model')
        return encode_features(params, selected)
    raise ValidationError(
        'Неизвестное преобразование %(name)s', code='unknown_transform',
        params={'name': transform})
