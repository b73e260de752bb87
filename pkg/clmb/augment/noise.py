"""
Три модели шума над векторами признаков и выбор пары форм
для контрастного обучения.

Операторы принимают как одну строку (D,), так и пачку строк (N, D),
и никогда не изменяют вход.
"""
import enum
import itertools
from dataclasses import dataclass

import numpy as np


class Kind(enum.Enum):
    GAUSSIAN = 'G'
    MASK = 'M'
    SHIFT = 'S'


@dataclass(frozen=True)
class AugmentConfig:
    gaussian_scale: float = 0.15
    mask_p: float = 0.01
    shift_fraction: float = 0.01
    gaussian_literal_mu: bool = False


@dataclass(frozen=True)
class FeatureStats:
    mean: np.ndarray
    var: np.ndarray

    @classmethod
    def from_rows(cls, rows):
        rows = np.atleast_2d(rows)
        return cls(mean=rows.mean(axis=0), var=rows.var(axis=0))


@dataclass(frozen=True)
class AugmentationForm:
    kind: Kind
    config: AugmentConfig = AugmentConfig()

    def __call__(self, rows, stats, rng):
        if self.kind is Kind.GAUSSIAN:
            return gaussian_noise(
                rows, stats, rng, scale=self.config.gaussian_scale,
                literal_mu=self.config.gaussian_literal_mu)
        if self.kind is Kind.MASK:
            return random_mask(rows, self.config.mask_p, rng)
        return random_shift(rows, self.config.shift_fraction, rng)


@dataclass(frozen=True)
class FormPair:
    first: AugmentationForm
    second: AugmentationForm

    @property
    def code(self):
        return self.first.kind.value + self.second.kind.value


FORM_KINDS = tuple(itertools.combinations_with_replacement(Kind, 2))


def gaussian_noise(row, stats, rng, scale=0.15, literal_mu=False):
    """
    x' = x + 0.15 * eps, eps ~ N(0, sigma_d^2) по каждому измерению.
    При literal_mu шум дополнительно умножается на среднее mu_d.
    """
    row = np.asarray(row)
    noise = rng.standard_normal(row.shape) * np.sqrt(stats.var)
    factor = scale * stats.mean if literal_mu else scale
    return row + factor * noise


def random_mask(row, p, rng):
    row = np.asarray(row)
    keep = rng.random(row.shape) >= p
    return np.where(keep, row, 0.0).astype(row.dtype, copy=False)


def shift_pair_count(dim, fraction):
    return max(1, round(fraction * dim))


def random_shift(row, fraction, rng):
    """
    Для max(1, round(fraction * D)) непересекающихся пар (i, j):
    f[i] -> 0.9 f[i], f[j] -> f[j] + 0.1 f[i]. Сумма пары сохраняется.
    """
    row = np.asarray(row)
    rows = np.atleast_2d(row)
    n_rows, dim = rows.shape
    pairs = min(shift_pair_count(dim, fraction), dim // 2)
    order = np.argsort(rng.random((n_rows, dim)), axis=1)[:, :2 * pairs]
    source, target = order[:, :pairs], order[:, pairs:]
    shifted = rows.astype(np.result_type(rows.dtype, np.float32))
    lines = np.arange(n_rows)[:, None]
    moved = rows[lines, source] / 10
    shifted[lines, source] = rows[lines, source] - moved
    shifted[lines, target] = rows[lines, target] + moved
    return shifted.reshape(row.shape)


def form_pair(kinds, config=AugmentConfig()):
    first, second = kinds
    return FormPair(
        AugmentationForm(first, config), AugmentationForm(second, config))


def sample_form_pair(rng, config=AugmentConfig()):
    """
    Равновероятный выбор одной из 6 пар {GG, GM, GS, MM, MS, SS}.
    """
    return form_pair(FORM_KINDS[rng.integers(len(FORM_KINDS))], config)


def augment_batch(batch, pair, rng):
    """
    Из N строк получается 2N: строки 2k и 2k+1 (с нуля) - два искажения
    k-й входной строки. Статистика для гауссова шума считается один раз
    по неискаженной пачке.
    """
    batch = np.asarray(batch)
    stats = FeatureStats.from_rows(batch)
    augmented = np.empty((2 * batch.shape[0], batch.shape[1]),
                         dtype=batch.dtype)
    augmented[0::2] = pair.first(batch, stats, rng)
    augmented[1::2] = pair.second(batch, stats, rng)
    return augmented
