"""
Функция потерь LOSS = L1 + w2 * L2 + w3 * L3 и ее градиенты
по выходам сети.

Строки пачки идут парами: строки 2k и 2k+1 (с нуля) - два искажения
k-го контига; обе восстанавливают чистую k-ю входную строку.
"""
import math
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError
from scipy.special import logsumexp

from clmb.exceptions import NumericalError

LOG_EPS = 1e-9
ABUNDANCE_SHARE = 0.85
TNF_SHARE = 0.15
KL_SCALE = 2e5
CONTRAST_SHARE = 1.35
TAU = 0.1


@dataclass
class LossWeights:
    n_samples: int
    tnf_dim: int
    latent_dim: int
    tau: float = TAU
    w2: float = 1.0
    w3: float = 1.0
    l1_0: float = 1.0
    l2_0: float = 1.0
    l3_0: float = 1.0
    calibrated: bool = False

    def __post_init__(self):
        if self.tau <= 0:
            raise ValidationError(
                'Температура tau должна быть положительной',
                code='invalid_tau')

    @property
    def w_a(self):
        """
        0.85 / ln(s); для одного образца ln(1) = 0, поэтому w_A = 0.85
        и кросс-энтропия заменяется суммой квадратов.
        """
        if self.n_samples > 1:
            return ABUNDANCE_SHARE / math.log(self.n_samples)
        return ABUNDANCE_SHARE if self.n_samples == 1 else 0.0

    @property
    def w_t(self):
        return TNF_SHARE / self.tnf_dim if self.tnf_dim else 0.0

    def calibrate(self, l1, l2, l3):
        if l2 == 0 or l3 == 0:
            raise NumericalError(
                f'Вырожденная пачка при калибровке: L2={l2}, L3={l3}')
        self.l1_0, self.l2_0, self.l3_0 = float(l1), float(l2), float(l3)
        self.w2 = (self.l1_0 / self.l2_0) / (KL_SCALE * self.latent_dim)
        self.w3 = CONTRAST_SHARE * self.l1_0 / self.l3_0
        self.calibrated = True

    def state(self):
        return {'tau': self.tau, 'w2': self.w2, 'w3': self.w3,
                'l1_0': self.l1_0, 'l2_0': self.l2_0, 'l3_0': self.l3_0,
                'calibrated': self.calibrated}


@dataclass
class LossBreakdown:
    l1: float
    l2: float
    l3: float
    total: float
    w2: float
    w3: float
    grads: dict = field(default_factory=dict)


def _paired(targets):
    return np.repeat(targets, 2, axis=0)


def reconstruction_loss(a_out, t_out, a_in, t_in, weights):
    """
    L1 = w_A * sum(-A_in * ln(A_out + 1e-9)) + w_T * sum((T_out - T_in)^2)
    по всем 2N строкам; строка k сравнивается с чистой строкой k // 2.
    Возвращает (L1, dL1/dA_out, dL1/dT_out).
    """
    if (a_out < 0).any():
        raise ValidationError(
            'Отрицательная численность на выходе сети',
            code='negative_abundance')
    a_target = _paired(a_in)
    t_target = _paired(t_in)
    w_a, w_t = weights.w_a, weights.w_t
    if weights.n_samples == 1:
        residual_a = a_out - a_target
        abundance = w_a * float(np.sum(residual_a ** 2))
        grad_a = 2 * w_a * residual_a
    else:
        shifted = a_out + LOG_EPS
        abundance = -w_a * float(np.sum(a_target * np.log(shifted)))
        grad_a = -w_a * a_target / shifted
    residual_t = t_out - t_target
    tnf = w_t * float(np.sum(residual_t ** 2))
    grad_t = 2 * w_t * residual_t
    return abundance + tnf, grad_a, grad_t


def kl_loss(mu, sigma):
    """
    L2 = -sum 1/2 (1 + ln(sigma) - mu^2 - sigma), sigma - дисперсия.
    """
    if (sigma <= 0).any():
        raise ValidationError(
            'Дисперсия sigma должна быть положительной',
            code='invalid_sigma')
    value = -0.5 * float(np.sum(1 + np.log(sigma) - mu ** 2 - sigma))
    return value, mu.copy(), -0.5 * (1.0 / sigma - 1.0)


def _cosine_matrix(x):
    norms = np.linalg.norm(x, axis=1)
    if (norms == 0).any():
        raise NumericalError(
            f'Нулевая строка проекции {int(np.flatnonzero(norms == 0)[0])}: '
            'косинус не определен')
    unit = x / norms[:, None]
    return unit, norms, unit @ unit.T


def ntxent_pair(i, j, x, tau=TAU):
    """
    l(i, j) = -log(exp(cos(x_i, x_j) / tau) /
    sum_{s != i} exp(cos(x_i, x_s) / tau)). Несимметрична.
    Индексы с нуля.
    """
    if i == j:
        raise ValidationError('i и j должны различаться', code='same_index')
    _, _, cosine = _cosine_matrix(np.asarray(x, dtype=float))
    logits = np.delete(cosine[i], i) / tau
    return float(logsumexp(logits) - cosine[i, j] / tau)


def contrastive_loss(x, tau=TAU):
    """
    L3 = 1/(2N) * sum_k (l(2k, 2k+1) + l(2k+1, 2k)) и градиент по x
    через косинусную близость и стабилизированный log-sum-exp.
    """
    rows = x.shape[0]
    unit, norms, cosine = _cosine_matrix(x)
    logits = cosine / tau
    np.fill_diagonal(logits, -np.inf)
    partner = np.arange(rows) ^ 1
    log_norm = logsumexp(logits, axis=1)
    positive = logits[np.arange(rows), partner]
    value = float(np.sum(log_norm - positive)) / rows

    probs = np.exp(logits - log_norm[:, None])
    probs[np.arange(rows), partner] -= 1.0
    probs /= rows
    grad_unit = (probs + probs.T) @ unit / tau
    radial = np.sum(grad_unit * unit, axis=1, keepdims=True)
    grad = (grad_unit - unit * radial) / norms[:, None]
    return value, grad.astype(x.dtype, copy=False)


def combine(l1, l2, l3, weights, calibration_phase):
    """
    В фазе калибровки (первая эпоха, w2 = w3 = 1) запоминает
    L1(0), L2(0), L3(0) и вычисляет
    w2 = (L1(0) / L2(0)) / (2e5 * N_h), w3 = 1.35 * L1(0) / L3(0).
    """
    if calibration_phase and not weights.calibrated:
        weights.calibrate(l1, l2, l3)
    total = l1 + weights.w2 * l2 + weights.w3 * l3
    return LossBreakdown(l1=l1, l2=l2, l3=l3, total=total,
                         w2=weights.w2, w3=weights.w3)


def evaluate_objective(trace, a_in, t_in, weights, calibration_phase=False,
                       contrast_on='projection'):
    """
    Все три слагаемых на одной пачке и градиенты по выходам сети,
    уже умноженные на веса w2, w3. contrast_on='output' сравнивает
    склеенные выходы (A_out, T_out) вместо проекции f_d.
    """
    l1, grad_a, grad_t = reconstruction_loss(
        trace.a_out, trace.t_out, a_in, t_in, weights)
    l2, grad_mu, grad_sigma = kl_loss(trace.mu, trace.sigma)
    if contrast_on == 'output':
        contrasted = np.hstack([trace.a_out, trace.t_out])
    else:
        contrasted = trace.x
    l3, grad_x = contrastive_loss(contrasted, weights.tau)
    breakdown = combine(l1, l2, l3, weights, calibration_phase)
    grad_x = breakdown.w3 * grad_x
    grads = {
        'grad_mu': breakdown.w2 * grad_mu,
        'grad_sigma': breakdown.w2 * grad_sigma,
    }
    if contrast_on == 'output':
        s = trace.a_out.shape[1]
        grads['grad_a'] = grad_a + grad_x[:, :s]
        grads['grad_t'] = grad_t + grad_x[:, s:]
        grads['grad_x'] = None
    else:
        grads['grad_a'] = grad_a
        grads['grad_t'] = grad_t
        grads['grad_x'] = grad_x
    if not math.isfinite(breakdown.total):
        raise NumericalError('Нечисловое значение функции потерь')
    breakdown.grads = grads
    return breakdown
