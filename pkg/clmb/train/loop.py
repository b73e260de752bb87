"""
Цикл обучения: перемешивание контигов по пачкам, пара искажений,
прямой и обратный проход, калибровка весов потерь и шаг Adam.
"""
import logging
import time
from dataclasses import asdict, dataclass, field

import numpy as np
from django.core.exceptions import ValidationError

from augment.noise import AugmentConfig, augment_batch, sample_form_pair
from clmb.exceptions import NumericalError
from clmb.seeding import substream
from loss.objective import LossWeights, evaluate_objective
from nn.checkpoint import load_checkpoint, save_checkpoint
from nn.network import TRAIN, VaeParams, backward, forward, init_params

from .adam import AdamState, adam_step

logger = logging.getLogger(__name__)

LOSS_LOG_COLUMNS = ('epoch', 'L1', 'L2', 'L3', 'total', 'w2', 'w3')


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 4096
    epochs: int = 600
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if self.batch_size < 2:
            raise ValidationError(
                'batch_size должен быть не меньше 2',
                code='invalid_batch_size')
        if self.epochs < 1:
            raise ValidationError(
                'epochs должно быть не меньше 1', code='invalid_epochs')


@dataclass
class EpochLog:
    epoch: int
    l1: float
    l2: float
    l3: float
    total: float
    w2: float
    w3: float
    batches: int
    seconds: float = 0.0

    def as_row(self):
        return (self.epoch, self.l1, self.l2, self.l3, self.total,
                self.w2, self.w3)


@dataclass
class TrainResult:
    params: object
    state: AdamState
    weights: LossWeights
    history: list = field(default_factory=list)
    epochs_done: int = 0


def minibatches(n_rows, batch_size, rng):
    """
    Перестановка строк, разрезанная на пачки; последняя неполная пачка
    тоже возвращается, каждая строка входит ровно в одну пачку.
    """
    order = rng.permutation(n_rows)
    return [order[start:start + batch_size]
            for start in range(0, n_rows, batch_size)]


def _train_batch(params, state, rows, n_samples, weights, calibration_phase,
                 config, aug_config, contrast_on, aug_rng, forward_rng):
    pair = sample_form_pair(aug_rng, aug_config)
    augmented = augment_batch(rows, pair, aug_rng)
    trace = forward(params, augmented, TRAIN, forward_rng)
    breakdown = evaluate_objective(
        trace, rows[:, :n_samples], rows[:, n_samples:], weights,
        calibration_phase=calibration_phase, contrast_on=contrast_on)
    grads = backward(params, trace, **breakdown.grads)
    updated, state = adam_step(
        params.weights, grads, state, lr=config.learning_rate,
        beta1=config.beta1, beta2=config.beta2, eps=config.eps)
    params = VaeParams(
        spec=params.spec, weights=updated, buffers=params.buffers)
    return params.with_running_stats(trace.running), state, breakdown


def _training_values(features, spec):
    values = np.asarray(features.values, dtype=np.dtype(spec.dtype))
    if values.shape[0] < 2:
        raise ValidationError(
            'Для обучения нужно не меньше двух контигов, получено %(n)d',
            code='too_few_contigs', params={'n': values.shape[0]})
    if values.shape[1] != spec.input_dim:
        raise ValidationError(
            'Ширина признаков %(width)d не равна входу сети %(dim)d',
            code='shape_mismatch',
            params={'width': values.shape[1], 'dim': spec.input_dim})
    return values


def _initial_state(spec, config, params, state, loss_weights):
    if params is None:
        params = init_params(spec, substream(config.seed, 'init'))
    if state is None:
        state = AdamState.zeros_like(params.weights)
    if loss_weights is None:
        loss_weights = LossWeights(
            n_samples=spec.n_samples, tnf_dim=spec.tnf_dim,
            latent_dim=spec.latent_dim)
    return params, state, loss_weights


def train(features, spec, config=TrainConfig(), aug_config=AugmentConfig(),
          loss_weights=None, contrast_on='projection', params=None,
          state=None, start_epoch=0, on_epoch=None):
    """
    Обучает VAE на матрице признаков. При переданных params/state/
    loss_weights продолжает обучение с эпохи start_epoch; генераторы
    каждой эпохи выводятся из (seed, эпоха), поэтому продолжение
    совпадает с непрерывным обучением.
    """
    values = _training_values(features, spec)
    n_rows = values.shape[0]
    params, state, loss_weights = _initial_state(
        spec, config, params, state, loss_weights)
    n_samples = spec.n_samples
    history = []
    for epoch in range(start_epoch, config.epochs):
        started = time.monotonic()
        batches = minibatches(
            n_rows, config.batch_size,
            substream(config.seed, 'shuffle', epoch))
        aug_rng = substream(config.seed, 'augment', epoch)
        forward_rng = substream(config.seed, 'forward', epoch)
        sums = np.zeros(4)
        processed = 0
        for number, index in enumerate(batches):
            if index.size < 2:
                logger.info(
                    'Эпоха %d, пачка %d: один контиг, пачка пропущена',
                    epoch, number)
                continue
            try:
                params, state, breakdown = _train_batch(
                    params, state, values[index], n_samples, loss_weights,
                    epoch == 0, config, aug_config, contrast_on, aug_rng,
                    forward_rng)
            except NumericalError as error:
                raise NumericalError(
                    f'Эпоха {epoch}, пачка {number}: {error}') from error
            sums += (breakdown.l1, breakdown.l2, breakdown.l3,
                     breakdown.total)
            processed += 1
        means = sums / max(processed, 1)
        record = EpochLog(
            epoch=epoch, l1=means[0], l2=means[1], l3=means[2],
            total=means[3], w2=loss_weights.w2, w3=loss_weights.w3,
            batches=processed, seconds=time.monotonic() - started)
        history.append(record)
        logger.info(
            'Эпоха %d: L1=%.6g L2=%.6g L3=%.6g loss=%.6g (%d пачек, %.1f с)',
            epoch, record.l1, record.l2, record.l3, record.total,
            processed, record.seconds)
        if on_epoch is not None:
            on_epoch(record)
    return TrainResult(params=params, state=state, weights=loss_weights,
                       history=history, epochs_done=config.epochs)


def write_loss_log(history, stream, header=True):
    if header:
        stream.write('\t'.join(LOSS_LOG_COLUMNS) + '\n')
    for record in history:
        epoch, *numbers = record.as_row()
        stream.write('\t'.join(
            [str(epoch)] + [repr(float(value)) for value in numbers]) + '\n')


def save_training(stream, result, config):
    """
    Контрольная точка с метаданными обучения: число пройденных эпох,
    состояние весов потерь, счетчик шагов и моменты Adam.
    """
    meta = {
        'epoch': result.epochs_done,
        'loss_weights': result.weights.state(),
        'adam_step': result.state.step,
        'train': asdict(config),
    }
    save_checkpoint(stream, result.params, meta=meta,
                    extra=result.state.as_blocks())


def load_training(stream, expected_spec=None):
    """
    Возвращает (params, state, loss_weights, start_epoch) для продолжения
    обучения с контрольной точки.
    """
    params, meta, extra = load_checkpoint(stream, expected_spec)
    spec = params.spec
    if 'loss_weights' not in meta:
        raise ValidationError(
            'В контрольной точке нет состояния обучения',
            code='bad_checkpoint')
    state = AdamState.from_blocks(extra, meta.get('adam_step', 0))
    if not set(params.weights) == set(state.m) == set(state.v):
        raise ValidationError(
            'Состояние оптимизатора в контрольной точке не совпадает '
            'с параметрами сети', code='bad_checkpoint')
    loss_weights = LossWeights(
        n_samples=spec.n_samples, tnf_dim=spec.tnf_dim,
        latent_dim=spec.latent_dim, **meta['loss_weights'])
    return params, state, loss_weights, int(meta.get('epoch', 0))
