"""
Вариационный автокодировщик поверх numpy: параметры, прямой проход
в режимах train/eval, репараметризация и точные градиенты обратного
прохода для этой фиксированной архитектуры.

Соглашение по весам: y = x @ W + b, W имеет форму (fan_in, fan_out).
"""
from dataclasses import dataclass, field

import numpy as np
from django.core.exceptions import ValidationError
from scipy.special import expit, softmax

from clmb.exceptions import NumericalError


TRAIN = 'train'
EVAL = 'eval'


@dataclass(frozen=True)
class NetworkSpec:
    n_samples: int
    tnf_dim: int = 103
    encoder_hidden: tuple = (512, 512)
    latent_dim: int = 32
    dropout_p: float = 0.2
    leaky_slope: float = 0.01
    bn_momentum: float = 0.1
    bn_eps: float = 1e-5
    dtype: str = 'float32'

    def __post_init__(self):
        object.__setattr__(
            self, 'encoder_hidden', tuple(int(w) for w in self.encoder_hidden))
        if self.latent_dim < 1 or not self.encoder_hidden:
            raise ValidationError(
                'Нужны скрытые слои и latent_dim >= 1', code='invalid_spec')
        if self.input_dim < 1:
            raise ValidationError(
                'Пустой вектор признаков', code='invalid_spec')

    @property
    def input_dim(self):
        return self.n_samples + self.tnf_dim

    @property
    def decoder_hidden(self):
        return tuple(reversed(self.encoder_hidden))

    @property
    def output_split(self):
        return self.n_samples, self.tnf_dim

    def encoder_layers(self):
        return [f'enc{i}' for i in range(len(self.encoder_hidden))]

    def decoder_layers(self):
        return [f'dec{i}' for i in range(len(self.decoder_hidden))]

    def weight_shapes(self):
        """
        Формы параметров в порядке объявления (он же порядок блоков
        в контрольной точке).
        """
        shapes = []

        def hidden(names, widths, fan_in):
            for name, width in zip(names, widths):
                shapes.extend([
                    (f'{name}.weight', (fan_in, width)),
                    (f'{name}.bias', (width,)),
                    (f'{name}.gamma', (width,)),
                    (f'{name}.beta', (width,)),
                ])
                fan_in = width
            return fan_in

        last = hidden(self.encoder_layers(), self.encoder_hidden,
                      self.input_dim)
        for head in ('mu', 'sigma'):
            shapes.extend([
                (f'{head}.weight', (last, self.latent_dim)),
                (f'{head}.bias', (self.latent_dim,)),
            ])
        last = hidden(self.decoder_layers(), self.decoder_hidden,
                      self.latent_dim)
        shapes.extend([
            ('split.weight', (last, self.input_dim)),
            ('split.bias', (self.input_dim,)),
        ])
        return shapes

    def buffer_shapes(self):
        shapes = []
        layers = zip(self.encoder_layers() + self.decoder_layers(),
                     self.encoder_hidden + self.decoder_hidden)
        for name, width in layers:
            shapes.append((f'{name}.running_mean', (width,)))
            shapes.append((f'{name}.running_var', (width,)))
        return shapes


@dataclass
class VaeParams:
    spec: NetworkSpec
    weights: dict
    buffers: dict

    def copy(self):
        return VaeParams(
            spec=self.spec,
            weights={k: v.copy() for k, v in self.weights.items()},
            buffers={k: v.copy() for k, v in self.buffers.items()})

    def with_running_stats(self, running):
        buffers = dict(self.buffers)
        buffers.update(running)
        return VaeParams(spec=self.spec, weights=self.weights, buffers=buffers)


@dataclass
class LayerCache:
    name: str
    inputs: np.ndarray
    xhat: np.ndarray
    inv_std: np.ndarray
    pre_activation: np.ndarray
    mask: np.ndarray = None


@dataclass
class ForwardTrace:
    mode: str
    inputs: np.ndarray
    encoder: list
    hidden: np.ndarray
    mu: np.ndarray
    sigma_pre: np.ndarray
    sigma: np.ndarray
    z: np.ndarray
    latent: np.ndarray
    decoder: list
    x: np.ndarray
    logits: np.ndarray
    a_out: np.ndarray
    t_out: np.ndarray
    running: dict = field(default_factory=dict)

    def dropout_masks(self):
        return {cache.name: cache.mask
                for cache in self.encoder + self.decoder
                if cache.mask is not None}


def init_params(spec, rng):
    """
    Веса ~ U(-sqrt(6 / (fan_in + fan_out)), +...), смещения 0,
    gamma = 1, beta = 0, скользящее среднее 0, дисперсия 1.
    """
    dtype = np.dtype(spec.dtype)
    weights = {}
    for name, shape in spec.weight_shapes():
        if name.endswith('.weight'):
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            value = rng.uniform(-limit, limit, size=shape)
        elif name.endswith('.gamma'):
            value = np.ones(shape)
        else:
            value = np.zeros(shape)
        weights[name] = value.astype(dtype)
    buffers = {}
    for name, shape in spec.buffer_shapes():
        fill = 1.0 if name.endswith('running_var') else 0.0
        buffers[name] = np.full(shape, fill, dtype=dtype)
    return VaeParams(spec=spec, weights=weights, buffers=buffers)


def _check_finite(values, name):
    if not np.isfinite(values).all():
        raise NumericalError(f'Нечисловое значение на выходе слоя {name}')


def _softplus(values):
    out = np.logaddexp(0, values)
    return np.maximum(out, np.finfo(out.dtype).tiny)


def _layer_forward(params, name, inputs, mode, rng, mask):
    spec = params.spec
    weights = params.weights
    affine = inputs @ weights[f'{name}.weight'] + weights[f'{name}.bias']
    running = {}
    if mode == TRAIN:
        mean = affine.mean(axis=0)
        var = affine.var(axis=0)
        rows = affine.shape[0]
        momentum = spec.bn_momentum
        running[f'{name}.running_mean'] = (
            (1 - momentum) * params.buffers[f'{name}.running_mean']
            + momentum * mean).astype(affine.dtype)
        running[f'{name}.running_var'] = (
            (1 - momentum) * params.buffers[f'{name}.running_var']
            + momentum * var * rows / (rows - 1)).astype(affine.dtype)
    else:
        mean = params.buffers[f'{name}.running_mean']
        var = params.buffers[f'{name}.running_var']
    inv_std = 1.0 / np.sqrt(var + spec.bn_eps)
    xhat = (affine - mean) * inv_std
    pre = weights[f'{name}.gamma'] * xhat + weights[f'{name}.beta']
    out = np.where(pre > 0, pre, spec.leaky_slope * pre)
    if mode == TRAIN and spec.dropout_p > 0:
        if mask is None:
            keep = rng.random(out.shape) >= spec.dropout_p
            mask = (keep / (1.0 - spec.dropout_p)).astype(out.dtype)
        out = out * mask
    else:
        mask = None
    _check_finite(out, name)
    cache = LayerCache(name=name, inputs=inputs, xhat=xhat, inv_std=inv_std,
                       pre_activation=pre, mask=mask)
    return out, cache, running


def forward(params, batch, mode=TRAIN, rng=None, z=None, dropout_masks=None):
    """
    Прямой проход: кодировщик (affine -> batch-norm -> leaky ReLU ->
    dropout), головы mu (линейная) и sigma (softplus, дисперсия),
    латентный вектор l = mu + sqrt(sigma) * z, зеркальный декодер и
    голова f_s, разделенная на численность (softmax по образцам) и TNF.
    z и маски dropout можно зафиксировать (проверка градиентов).
    """
    spec = params.spec
    dtype = np.dtype(spec.dtype)
    batch = np.asarray(batch, dtype=dtype)
    if batch.ndim != 2 or batch.shape[1] != spec.input_dim:
        raise ValidationError(
            'Ширина пачки %(width)s не равна %(dim)d',
            code='shape_mismatch',
            params={'width': batch.shape[-1], 'dim': spec.input_dim})
    if mode == TRAIN and batch.shape[0] < 2:
        raise ValidationError(
            'В режиме обучения нужно не меньше двух строк',
            code='batch_too_small')
    dropout_masks = dropout_masks or {}
    running = {}

    hidden = batch
    encoder = []
    for name in spec.encoder_layers():
        hidden, cache, stats = _layer_forward(
            params, name, hidden, mode, rng, dropout_masks.get(name))
        encoder.append(cache)
        running.update(stats)

    weights = params.weights
    mu = hidden @ weights['mu.weight'] + weights['mu.bias']
    sigma_pre = hidden @ weights['sigma.weight'] + weights['sigma.bias']
    sigma = _softplus(sigma_pre)
    _check_finite(mu, 'mu')
    _check_finite(sigma, 'sigma')
    if z is None:
        z = (rng.standard_normal(mu.shape) if rng is not None
             else np.zeros(mu.shape))
    z = np.asarray(z, dtype=dtype)
    latent = mu + np.sqrt(sigma) * z

    x = latent
    decoder = []
    for name in spec.decoder_layers():
        x, cache, stats = _layer_forward(
            params, name, x, mode, rng, dropout_masks.get(name))
        decoder.append(cache)
        running.update(stats)

    logits = x @ weights['split.weight'] + weights['split.bias']
    _check_finite(logits, 'split')
    s = spec.n_samples
    if s > 1:
        a_out = softmax(logits[:, :s], axis=1)
    else:
        a_out = logits[:, :s]
    return ForwardTrace(
        mode=mode, inputs=batch, encoder=encoder, hidden=hidden, mu=mu,
        sigma_pre=sigma_pre, sigma=sigma, z=z, latent=latent,
        decoder=decoder, x=x, logits=logits, a_out=a_out,
        t_out=logits[:, s:], running=running)


def _layer_backward(params, cache, upstream, grads, mode):
    spec = params.spec
    name = cache.name
    if cache.mask is not None:
        upstream = upstream * cache.mask
    pre = cache.pre_activation
    grad_pre = np.where(pre > 0, upstream, spec.leaky_slope * upstream)
    grads[f'{name}.gamma'] = (grad_pre * cache.xhat).sum(axis=0)
    grads[f'{name}.beta'] = grad_pre.sum(axis=0)
    grad_xhat = grad_pre * params.weights[f'{name}.gamma']
    if mode == TRAIN:
        rows = grad_xhat.shape[0]
        grad_affine = cache.inv_std / rows * (
            rows * grad_xhat
            - grad_xhat.sum(axis=0)
            - cache.xhat * (grad_xhat * cache.xhat).sum(axis=0))
    else:
        grad_affine = grad_xhat * cache.inv_std
    grads[f'{name}.weight'] = cache.inputs.T @ grad_affine
    grads[f'{name}.bias'] = grad_affine.sum(axis=0)
    return grad_affine @ params.weights[f'{name}.weight'].T


def _check_shape(name, gradient, reference):
    if gradient.shape != reference.shape:
        raise ValidationError(
            'Градиент %(name)s имеет форму %(got)s вместо %(expected)s',
            code='shape_mismatch',
            params={'name': name, 'got': gradient.shape,
                    'expected': reference.shape})


def backward(params, trace, grad_a, grad_t, grad_mu, grad_sigma,
             grad_x=None):
    """
    Точные градиенты по всем параметрам при заданных градиентах
    по A_out, T_out, mu, sigma и проекции x = f_d(l).
    Учитываются путь через выборку (dl/dmu = 1,
    dl/dsigma = z / (2 sqrt(sigma))) и статистики batch-norm (train).
    """
    for name, gradient, reference in (
            ('A_out', grad_a, trace.a_out), ('T_out', grad_t, trace.t_out),
            ('mu', grad_mu, trace.mu), ('sigma', grad_sigma, trace.sigma)):
        _check_shape(name, gradient, reference)
    if grad_x is not None:
        _check_shape('x', grad_x, trace.x)
    weights = params.weights
    grads = {}

    if params.spec.n_samples > 1:
        a_out = trace.a_out
        grad_a = a_out * (grad_a - (grad_a * a_out).sum(axis=1, keepdims=True))
    grad_logits = np.hstack([grad_a, grad_t])
    grads['split.weight'] = trace.x.T @ grad_logits
    grads['split.bias'] = grad_logits.sum(axis=0)
    upstream = grad_logits @ weights['split.weight'].T
    if grad_x is not None:
        upstream = upstream + grad_x
    for cache in reversed(trace.decoder):
        upstream = _layer_backward(params, cache, upstream, grads, trace.mode)

    grad_mu = grad_mu + upstream
    grad_sigma = grad_sigma + upstream * trace.z / (2 * np.sqrt(trace.sigma))
    grad_sigma_pre = grad_sigma * expit(trace.sigma_pre)
    grads['mu.weight'] = trace.hidden.T @ grad_mu
    grads['mu.bias'] = grad_mu.sum(axis=0)
    grads['sigma.weight'] = trace.hidden.T @ grad_sigma_pre
    grads['sigma.bias'] = grad_sigma_pre.sum(axis=0)
    upstream = (grad_mu @ weights['mu.weight'].T
                + grad_sigma_pre @ weights['sigma.weight'].T)
    for cache in reversed(trace.encoder):
        upstream = _layer_backward(params, cache, upstream, grads, trace.mode)
    return {name: grads[name].astype(weights[name].dtype, copy=False)
            for name in weights}


def encode(params, batch, chunk_size=None):
    """
    Представление контига: f_mu(f_e(x)) в режиме eval (без dropout,
    batch-norm по скользящим статистикам). Генератор не нужен.
    """
    spec = params.spec
    batch = np.asarray(batch, dtype=np.dtype(spec.dtype))
    if batch.ndim != 2 or batch.shape[1] != spec.input_dim:
        raise ValidationError(
            'Ширина пачки %(width)s не равна %(dim)d',
            code='shape_mismatch',
            params={'width': batch.shape[-1], 'dim': spec.input_dim})
    chunk_size = chunk_size or max(batch.shape[0], 1)
    parts = []
    for start in range(0, batch.shape[0], chunk_size):
        hidden = batch[start:start + chunk_size]
        for name in spec.encoder_layers():
            hidden, _, _ = _layer_forward(
                params, name, hidden, EVAL, None, None)
        parts.append(
            hidden @ params.weights['mu.weight'] + params.weights['mu.bias'])
    if not parts:
        return np.empty((0, spec.latent_dim), dtype=batch.dtype)
    return np.vstack(parts)
