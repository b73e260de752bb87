import io

import numpy as np
import pytest
from django.core.exceptions import ValidationError

from nn.checkpoint import load_checkpoint, save_checkpoint
from nn.network import (EVAL, TRAIN, NetworkSpec, backward, encode, forward,
                        init_params)

UPSTREAM = ('grad_a', 'grad_t', 'grad_mu', 'grad_sigma', 'grad_x')


def tiny_spec(dropout_p=0.2):
    return NetworkSpec(n_samples=3, tnf_dim=3, encoder_hidden=(5,),
                       latent_dim=3, dropout_p=dropout_p, dtype='float64')


def distribution_batch(rng, rows, spec):
    abundance = rng.dirichlet(np.ones(spec.n_samples), size=rows)
    tnf = rng.standard_normal((rows, spec.tnf_dim))
    return np.hstack([abundance, tnf])


def random_upstream(trace, rng):
    return {
        'grad_a': rng.standard_normal(trace.a_out.shape),
        'grad_t': rng.standard_normal(trace.t_out.shape),
        'grad_mu': rng.standard_normal(trace.mu.shape),
        'grad_sigma': rng.standard_normal(trace.sigma.shape),
        'grad_x': rng.standard_normal(trace.x.shape),
    }


def linear_loss(trace, upstream):
    outputs = {'grad_a': trace.a_out, 'grad_t': trace.t_out,
               'grad_mu': trace.mu, 'grad_sigma': trace.sigma,
               'grad_x': trace.x}
    return sum(float(np.sum(upstream[key] * outputs[key]))
               for key in UPSTREAM)


def test_init_follows_declared_rules():
    spec = NetworkSpec(n_samples=4, tnf_dim=103)
    params = init_params(spec, np.random.default_rng(0))
    for name, shape in spec.weight_shapes():
        assert params.weights[name].shape == shape
        if name.endswith('.gamma'):
            assert (params.weights[name] == 1).all()
        if name.endswith(('.bias', '.beta')):
            assert (params.weights[name] == 0).all()
    for name, _ in spec.buffer_shapes():
        fill = 1.0 if name.endswith('running_var') else 0.0
        assert (params.buffers[name] == fill).all()
    weight = params.weights['enc1.weight'].astype(np.float64)
    limit = np.sqrt(6.0 / (512 + 512))
    assert np.abs(weight).max() <= limit * (1 + 1e-6)
    standard_error = limit / np.sqrt(3) / np.sqrt(weight.size)
    assert abs(weight.mean()) < 4 * standard_error


def test_init_is_reproducible():
    spec = tiny_spec()
    first = init_params(spec, np.random.default_rng(4))
    second = init_params(spec, np.random.default_rng(4))
    for name in first.weights:
        np.testing.assert_array_equal(first.weights[name],
                                      second.weights[name])


def test_invalid_spec_is_rejected():
    with pytest.raises(ValidationError):
        NetworkSpec(n_samples=2, encoder_hidden=(), latent_dim=2)


def test_eval_pass_without_noise_uses_mean():
    spec = tiny_spec()
    rng = np.random.default_rng(1)
    params = init_params(spec, rng)
    batch = distribution_batch(rng, 6, spec)
    trace = forward(params, batch, EVAL, z=np.zeros((6, spec.latent_dim)))
    np.testing.assert_array_equal(trace.latent, trace.mu)
    assert (trace.sigma > 0).all()
    np.testing.assert_allclose(trace.a_out.sum(axis=1), 1.0, atol=1e-6)
    assert trace.dropout_masks() == {}


def test_softplus_stays_positive_for_large_negative_inputs():
    spec = tiny_spec()
    params = init_params(spec, np.random.default_rng(2))
    params.weights['sigma.bias'][:] = -800.0
    batch = distribution_batch(np.random.default_rng(3), 4, spec)
    trace = forward(params, batch, EVAL)
    assert (trace.sigma > 0).all()


def test_forward_rejects_bad_shapes():
    spec = tiny_spec()
    params = init_params(spec, np.random.default_rng(0))
    with pytest.raises(ValidationError) as excinfo:
        forward(params, np.zeros((4, 5)), TRAIN, np.random.default_rng(0))
    assert excinfo.value.code == 'shape_mismatch'
    with pytest.raises(ValidationError) as excinfo:
        forward(params, np.zeros((1, 6)), TRAIN, np.random.default_rng(0))
    assert excinfo.value.code == 'batch_too_small'


def test_train_pass_updates_running_statistics():
    spec = tiny_spec()
    rng = np.random.default_rng(5)
    params = init_params(spec, rng)
    trace = forward(params, distribution_batch(rng, 8, spec), TRAIN, rng)
    assert set(trace.running) == {name for name, _ in spec.buffer_shapes()}
    assert not np.allclose(trace.running['enc0.running_mean'], 0.0)


def test_zero_upstream_gives_zero_gradients():
    spec = tiny_spec()
    rng = np.random.default_rng(6)
    params = init_params(spec, rng)
    trace = forward(params, distribution_batch(rng, 4, spec), TRAIN, rng)
    upstream = {key: np.zeros_like(value) for key, value
                in random_upstream(trace, rng).items()}
    grads = backward(params, trace, **upstream)
    for name, gradient in grads.items():
        assert gradient.shape == params.weights[name].shape
        assert not gradient.any()


def test_backward_rejects_mismatched_upstream():
    spec = tiny_spec()
    rng = np.random.default_rng(7)
    params = init_params(spec, rng)
    trace = forward(params, distribution_batch(rng, 4, spec), TRAIN, rng)
    upstream = random_upstream(trace, rng)
    upstream['grad_mu'] = np.zeros((4, spec.latent_dim + 1))
    with pytest.raises(ValidationError) as excinfo:
        backward(params, trace, **upstream)
    assert excinfo.value.code == 'shape_mismatch'


@pytest.mark.parametrize('mode', [TRAIN, EVAL])
def test_gradients_match_central_differences(mode):
    """
    Проверка обратного прохода конечными разностями: z и маски
    dropout зафиксированы, вычисления в float64.
    """
    spec = tiny_spec()
    rng = np.random.default_rng(12)
    params = init_params(spec, rng)
    for name in params.weights:
        if not name.endswith('.weight'):
            params.weights[name] += 0.1 * rng.standard_normal(
                params.weights[name].shape)
    params.buffers['enc0.running_var'][:] = 1.5
    params.buffers['dec0.running_mean'][:] = 0.2
    batch = distribution_batch(rng, 4, spec)
    z = rng.standard_normal((4, spec.latent_dim))
    trace = forward(params, batch, mode, rng, z=z)
    masks = trace.dropout_masks()
    upstream = random_upstream(trace, rng)
    analytic = backward(params, trace, **upstream)

    def loss():
        again = forward(params, batch, mode, rng, z=z, dropout_masks=masks)
        return linear_loss(again, upstream)

    step = 1e-6
    for name, value in params.weights.items():
        numeric = np.zeros_like(value)
        for index in np.ndindex(value.shape):
            original = value[index]
            value[index] = original + step
            plus = loss()
            value[index] = original - step
            minus = loss()
            value[index] = original
            numeric[index] = (plus - minus) / (2 * step)
        np.testing.assert_allclose(
            analytic[name], numeric, rtol=1e-4, atol=1e-7, err_msg=name)


def test_duplicated_batch_keeps_mean_gradients():
    spec = tiny_spec(dropout_p=0.0)
    rng = np.random.default_rng(13)
    params = init_params(spec, rng)
    batch = distribution_batch(rng, 4, spec)
    z = rng.standard_normal((4, spec.latent_dim))
    trace = forward(params, batch, TRAIN, z=z)
    upstream = random_upstream(trace, rng)
    single = backward(params, trace, **{
        key: value / 4 for key, value in upstream.items()})
    doubled = forward(params, np.vstack([batch, batch]), TRAIN,
                      z=np.vstack([z, z]))
    double = backward(params, doubled, **{
        key: np.vstack([value, value]) / 8
        for key, value in upstream.items()})
    for name in single:
        np.testing.assert_allclose(single[name], double[name],
                                   rtol=1e-9, atol=1e-12)


def test_encode_matches_eval_mean_and_needs_no_generator():
    spec = tiny_spec()
    rng = np.random.default_rng(14)
    params = init_params(spec, rng)
    batch = distribution_batch(rng, 7, spec)
    trace = forward(params, batch, EVAL)
    np.testing.assert_allclose(encode(params, batch), trace.mu)
    np.testing.assert_allclose(encode(params, batch, chunk_size=3), trace.mu)
    np.testing.assert_array_equal(encode(params, batch),
                                  encode(params, batch))
    assert encode(params, batch[:1]).shape == (1, spec.latent_dim)


def test_checkpoint_round_trip_keeps_parameters():
    spec = NetworkSpec(n_samples=2, tnf_dim=4, encoder_hidden=(6, 5),
                       latent_dim=3)
    params = init_params(spec, np.random.default_rng(15))
    stream = io.BytesIO()
    save_checkpoint(stream, params, meta={'epoch': 3},
                    extra={'adam.m.mu.bias': np.ones(3)})
    stream.seek(0)
    loaded, meta, extra = load_checkpoint(stream, expected_spec=spec)
    assert loaded.spec == spec
    assert meta == {'epoch': 3}
    np.testing.assert_array_equal(extra['adam.m.mu.bias'], np.ones(3))
    for name in params.weights:
        np.testing.assert_array_equal(loaded.weights[name],
                                      params.weights[name])
    for name in params.buffers:
        np.testing.assert_array_equal(loaded.buffers[name],
                                      params.buffers[name])


def test_checkpoint_for_other_features_is_rejected():
    spec = NetworkSpec(n_samples=2, tnf_dim=4, encoder_hidden=(6,),
                       latent_dim=3)
    stream = io.BytesIO()
    save_checkpoint(stream, init_params(spec, np.random.default_rng(0)))
    stream.seek(0)
    other = NetworkSpec(n_samples=3, tnf_dim=4, encoder_hidden=(6,),
                        latent_dim=3)
    with pytest.raises(ValidationError) as excinfo:
        load_checkpoint(stream, expected_spec=other)
    assert excinfo.value.code == 'shape_mismatch'


@pytest.mark.parametrize('payload', [b'CLMBFEAT v1 1 1 1\n', b''])
def test_foreign_file_is_not_a_checkpoint(payload):
    with pytest.raises(ValidationError) as excinfo:
        load_checkpoint(io.BytesIO(payload))
    assert excinfo.value.code == 'bad_checkpoint'


def test_truncated_checkpoint_is_rejected():
    spec = NetworkSpec(n_samples=2, tnf_dim=4, encoder_hidden=(6,),
                       latent_dim=3)
    stream = io.BytesIO()
    save_checkpoint(stream, init_params(spec, np.random.default_rng(0)))
    with pytest.raises(ValidationError) as excinfo:
        load_checkpoint(io.BytesIO(stream.getvalue()[:-8]))
    assert excinfo.value.code == 'bad_checkpoint'
