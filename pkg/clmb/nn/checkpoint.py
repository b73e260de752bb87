import json
from dataclasses import asdict

import numpy as np
from django.core.exceptions import ValidationError

from .network import NetworkSpec, VaeParams

MAGIC = b'CLMBVAE v1\n'
BLOCK_DTYPE = '<f4'


def save_checkpoint(stream, params, meta=None, extra=None):
    """
    Формат: строка `CLMBVAE v1`, строка JSON с полями NetworkSpec,
    метаданными и списком дополнительных блоков, затем блоки float32
    little-endian: веса в порядке объявления, скользящие статистики
    batch-norm, дополнительные блоки (состояние Adam).
    """
    extra = extra or {}
    header = {
        'spec': asdict(params.spec),
        'meta': meta or {},
        'extra': [[name, list(value.shape)] for name, value in extra.items()],
    }
    stream.write(MAGIC)
    stream.write(json.dumps(header, sort_keys=True).encode('utf-8') + b'\n')
    for name, _ in params.spec.weight_shapes():
        stream.write(params.weights[name].astype(BLOCK_DTYPE).tobytes())
    for name, _ in params.spec.buffer_shapes():
        stream.write(params.buffers[name].astype(BLOCK_DTYPE).tobytes())
    for value in extra.values():
        stream.write(np.asarray(value).astype(BLOCK_DTYPE).tobytes())


def _read_blocks(buffer, offset, shapes, dtype):
    blocks = {}
    for name, shape in shapes:
        count = int(np.prod(shape, dtype=np.int64))
        if len(buffer) < offset + 4 * count:
            raise ValidationError(
                'Контрольная точка обрезана на блоке %(name)s',
                code='bad_checkpoint', params={'name': name})
        block = np.frombuffer(buffer, dtype=BLOCK_DTYPE, count=count,
                              offset=offset)
        blocks[name] = block.reshape(shape).astype(dtype)
        offset += 4 * count
    return blocks, offset


def load_checkpoint(stream, expected_spec=None):
    """
    Возвращает (VaeParams, meta, extra). Если передан expected_spec,
    отвергает контрольную точку с другими формами слоев.
    """
    buffer = stream.read()
    if not buffer.startswith(MAGIC):
        raise ValidationError(
            'Файл не является контрольной точкой CLMBVAE v1',
            code='bad_checkpoint')
    offset = len(MAGIC)
    newline = buffer.index(b'\n', offset)
    header = json.loads(buffer[offset:newline].decode('utf-8'))
    offset = newline + 1
    spec = NetworkSpec(**header['spec'])
    if expected_spec is not None and (
            spec.weight_shapes() != expected_spec.weight_shapes()):
        raise ValidationError(
            'Формы слоев контрольной точки (вход %(got)d) не совпадают '
            'с признаками (вход %(expected)d)', code='shape_mismatch',
            params={'got': spec.input_dim,
                    'expected': expected_spec.input_dim})
    weights, offset = _read_blocks(
        buffer, offset, spec.weight_shapes(), spec.dtype)
    buffers, offset = _read_blocks(
        buffer, offset, spec.buffer_shapes(), spec.dtype)
    extra, offset = _read_blocks(
        buffer, offset, [(name, tuple(shape))
                         for name, shape in header['extra']], spec.dtype)
    if offset != len(buffer):
        raise ValidationError(
            'Лишние байты в конце контрольной точки', code='bad_checkpoint')
    params = VaeParams(spec=spec, weights=weights, buffers=buffers)
    return params, header['meta'], extra
