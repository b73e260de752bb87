from dataclasses import dataclass

import numpy as np

from clmb.exceptions import NumericalError


@dataclass
class AdamState:
    m: dict
    v: dict
    step: int = 0

    @classmethod
    def zeros_like(cls, weights):
        return cls(m={name: np.zeros_like(value)
                      for name, value in weights.items()},
                   v={name: np.zeros_like(value)
                      for name, value in weights.items()})

    def as_blocks(self):
        blocks = {f'adam.m.{name}': value for name, value in self.m.items()}
        blocks.update(
            {f'adam.v.{name}': value for name, value in self.v.items()})
        return blocks

    @classmethod
    def from_blocks(cls, blocks, step):
        m = {name[len('adam.m.'):]: value for name, value in blocks.items()
             if name.startswith('adam.m.')}
        v = {name[len('adam.v.'):]: value for name, value in blocks.items()
             if name.startswith('adam.v.')}
        return cls(m=m, v=v, step=int(step))


def adam_step(weights, grads, state, lr=1e-3, beta1=0.9, beta2=0.999,
              eps=1e-8):
    """
    Один шаг Adam с поправкой смещения моментов:
    m = b1 m + (1 - b1) g, v = b2 v + (1 - b2) g^2,
    w = w - lr * m_hat / (sqrt(v_hat) + eps).
    Возвращает новые словари весов и новое состояние; вход не меняется.
    """
    step = state.step + 1
    correction1 = 1.0 - beta1 ** step
    correction2 = 1.0 - beta2 ** step
    updated, m, v = {}, {}, {}
    for name, value in weights.items():
        gradient = grads[name]
        if not np.isfinite(gradient).all():
            raise NumericalError(f'Нечисловой градиент параметра {name}')
        m[name] = (beta1 * state.m[name]
                   + (1 - beta1) * gradient).astype(value.dtype)
        v[name] = (beta2 * state.v[name]
                   + (1 - beta2) * gradient * gradient).astype(value.dtype)
        m_hat = m[name] / correction1
        v_hat = v[name] / correction2
        updated[name] = (value - lr * m_hat / (np.sqrt(v_hat) + eps)
                         ).astype(value.dtype)
    return updated, AdamState(m=m, v=v, step=step)
