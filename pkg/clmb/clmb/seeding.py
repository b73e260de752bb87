import zlib

import numpy as np


def substream(seed, name, *keys):
    """
    Метод выдает независимый генератор для именованного потока
    (init, shuffle, augment, forward, synth, cluster).
    Дополнительные ключи (например, номер эпохи) делают поток
    воспроизводимым при продолжении обучения с контрольной точки.
    """
    spawn_key = (zlib.crc32(name.encode('ascii')),) + tuple(
        int(key) for key in keys)
    return np.random.default_rng(
        np.random.SeedSequence(int(seed), spawn_key=spawn_key))
