import itertools

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

ALPHABET = 'ACGT'
COMPLEMENT = str.maketrans('ACGTNacgtn', 'TGCANtgcan')

_CODES = np.full(256, 4, dtype=np.int8)
for _code, _base in enumerate(ALPHABET):
    _CODES[ord(_base)] = _code
    _CODES[ord(_base.lower())] = _code


def all_kmers(k):
    return [''.join(kmer) for kmer in itertools.product(ALPHABET, repeat=k)]


def reverse_complement(sequence):
    return sequence.translate(COMPLEMENT)[::-1]


def encode(sequence):
    """
    A, C, G, T -> 0..3, любой другой символ (N) -> 4.
    """
    raw = np.frombuffer(sequence.encode('ascii'), dtype=np.uint8)
    return _CODES[raw]


def kmer_indices(sequence, k):
    """
    Индексы (в лексикографическом порядке ACGT) всех окон длины k,
    состоящих только из определенных оснований. Окна с N пропускаются.
    """
    codes = encode(sequence)
    if codes.size < k:
        return np.empty(0, dtype=np.int64)
    windows = sliding_window_view(codes, k)
    windows = windows[(windows < 4).all(axis=1)].astype(np.int64)
    return windows @ (4 ** np.arange(k - 1, -1, -1, dtype=np.int64))


def count_kmers(sequence, k):
    return np.bincount(
        kmer_indices(sequence, k), minlength=4 ** k).astype(np.float64)
