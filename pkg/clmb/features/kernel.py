import functools
from dataclasses import dataclass

import numpy as np
from django.core.exceptions import ValidationError
from scipy.linalg import null_space

from clmb.exceptions import NumericalError

from .kmers import all_kmers, reverse_complement

MIN_K = 2
MAX_K = 5
TNF_DIM = 103


@dataclass(frozen=True, eq=False)
class KmerKernel:
    k: int
    matrix: np.ndarray

    @property
    def raw_dim(self):
        return 4 ** self.k

    @property
    def projected_dim(self):
        return self.matrix.shape[1]


def constraint_matrix(k):
    """
    Строки ограничений на вектор частот k-меров f:
    f(w) = f(rc(w)); для каждого (k-1)-мера u
    сумма f(ub) по b равна сумме f(bu); сумма всех f равна единице.
    """
    kmers = all_kmers(k)
    index = {kmer: i for i, kmer in enumerate(kmers)}
    rows = []
    for i, kmer in enumerate(kmers):
        j = index[reverse_complement(kmer)]
        if i < j:
            row = np.zeros(len(kmers))
            row[i], row[j] = 1.0, -1.0
            rows.append(row)
    for prefix in all_kmers(k - 1):
        row = np.zeros(len(kmers))
        for base in 'ACGT':
            row[index[prefix + base]] += 1.0
            row[index[base + prefix]] -= 1.0
        rows.append(row)
    rows.append(np.ones(len(kmers)))
    return np.vstack(rows)


@functools.lru_cache(maxsize=None)
def build_kernel(k=4):
    """
    Ортонормированный базис ядра системы ограничений (через SVD).
    Проекция частот на этот базис не различает последовательность
    и ее обратное дополнение. Для k=4 размерность строго 103.
    """
    if not MIN_K <= k <= MAX_K:
        raise ValidationError(
            'Длина k-мера %(k)s вне диапазона [2, 5]',
            code='invalid_k', params={'k': k})
    matrix = null_space(constraint_matrix(k))
    if k == 4 and matrix.shape[1] != TNF_DIM:
        raise NumericalError(
            f'Ядро TNF имеет размерность {matrix.shape[1]}, '
            f'ожидалось {TNF_DIM}')
    matrix.setflags(write=False)
    return KmerKernel(k=k, matrix=matrix)
