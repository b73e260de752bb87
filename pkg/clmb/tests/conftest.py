import io

import numpy as np
import pytest
from django.core.management import call_command

from features.kernel import build_kernel
from features.matrix import FeatureMatrix, declared_samples, featurize
from ingest.synthetic import SynthConfig, synthesize_dataset
from nn.network import NetworkSpec

# Настольный масштаб: 4 генома, 2 образца, по 3 контига на геном
# в каждом образце.
DESK_CONFIG = '''\
# настольный прогон для тестов
synth.genomes = 4
synth.samples = 2
synth.contigs_per_genome = 3
synth.genome_length = 8000
synth.divergence = 0.2
synth.reads_per_sample = 800
spec.encoder_hidden = 16,16
spec.latent_dim = 4
train.epochs = 2
train.batch_size = 16
cluster.kmeans_k = 4
bench.pca_dims = 4
'''


@pytest.fixture
def tiny_synth():
    return SynthConfig(
        genomes=4, samples=2, contigs_per_genome=3, genome_length=8000,
        divergence=0.2, reads_per_sample=800, seed=7)


@pytest.fixture
def dataset(tiny_synth):
    return synthesize_dataset(tiny_synth)


@pytest.fixture
def features(dataset):
    samples = declared_samples(dataset.contigs, dataset.mappings)
    return featurize(
        dataset.contigs, dataset.mappings, build_kernel(4), samples)


@pytest.fixture
def random_features():
    """
    10 контигов, 3 образца, 5 столбцов TNF.
    """
    rng = np.random.default_rng(11)
    abundance = rng.dirichlet(np.ones(3), size=10)
    tnf = rng.standard_normal((10, 5))
    contig_ids = [f'c{i}' for i in range(10)]
    samples = ['s0', 's1', 's2']
    return FeatureMatrix(
        abundance=abundance, tnf=tnf, contig_ids=contig_ids,
        sample_of_contig=[samples[i % 3] for i in range(10)],
        sample_ids=samples)


@pytest.fixture
def small_spec():
    return NetworkSpec(
        n_samples=3, tnf_dim=5, encoder_hidden=(8,), latent_dim=2)


@pytest.fixture
def desk_config(tmp_path):
    path = tmp_path / 'desk.config.txt'
    path.write_text(DESK_CONFIG, encoding='utf-8')
    return str(path)


@pytest.fixture
def run_command():
    def run(name, *args):
        stdout = io.StringIO()
        call_command(name, *[str(arg) for arg in args], stdout=stdout)
        return stdout.getvalue()
    return run


@pytest.fixture
def synth_dir(tmp_path, desk_config, run_command, db):
    directory = tmp_path / 'data'
    run_command('synth', directory, '--config', desk_config)
    return directory
