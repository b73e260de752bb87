from augment.noise import AugmentConfig
from ingest.synthetic import SynthConfig
from loss.objective import LossWeights
from nn.network import NetworkSpec
from train.loop import TrainConfig


def augment_config(config):
    return AugmentConfig(**config['aug'])


def network_spec(config, n_samples, tnf_dim, dtype='float32'):
    return NetworkSpec(
        n_samples=n_samples, tnf_dim=tnf_dim,
        encoder_hidden=tuple(config['spec']['encoder_hidden']),
        latent_dim=config['spec']['latent_dim'],
        dropout_p=config['spec']['dropout_p'],
        leaky_slope=config['spec']['leaky_slope'],
        bn_momentum=config['spec']['bn_momentum'], dtype=dtype)


def train_config(config):
    return TrainConfig(seed=config['run']['seed'], **config['train'])


def loss_weights(config, spec):
    return LossWeights(
        n_samples=spec.n_samples, tnf_dim=spec.tnf_dim,
        latent_dim=spec.latent_dim, tau=config['loss']['tau'])


def synth_config(config):
    return SynthConfig(seed=config['run']['seed'], **config['synth'])
