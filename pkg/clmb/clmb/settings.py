"""
Django settings for clmb project.

Проект не поднимает веб-сервер: Django используется ради management-команд,
настроек, логирования и реестра запусков (runs.PipelineRun).
"""

import os

from dotenv import load_dotenv

load_dotenv()

# Build paths inside the project like this: os.path.join(BASE_DIR, ...)
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

SECRET_KEY = os.getenv('SECRET_KEY', 'clmb-batch-pipeline-has-no-sessions')

DEBUG = False

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    'django.contrib.contenttypes',
    'rest_framework',
    'runs.apps.RunsConfig',
]


# Database

DATABASES = {
    'default': {
        'ENGINE': os.getenv('DB_ENGINE', 'django.db.backends.sqlite3'),
        'NAME': os.getenv('DB_NAME', os.path.join(BASE_DIR, 'db.sqlite3')),
        'USER': os.getenv('POSTGRES_USER', ''),
        'PASSWORD': os.getenv('POSTGRES_PASSWORD', ''),
        'HOST': os.getenv('DB_HOST', ''),
        'PORT': os.getenv('DB_PORT', ''),
    }
}

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

LANGUAGE_CODE = 'ru'

TIME_ZONE = 'Europe/Moscow'

USE_I18N = True

USE_TZ = True


LOG_LEVEL = os.getenv('CLMB_LOG_LEVEL', 'INFO')

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(asctime)s %(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}


# Параметры конвейера по умолчанию. Секции совпадают с ключами
# конфигурационного файла: `train.batch_size = 256`.
CLMB = {
    'run': {
        'seed': int(os.getenv('CLMB_SEED', 0)),
        'threads': int(os.getenv('CLMB_THREADS', 1)),
    },
    'ingest': {
        'min_length': 2000,
        'separator': '|',
    },
    'features': {
        'k': 4,
        'samples': 0,
    },
    'aug': {
        'gaussian_scale': 0.15,
        'mask_p': 0.01,
        'shift_fraction': 0.01,
        'gaussian_literal_mu': False,
    },
    'spec': {
        'encoder_hidden': [512, 512],
        'latent_dim': 32,
        'dropout_p': 0.2,
        'leaky_slope': 0.01,
        'bn_momentum': 0.1,
    },
    'loss': {
        'tau': 0.1,
        'contrast_on': 'projection',
    },
    'train': {
        'batch_size': 4096,
        'epochs': 600,
        'learning_rate': 1e-3,
        'beta1': 0.9,
        'beta2': 0.999,
        'eps': 1e-8,
    },
    'cluster': {
        'algorithm': 'medoid',
        'max_steps': 25,
        'neighbor_radius': 0.05,
        'default_radius': 0.15,
        'min_cluster_size': 1,
        'kmeans_k': 750,
        'kmeans_batch': 4096,
        'kmeans_max_iter': 25,
        'kmeans_init_size': 20000,
        'kmeans_reassignment_ratio': 0.02,
        'eps': 0.35,
        'min_samples': 2,
    },
    'synth': {
        'genomes': 20,
        'samples': 5,
        'contigs_per_genome': 100,
        'genome_length': 250000,
        'min_contig_length': 2000,
        'divergence': 0.3,
        'concentration': 0.5,
        'abundance_sigma': 1.0,
        'reads_per_sample': 100000,
        'multimap_fraction': 0.05,
        'strains_per_species': 2,
        'species_per_genus': 2,
    },
    'bench': {
        'precision_floor': 0.95,
        'pca_dims': 32,
    },
}

CONFIG_FILE_NAME = '{command}.config.txt'
MANIFEST_FILE_NAME = '{command}.manifest.json'
