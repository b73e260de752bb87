from rest_framework import serializers

from cluster.algorithms import ALGORITHMS
from features.kernel import MAX_K, MIN_K


class IntegerListField(serializers.ListField):
    """
    Список целых; из конфигурационного файла приходит строкой
    через запятую: `spec.encoder_hidden = 512,512`.
    """
    child = serializers.IntegerField(min_value=1)

    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        return super().to_internal_value(data)


class SectionSerializer(serializers.Serializer):
    """
    Базовый сериализатор секции конфигурации: неизвестные ключи
    отвергаются, все поля обязательны (значения по умолчанию
    подставляются из settings.CLMB до проверки).
    """
    def to_internal_value(self, data):
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError(
                {key: 'Неизвестный ключ' for key in unknown})
        return super().to_internal_value(data)


class RunSerializer(SectionSerializer):
    seed = serializers.IntegerField(min_value=0)
    threads = serializers.IntegerField(min_value=1)


class IngestSerializer(SectionSerializer):
    min_length = serializers.IntegerField(min_value=0)
    separator = serializers.CharField(max_length=8, trim_whitespace=False)


class FeaturesSerializer(SectionSerializer):
    k = serializers.IntegerField(min_value=MIN_K, max_value=MAX_K)
    samples = serializers.IntegerField(min_value=0)


class AugSerializer(SectionSerializer):
    gaussian_scale = serializers.FloatField(min_value=0)
    mask_p = serializers.FloatField(min_value=0, max_value=1)
    shift_fraction = serializers.FloatField(min_value=0, max_value=1)
    gaussian_literal_mu = serializers.BooleanField()


class SpecSerializer(SectionSerializer):
    encoder_hidden = IntegerListField(min_length=1)
    latent_dim = serializers.IntegerField(min_value=1)
    dropout_p = serializers.FloatField(min_value=0)
    leaky_slope = serializers.FloatField(min_value=0)
    bn_momentum = serializers.FloatField(min_value=0, max_value=1)

    def validate_dropout_p(self, value):
        if value >= 1:
            raise serializers.ValidationError(
                'Вероятность dropout должна быть меньше 1')
        return value


class LossSerializer(SectionSerializer):
    tau = serializers.FloatField()
    contrast_on = serializers.ChoiceField(choices=('projection', 'output'))

    def validate_tau(self, value):
        if value <= 0:
            raise serializers.ValidationError(
                'Температура должна быть положительной')
        return value


class TrainSerializer(SectionSerializer):
    batch_size = serializers.IntegerField(min_value=2)
    epochs = serializers.IntegerField(min_value=1)
    learning_rate = serializers.FloatField()
    beta1 = serializers.FloatField(min_value=0, max_value=1)
    beta2 = serializers.FloatField(min_value=0, max_value=1)
    eps = serializers.FloatField()

    def validate(self, data):
        for key in ('learning_rate', 'eps'):
            if data[key] <= 0:
                raise serializers.ValidationError(
                    {key: 'Значение должно быть положительным'})
        return data


class ClusterSerializer(SectionSerializer):
    algorithm = serializers.ChoiceField(choices=ALGORITHMS)
    max_steps = serializers.IntegerField(min_value=1)
    neighbor_radius = serializers.FloatField(min_value=0, max_value=2)
    default_radius = serializers.FloatField(min_value=0, max_value=2)
    min_cluster_size = serializers.IntegerField(min_value=1)
    kmeans_k = serializers.IntegerField(min_value=1)
    kmeans_batch = serializers.IntegerField(min_value=1)
    kmeans_max_iter = serializers.IntegerField(min_value=1)
    kmeans_init_size = serializers.IntegerField(min_value=1)
    kmeans_reassignment_ratio = serializers.FloatField(min_value=0)
    eps = serializers.FloatField(min_value=0)
    min_samples = serializers.IntegerField(min_value=1)


class SynthSerializer(SectionSerializer):
    genomes = serializers.IntegerField(min_value=1)
    samples = serializers.IntegerField(min_value=1)
    contigs_per_genome = serializers.IntegerField(min_value=1)
    genome_length = serializers.IntegerField(min_value=1)
    min_contig_length = serializers.IntegerField(min_value=1)
    divergence = serializers.FloatField(min_value=0, max_value=2)
    concentration = serializers.FloatField()
    abundance_sigma = serializers.FloatField(min_value=0)
    reads_per_sample = serializers.IntegerField(min_value=0)
    multimap_fraction = serializers.FloatField(min_value=0, max_value=1)
    strains_per_species = serializers.IntegerField(min_value=1)
    species_per_genus = serializers.IntegerField(min_value=1)

    def validate_concentration(self, value):
        if value <= 0:
            raise serializers.ValidationError(
                'Параметр Дирихле должен быть положительным')
        return value


class BenchSerializer(SectionSerializer):
    precision_floor = serializers.FloatField(min_value=0, max_value=1)
    pca_dims = serializers.IntegerField(min_value=1)


SECTION_SERIALIZERS = {
    'run': RunSerializer,
    'ingest': IngestSerializer,
    'features': FeaturesSerializer,
    'aug': AugSerializer,
    'spec': SpecSerializer,
    'loss': LossSerializer,
    'train': TrainSerializer,
    'cluster': ClusterSerializer,
    'synth': SynthSerializer,
    'bench': BenchSerializer,
}
