from dataclasses import dataclass, field


@dataclass(frozen=True)
class ContigRecord:
    """
    Контиг: идентификатор, образец-источник и нуклеотидная
    последовательность над алфавитом ACGTN.
    """
    contig_id: str
    sample_id: str
    sequence: str

    @property
    def length(self):
        return len(self.sequence)


@dataclass(frozen=True)
class MappingRecord:
    """
    Прочтение из образца sample_id, картированное на n >= 1 контигов.
    Каждый контиг получает вклад 1/n.
    """
    read_id: str
    sample_id: str
    mapped_contig_ids: tuple


@dataclass(frozen=True)
class ReferenceEntry:
    contig_id: str
    genome_id: str
    start: int
    end: int

    @property
    def span(self):
        return self.end - self.start


@dataclass(frozen=True)
class Taxon:
    strain: str
    species: str
    genus: str

    def at(self, rank):
        return getattr(self, rank)


RANKS = ('strain', 'species', 'genus')


@dataclass
class ReferenceMap:
    """
    Истинное происхождение контигов: участок [start, end) генома,
    длины геномов и таксономия (штамм, вид, род).
    """
    entries: list = field(default_factory=list)
    genome_lengths: dict = field(default_factory=dict)
    taxonomy: dict = field(default_factory=dict)

    def by_contig(self):
        return {entry.contig_id: entry for entry in self.entries}

    def genome_ids(self):
        return sorted(
            set(self.genome_lengths) | {e.genome_id for e in self.entries})
