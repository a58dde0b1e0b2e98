"""Service sampling a dataset and, on request, its analytical or initial-state Gram matrix."""

import logging

from ntklab.adapters.codecs import encode_dataset, encode_gram_binary, encode_gram_csv
from ntklab.adapters.storage import ArtifactStore
from ntklab.domain.models.enums import GramExport, GramFormat
from ntklab.domain.models.kernel import GramMatrix, gram_analytical, gram_matrix
from ntklab.domain.models.network import init_antisymmetric
from ntklab.domain.models.sphere import Dataset, make_dataset
from ntklab.domain.models.streams import named_stream
from ntklab.domain.schemas.config import DataConfig
from ntklab.service_layer.seeding import resolve_seed
from ntklab.settings.lab_settings import LabSettings

log = logging.getLogger(__name__)


class DataService:
    """Application service for dataset generation."""

    def __init__(self, settings: LabSettings):
        """Initialize data service."""
        self.settings = settings

    def effective_config(self, config: DataConfig) -> DataConfig:
        return config.model_copy(update={"seed": resolve_seed(config.seed, self.settings)})

    def sample(self, config: DataConfig) -> Dataset:
        assert config.seed is not None
        f = config.f.build(config.d)
        return make_dataset(f, config.noise.build(), config.d, config.n, named_stream(config.seed, "data"))

    def gram(self, config: DataConfig, dataset: Dataset) -> GramMatrix:
        """The requested Gram matrix; the initial one uses the same initialization stream as ``train``."""
        if config.gram == GramExport.ANALYTICAL:
            return gram_analytical(dataset.X, self.settings.GRAM_CAP)
        assert config.seed is not None and config.m is not None
        state = init_antisymmetric(config.m, config.d, named_stream(config.seed, "init"))
        return gram_matrix(state, dataset.X, self.settings.GRAM_CAP)

    def write(self, config: DataConfig, store: ArtifactStore) -> Dataset:
        dataset = self.sample(config)
        store.write_text("dataset.csv", encode_dataset(dataset))
        if config.gram != GramExport.NONE:
            gram = self.gram(config, dataset)
            if config.gram_format == GramFormat.BINARY:
                store.write_bytes("gram.bin", encode_gram_binary(gram.H))
            else:
                store.write_text("gram.csv", encode_gram_csv(gram.H))
        assert config.seed is not None
        store.write_manifest("data", config.model_dump(), [config.seed])
        log.info("Sampled %s points in d=%s", dataset.n, dataset.d)
        return dataset
