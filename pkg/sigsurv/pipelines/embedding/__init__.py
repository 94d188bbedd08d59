from sigsurv.pipelines.embedding.extract import load_frequencies, load_word_embeddings
from sigsurv.pipelines.embedding.sif import SifConfig, WordEmbeddingTable, embed_cohort, sif_embed

__all__ = ["SifConfig", "WordEmbeddingTable", "embed_cohort", "load_frequencies", "load_word_embeddings", "sif_embed"]
