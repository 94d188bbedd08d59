import zlib

import numpy as np

# Named substreams used by the pipeline. Every randomized choice draws from one of these.
SPLIT_STREAM = "split"
CV_STREAM = "cv"
SIMULATE_STREAM = "simulate"


def substream(master_seed: int, name: str, *counters: int) -> np.random.SeedSequence:
    """
    Derive an independent seed sequence for a named purpose from the master seed.

    Extra integer ``counters`` give counter-based child streams (one per patient, fold, ...)
    that do not depend on the order in which they are consumed.
    """
    return np.random.SeedSequence([master_seed & 0xFFFFFFFF, zlib.crc32(name.encode("utf-8")), *counters])


def substream_rng(master_seed: int, name: str, *counters: int) -> np.random.Generator:
    return np.random.default_rng(substream(master_seed, name, *counters))


def substream_int(master_seed: int, name: str) -> int:
    """32-bit integer seed for libraries that take ``random_state=int``."""
    return int(substream(master_seed, name).generate_state(1)[0])
