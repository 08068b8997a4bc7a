"""Counter-based uniform streams: one disjoint Philox counter range per sample."""

# ================================== Imports ================================== #
# Standard Library
import math

# Third-party
import numpy as np

PHILOX_WORDS_PER_BLOCK = 4


# ================================== Streams ================================== #
class PhiloxStreams:
    """Uniform substreams keyed by a root seed.

    Stream j owns the counter blocks (j*stride, (j+1)*stride], where one block
    yields four 64-bit words and each double consumes one word. Any run of
    consecutive streams can therefore be drawn with a single generator that
    starts at the first stream's counter, and a batch split into chunks reads
    exactly the same words as the unsplit batch.
    """

    def __init__(self, root_seed: int, draws_per_stream: int) -> None:
        if draws_per_stream < 1:
            raise ValueError("draws_per_stream must be >= 1")
        self.root_seed = root_seed
        self.draws_per_stream = draws_per_stream
        self.stride = math.ceil(draws_per_stream / PHILOX_WORDS_PER_BLOCK)

    def uniforms(self, first_stream: int, count: int) -> np.ndarray:
        """Uniforms in [0, 1) for streams first_stream..first_stream+count-1.

        Returns:
            Array of shape (count, draws_per_stream); row j belongs to stream
            first_stream + j.
        """
        width = self.stride * PHILOX_WORDS_PER_BLOCK
        bit_generator = np.random.Philox(
            key=self.root_seed, counter=first_stream * self.stride
        )
        draws = np.random.Generator(bit_generator).random(count * width)
        return draws.reshape(count, width)[:, : self.draws_per_stream]
