"""Seeded random streams.

Every source wraps a numpy ``Generator`` on the PCG64 bit generator.  Normal
variates use numpy's ziggurat method and exponentials its ziggurat
exponential; both are fixed for a given numpy release, which is what keeps
chain CSVs byte-stable.

Independent streams for parallel chains or benchmark cells are derived with
``SeedSequence(master_seed, spawn_key=(index,))`` (see :meth:`RandomSource.spawn`).
"""
import numpy as np


class RandomSource:
    """Reproducible stream of uniform, standard-normal and unit-exponential draws."""

    def __init__(self, seed=0, spawn_key=()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.spawn_key = tuple(int(k) for k in spawn_key)
        ss = np.random.SeedSequence(seed, spawn_key=self.spawn_key)
        self._gen = np.random.Generator(np.random.PCG64(ss))

    def spawn(self, index):
        """Child stream for chain/cell ``index``; independent of this stream's state."""
        return RandomSource(self.seed, self.spawn_key + (int(index),))

    def draw_uniform(self):
        return float(self._gen.random())

    def draw_std_normal_vec(self, p):
        if int(p) < 1:
            raise ValueError(f"p must be >= 1, got {p}")
        return self._gen.standard_normal(int(p))

    def draw_unit_exponential(self):
        return float(self._gen.standard_exponential())

    def __repr__(self):
        return f"RandomSource(seed={self.seed}, spawn_key={self.spawn_key})"


class TransformedSource:
    """Pass-through source that multiplies every normal vector by ``R``.

    With ``R`` orthogonal this is again a valid source; it is how the
    rotation-equivariance tests inject matched randomness.
    """

    def __init__(self, inner, R):
        self.inner = inner
        self.R = np.asarray(R, dtype=np.float64)

    def draw_uniform(self):
        return self.inner.draw_uniform()

    def draw_std_normal_vec(self, p):
        return self.R @ self.inner.draw_std_normal_vec(p)

    def draw_unit_exponential(self):
        return self.inner.draw_unit_exponential()


def as_source(random_state):
    """Coerce ``None``, an int seed, or an existing source to a source."""
    if random_state is None:
        return RandomSource(0)
    if isinstance(random_state, (int, np.integer)):
        return RandomSource(int(random_state))
    if hasattr(random_state, "draw_std_normal_vec"):
        return random_state
    raise TypeError(f"cannot build a random source from {random_state!r}")
