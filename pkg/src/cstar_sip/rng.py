"""Counter-based per-trial random streams.

Every trial of every check draws from its own Philox stream.  The key is a
hash of ``(seed, *labels)`` and the trial index sits in the high word of the
counter, so trial ``i`` of a check is reproducible on its own and does not
depend on how many trials ran before it.
"""

import hashlib

import numpy as np


def stream_key(seed, *labels):
    h = hashlib.blake2b(digest_size=16)
    h.update(str(int(seed)).encode())
    for label in labels:
        h.update(b"\x1f")
        h.update(str(label).encode())
    return np.frombuffer(h.digest(), dtype=np.uint64).copy()


def trial_generator(seed, labels, trial):
    """Generator for a single trial."""
    key = stream_key(seed, *labels)
    counter = np.array([0, 0, 0, int(trial)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(counter=counter, key=key))


def trial_normals(seed, labels, trials, count):
    """Standard complex Gaussians, one row per trial, shape ``(trials, count)``.

    Real and imaginary parts are independent N(0, 1/2), so ``E|z|^2 = 1``.
    """
    key = stream_key(seed, *labels)
    out = np.empty((trials, count), dtype=complex)
    counter = np.zeros(4, dtype=np.uint64)
    for i in range(trials):
        counter[3] = i
        g = np.random.Generator(np.random.Philox(counter=counter, key=key))
        raw = g.standard_normal(2 * count)
        out[i] = (raw[:count] + 1j * raw[count:]) / np.sqrt(2.0)
    return out


def split_columns(z, sizes):
    """Cut the columns of ``z`` into consecutive chunks of the given widths."""
    parts = []
    start = 0
    for size in sizes:
        parts.append(z[..., start:start + size])
        start += size
    if start != z.shape[-1]:
        raise ValueError(f"column layout uses {start} of {z.shape[-1]} columns")
    return parts
