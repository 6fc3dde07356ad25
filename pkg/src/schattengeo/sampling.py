"""Seeded random generation used by batteries and the CLI.

One root seed is expanded into independent named streams: the stream for
label chain ``(root, "busemann", "triples")`` is the PCG64 generator built
from ``SeedSequence([root, blake2s("busemann"), blake2s("triples")])`` where
``blake2s(label)`` is the first 8 bytes of the blake2s digest split into two
uint32 words. Identical (seed, labels) always produce identical streams, and
distinct labels are independent by construction.
"""

from __future__ import annotations

import hashlib

import numpy as np

from . import linalg


def _label_words(label: str) -> list[int]:
    digest = hashlib.blake2s(label.encode("utf8")).digest()
    return [int.from_bytes(digest[i : i + 4], "little") for i in (0, 4)]


def seed_sequence(seed: int, *labels: str) -> np.random.SeedSequence:
    """Derive the named sub-stream seed for (seed, labels)."""
    entropy: list[int] = [int(seed) & 0xFFFFFFFFFFFFFFFF]
    for label in labels:
        entropy.extend(_label_words(label))
    return np.random.SeedSequence(entropy)


def rng(seed: int, *labels: str) -> np.random.Generator:
    """Generator for the named sub-stream of a root seed."""
    return np.random.Generator(np.random.PCG64(seed_sequence(seed, *labels)))


def random_complex_gaussian(g: np.random.Generator, shape, sigma: float = 1.0):
    re = g.standard_normal(shape)
    im = g.standard_normal(shape)
    return sigma * (re + 1j * im) / np.sqrt(2.0)


def random_hermitian(g: np.random.Generator, n: int, sigma: float = 1.0) -> np.ndarray:
    """Hermitian matrix with i.i.d. complex Gaussian entries of scale sigma."""
    a = random_complex_gaussian(g, (n, n), sigma)
    return linalg.hermitian_part(a)


def random_pd_matrix(
    g: np.random.Generator,
    n: int,
    sigma: float = 0.5,
    max_log_eig: float = 6.0,
) -> np.ndarray:
    """Positive-definite sample ``exp(X)`` with X Hermitian Gaussian.

    Eigenvalues of X are clipped to ``[-max_log_eig, max_log_eig]``, which
    caps the condition number at ``exp(2 * max_log_eig)``.
    """
    x = random_hermitian(g, n, sigma=sigma)
    w, v = np.linalg.eigh(x)
    w = np.clip(w, -max_log_eig, max_log_eig)
    return linalg.hermitian_part((v * np.exp(w)) @ v.conj().T)


def random_unitary(g: np.random.Generator, n: int) -> np.ndarray:
    """Haar unitary through the phase-fixed QR of a complex Gaussian."""
    a = random_complex_gaussian(g, (n, n))
    q, r = np.linalg.qr(a)
    d = np.diagonal(r).copy()
    d[np.abs(d) == 0.0] = 1.0
    return q * (d / np.abs(d))


def random_invertible(
    g: np.random.Generator,
    n: int,
    max_cond: float = 100.0,
) -> np.ndarray:
    """Invertible sample with singular values clipped to cap the condition."""
    a = random_complex_gaussian(g, (n, n))
    w, sv, vh = np.linalg.svd(a)
    lo = sv[0] / max_cond
    sv = np.maximum(sv, lo)
    return (w * sv) @ vh


def random_unit_vector(g: np.random.Generator, n: int) -> np.ndarray:
    """Uniform point of the complex unit sphere."""
    z = random_complex_gaussian(g, n)
    nz = np.linalg.norm(z)
    while nz < 1e-12:  # essentially never
        z = random_complex_gaussian(g, n)
        nz = np.linalg.norm(z)
    return z / nz
