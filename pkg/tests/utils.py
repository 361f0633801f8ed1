# -*- coding: utf-8 -*-
import numpy as np

from hdcpf.protocol import aligned_overlap


def random_vector(n, rng):
    v = rng.normal(size=n) + 1j * rng.normal(size=n)
    return v / np.linalg.norm(v)


def random_density(n, rng):
    """
    Random mixed state of rank n
    """
    g = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    rho = g.dot(g.conj().T)
    return rho / np.trace(rho).real


def same_ray(expected, got, tolerance=1e-10):
    """
    Equal up to a global phase, both normalized first
    """
    expected = np.asarray(expected, dtype=complex)
    got = np.asarray(got, dtype=complex)
    expected = expected / np.linalg.norm(expected)
    got = got / np.linalg.norm(got)
    return aligned_overlap(expected, got) >= 1 - tolerance
