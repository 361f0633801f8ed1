# -*- coding: utf-8 -*-
"""
Monte Carlo pure-state noise for the d=4 pipeline.

One realization fixes everything random about a run: the interferometer
phase of each HD beam splitter, a phase on the auxiliary |d-1> branch when
a splitter fails to interfere, random OAM phases on the data photons and
which photons survive.
"""
import math
import logging
from dataclasses import dataclass, field

import numpy as np

from . import models
from . import settings
from .fock import keyed_generator
from .validators import non_negative, probability

log = logging.getLogger('hdcpf')

QUDITS = 4


class NoiseSpec(models.Model):
    """
    jitter: std of the interferometer phase (rad), dephasing: std of the
    per-OAM-component phase on photons 1 and 4 (rad), loss: per-photon loss
    probability, visibility: probability that a splitter interferes
    """
    jitter = models.Field(validators=[non_negative], default=0.0, cast=float)
    dephasing = models.Field(validators=[non_negative], default=0.0,
                             cast=float)
    loss = models.Field(validators=[probability], default=0.0, cast=float)
    visibility = models.Field(validators=[probability], default=1.0,
                              cast=float)
    seed = models.Field(default=0, cast=int)

    class Meta:
        label = 'noise'

    def is_coherent(self):
        """
        True when every realization equals the ideal run; loss only thins
        the heralded events
        """
        return self.jitter == 0 and self.dephasing == 0 and \
            self.visibility == 1

    @classmethod
    def random(cls, rng, seed=0):
        return cls(jitter=float(rng.uniform(0, 0.6)),
                   dephasing=float(rng.uniform(0, 0.6)),
                   loss=float(rng.uniform(0, 0.3)),
                   visibility=float(rng.uniform(0.6, 1.0)),
                   seed=seed).clean()


@dataclass(frozen=True)
class NoiseRealization:
    jitter: tuple = (0.0, 0.0)
    aux_phase: tuple = (0.0, 0.0)
    dephasing: tuple = ((0.0, ) * QUDITS, (0.0, ) * QUDITS)
    weight: float = 1.0

    @property
    def has_jitter(self):
        return any(z != 0 for z in self.jitter)

    def dephasing_operator(self):
        d1 = np.exp(1j * np.asarray(self.dephasing[0]))
        d4 = np.exp(1j * np.asarray(self.dephasing[1]))
        return np.diag(np.kron(d1, d4))


IDEAL = NoiseRealization()


@dataclass
class NoiseEnsemble:
    spec: NoiseSpec
    realizations: list = field(default_factory=list)

    def weights(self):
        w = np.array([r.weight for r in self.realizations], dtype=float)
        return w / w.sum()

    def survival(self):
        """
        Probability that all four photons arrive. A lost photon breaks the
        four-fold coincidence; the heralded state is untouched.
        """
        return (1.0 - self.spec.loss) ** QUDITS


def apply_noise(spec, rng):
    """
    Draws one realization of ``spec``
    """
    jitter = tuple(float(rng.normal(0.0, spec.jitter)) if spec.jitter
                   else 0.0 for _ in range(2))
    aux_phase = tuple(0.0 if rng.uniform() < spec.visibility
                      else float(rng.uniform(0, 2 * math.pi))
                      for _ in range(2))
    dephasing = tuple(
        tuple(float(x) for x in rng.normal(0.0, spec.dephasing, QUDITS))
        if spec.dephasing else (0.0, ) * QUDITS for _ in range(2))
    return NoiseRealization(jitter, aux_phase, dephasing)


def draw_ensemble(spec, samples=None, experiment='noise'):
    """
    Ensemble used by analytic noisy runs. Coherent specs collapse to the
    ideal realization.
    """
    spec = spec or NoiseSpec().clean()
    if spec.is_coherent():
        return NoiseEnsemble(spec, [IDEAL])
    samples = samples or settings.NOISE_SAMPLES
    rng = keyed_generator(spec.seed, experiment)
    realizations = [apply_noise(spec, rng) for _ in range(samples)]
    log.debug('[%s] Drew %d noise realizations for %r'
              % (log.name.upper(), samples, spec))
    return NoiseEnsemble(spec, realizations)
