# -*- coding: utf-8 -*-
"""
Active phase locking of the HD beam splitter interferometers.

A locking laser with one polarization phase-modulated at Omega runs through
the interferometer; its interference intensity is mixed with
cos(Omega t + tau) and low-pass filtered into an error signal proportional
to sin(zeta) sin(tau), which a PID servo feeds back to the piezo phase.
"""
import math
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import signal, special

from . import models
from .enums import DriftKind
from .fock import keyed_generator
from .validators import ChoiceValidator
from .validators import FiniteValidator
from .validators import PositiveValidator
from .validators import non_negative
from .exceptions import InsufficientTrace

log = logging.getLogger('hdcpf')

MIN_PERIODS = 10
LOOP_PERIODS = 100


class LockParams(models.Model):
    """
    theta: modulation depth (rad), omega: modulation angular frequency
    (rad/s), tau: demodulation phase (rad), e0h/e0v: field amplitudes,
    lpf_cutoff: low-pass corner (Hz, default Omega / (2 pi 50)), dt: sample
    period (s), noise: additive detector noise std, offset: DC offset added
    to the error signal
    """
    theta = models.Field(validators=[non_negative], default=0.2, cast=float)
    omega = models.Field(validators=[PositiveValidator()],
                         default=2 * math.pi * 1e4, cast=float)
    tau = models.Field(validators=[FiniteValidator()], default=math.pi / 2,
                       cast=float)
    e0h = models.Field(validators=[non_negative], default=1.0, cast=float)
    e0v = models.Field(validators=[non_negative], default=1.0, cast=float)
    lpf_cutoff = models.Field(cast=float)
    dt = models.Field(validators=[PositiveValidator()], default=1e-6,
                      cast=float)
    noise = models.Field(validators=[non_negative], default=0.0, cast=float)
    offset = models.Field(validators=[FiniteValidator()], default=0.0,
                          cast=float)

    class Meta:
        label = 'lock'

    def invariants(self):
        errors = []
        if self.lpf_cutoff is not None and \
                not 0 < self.lpf_cutoff < self.frequency:
            errors.append(('lpf_cutoff', 'cutoff must lie in (0, %g) Hz'
                           % self.frequency))
        if not self.dt < 1 / (10 * self.frequency):
            errors.append(('dt', 'need at least 10 samples per modulation '
                           'period'))
        return errors

    @property
    def frequency(self):
        return self.omega / (2 * math.pi)

    @property
    def cutoff(self):
        if self.lpf_cutoff is None:
            return self.frequency / 50
        return self.lpf_cutoff

    @property
    def samples_per_period(self):
        return int(round(2 * math.pi / (self.omega * self.dt)))


class DriftModel(models.Model):
    """
    random-walk: sigma in rad/sqrt(s); sinusoidal: amplitude (rad) and
    period (s); step: amplitude (rad) applied at period (s)
    """
    kind = models.Field(validators=[ChoiceValidator(DriftKind.NAMES)],
                        default='random-walk')
    sigma = models.Field(validators=[non_negative], default=0.0, cast=float)
    amplitude = models.Field(validators=[non_negative], default=0.0,
                             cast=float)
    period = models.Field(validators=[PositiveValidator()], default=1.0,
                          cast=float)

    class Meta:
        label = 'drift'

    def sample(self, t, rng):
        t = np.asarray(t, dtype=float)
        if self.kind == 'random-walk':
            if not self.sigma or len(t) < 2:
                return np.zeros(len(t))
            steps = rng.normal(0.0, self.sigma * np.sqrt(np.diff(t)))
            return np.concatenate([[0.0], np.cumsum(steps)])
        if self.kind == 'sinusoidal':
            return self.amplitude * np.sin(2 * math.pi * t / self.period)
        return np.where(t >= self.period, self.amplitude, 0.0)


class PidGains(models.Model):
    kp = models.Field(validators=[FiniteValidator()], default=0.2,
                      cast=float)
    ki = models.Field(validators=[FiniteValidator()], default=6000.0,
                      cast=float)
    kd = models.Field(validators=[FiniteValidator()], default=0.0,
                      cast=float)
    low = models.Field(validators=[FiniteValidator()], default=-10.0,
                       cast=float)
    high = models.Field(validators=[FiniteValidator()], default=10.0,
                        cast=float)

    class Meta:
        label = 'pid'

    def invariants(self):
        if not self.low < self.high:
            return [('high', 'output limits must satisfy low < high')]
        return []


@dataclass
class PidState:
    integral: float = 0.0
    previous: float = None
    output: float = 0.0


def intensity(t, zeta, p):
    """
    I(t) = 1/4 [E0H^2 + E0V^2 + 2 E0H E0V cos(theta sin(Omega t) - zeta)]
    """
    t = np.asarray(t, dtype=float)
    return 0.25 * (p.e0h ** 2 + p.e0v ** 2 + 2 * p.e0h * p.e0v *
                   np.cos(p.theta * np.sin(p.omega * t) - zeta))


def field_intensity(t, zeta, p):
    """
    Same intensity from the fields behind the 45 degree polarizer
    """
    t = np.asarray(t, dtype=float)
    e_h = p.e0h * np.exp(1j * p.theta * np.sin(p.omega * t))
    e_v = p.e0v * np.exp(1j * zeta) * np.ones_like(t)
    e_out = (e_h + e_v) / math.sqrt(2)
    return 0.5 * np.abs(e_out) ** 2


def sample_trace(zeta, p, periods=200, rng=None):
    """
    (t, intensity samples) over ``periods`` modulation periods
    """
    n = int(periods * p.samples_per_period)
    t = np.arange(n) * p.dt
    samples = intensity(t, zeta, p)
    if p.noise:
        rng = rng or keyed_generator(0, 'detector')
        samples = samples + rng.normal(0.0, p.noise, n)
    return t, samples


def demodulate_error(samples, p, t=None, reference=None):
    """
    Mixes with cos(Omega t + tau), filters with a single-pole low-pass and
    averages the settled second half of the output over whole periods. The
    DC offset of ``p`` is subtracted. A precomputed ``reference`` replaces
    the mixing cosine.
    """
    samples = np.asarray(samples, dtype=float)
    per_period = p.samples_per_period
    if len(samples) < MIN_PERIODS * per_period:
        raise InsufficientTrace('Trace spans %.3g modulation periods, at '
                                'least %d are needed'
                                % (len(samples) / float(per_period),
                                   MIN_PERIODS))
    if reference is None:
        if t is None:
            t = np.arange(len(samples)) * p.dt
        reference = np.cos(p.omega * t + p.tau)
    mixed = samples * reference

    alpha = 1 - math.exp(-2 * math.pi * p.cutoff * p.dt)
    filtered = signal.lfilter([alpha], [1, alpha - 1], mixed)

    window = (len(samples) // per_period // 2) * per_period
    return float(np.mean(filtered[-window:])) - p.offset


def expected_gain(p):
    """
    Closed-form lock-in gain: error = G sin(zeta) sin(tau) with
    G = -E0H E0V J1(theta) / 2
    """
    return -0.5 * p.e0h * p.e0v * float(special.jv(1, p.theta))


def calibrate_gain(p, points=9, span=0.1, periods=200):
    """
    Least-squares G from demodulated traces over a small zeta sweep
    """
    sin_tau = math.sin(p.tau)
    if abs(sin_tau) < 1e-9:
        raise ValueError('tau = %g gives no error signal' % p.tau)
    quiet = p.replace(offset=0.0, noise=0.0)
    x, y = [], []
    for zeta in np.linspace(-span, span, points):
        _, samples = sample_trace(zeta, quiet, periods)
        x.append(math.sin(zeta) * sin_tau)
        y.append(demodulate_error(samples, quiet))
    x, y = np.array(x), np.array(y)
    gain = float(x.dot(y) / x.dot(x))
    log.debug('[%s] Calibrated lock-in gain %.6g (closed form %.6g)'
              % (log.name.upper(), gain, expected_gain(p)))
    return gain


def setpoint_offset(zeta_star, p, gain=None):
    """
    DC offset whose error-signal zero crossing sits at ``zeta_star``
    """
    gain = expected_gain(p) if gain is None else gain
    return gain * math.sin(p.tau) * math.sin(zeta_star)


def error_signal(zeta, p, gain=None):
    """
    Settled demodulator output for a static phase
    """
    gain = expected_gain(p) if gain is None else gain
    return gain * math.sin(p.tau) * math.sin(zeta) - p.offset


def pid_update(state, error, dt, gains):
    """
    Returns (new state, actuation). The integral is frozen while the
    output sits on a limit and the error would push it further.
    """
    if dt <= 0:
        raise ValueError('dt must be positive')
    derivative = 0.0 if state.previous is None else \
        (error - state.previous) / dt
    integral = state.integral + error * dt
    output = gains.kp * error + gains.ki * integral + gains.kd * derivative
    if output > gains.high or output < gains.low:
        integral = state.integral
        output = gains.kp * error + gains.ki * integral + \
            gains.kd * derivative
        output = min(gains.high, max(gains.low, output))
    return PidState(integral, error, output), output


@dataclass
class LockTrace:
    t: np.ndarray
    zeta_open: np.ndarray
    zeta_closed: np.ndarray
    error: np.ndarray
    actuation: np.ndarray
    setpoint: float = 0.0
    diverged: bool = False
    gain: float = None
    columns: tuple = field(default=('t', 'zeta_open', 'zeta_closed', 'error',
                                    'actuation'))

    def rms_open(self):
        return float(np.sqrt(np.mean((self.zeta_open - self.setpoint) ** 2)))

    def rms_closed(self):
        return float(np.sqrt(np.mean((self.zeta_closed -
                                      self.setpoint) ** 2)))

    def rows(self):
        for values in zip(self.t, self.zeta_open, self.zeta_closed,
                          self.error, self.actuation):
            yield tuple(float(v) for v in values)


def simulate_lock(p, drift, gains, duration, setpoint=0.0, seed=0,
                  loop_dt=1e-4, initial=0.0, calibrate=False,
                  periods=LOOP_PERIODS):
    """
    Co-simulates the free-running and the locked interferometer phase.
    The servo runs every ``loop_dt``; each update demodulates the detector
    trace of the last ``periods`` modulation periods at the phase reached
    after the previous actuation, normalized by G sin(tau).
    """
    if duration <= 10 * loop_dt:
        raise ValueError('duration must span many loop periods')
    gain = calibrate_gain(p, periods=periods) if calibrate \
        else expected_gain(p)
    scale = gain * math.sin(p.tau)
    if abs(scale) < 1e-15:
        raise ValueError('The lock-in gain vanishes for these parameters')
    p = p.replace(offset=setpoint_offset(setpoint, p, gain))

    rng = keyed_generator(seed, 'lock')
    steps = int(round(duration / loop_dt))
    t = np.arange(steps) * loop_dt
    disturbance = drift.sample(t, rng)
    window = np.arange(int(periods * p.samples_per_period)) * p.dt
    reference = np.cos(p.omega * window + p.tau)

    zeta_open = initial + disturbance
    zeta_closed = np.zeros(steps)
    errors = np.zeros(steps)
    actuation = np.zeros(steps)
    state = PidState()
    u = 0.0
    for k in range(steps):
        zeta = zeta_open[k] + u
        zeta_closed[k] = zeta
        samples = intensity(window, zeta, p)
        if p.noise:
            samples = samples + rng.normal(0.0, p.noise, len(window))
        e = -demodulate_error(samples, p, reference=reference) / scale
        state, u = pid_update(state, e, loop_dt, gains)
        errors[k] = e
        actuation[k] = u

    tail = zeta_closed[steps // 2:] - setpoint
    diverged = not np.all(np.isfinite(zeta_closed)) or \
        bool(np.max(np.abs(tail)) > math.pi / 2)
    if diverged:
        log.warning('[%s] Lock diverged (max tail error %.3g rad)'
                    % (log.name.upper(), float(np.max(np.abs(tail)))))
    return LockTrace(t, zeta_open, zeta_closed, errors, actuation,
                     setpoint, diverged, gain)
