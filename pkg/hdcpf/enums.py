# -*- coding: utf-8 -*-


class Pol(object):
    H, V = range(0, 2)
    NAMES = ('H', 'V')

    @classmethod
    def from_name(cls, name):
        try:
            return cls.NAMES.index(name.strip().upper())
        except ValueError:
            raise ValueError('Unknown polarization: %s' % name)


class TransformKind(object):
    UNITARY, ISOMETRY, PROJECTOR = range(0, 3)
    NAMES = ('unitary', 'isometry', 'projector')


class BellOutcome(object):
    PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS = range(0, 4)
    NAMES = ('PhiPlus', 'PhiMinus', 'PsiPlus', 'PsiMinus')
    ALL = (PHI_PLUS, PHI_MINUS, PSI_PLUS, PSI_MINUS)

    @classmethod
    def from_name(cls, name):
        try:
            return cls.NAMES.index(name.strip())
        except ValueError:
            raise ValueError('Unknown Bell outcome: %s' % name)


class DriftKind(object):
    RANDOM_WALK, SINUSOIDAL, STEP = range(0, 3)
    NAMES = ('random-walk', 'sinusoidal', 'step')


class Readout(object):
    PROJECTIVE, PBS = range(0, 2)
    NAMES = ('projective', 'pbs')
