# -*- coding: utf-8 -*-
import json
import functools
import logging

from . import models
from . import settings
from .validators import RangeValidator, ChoiceValidator
from .exceptions import ConventionError
from .exceptions import ValidationError

log = logging.getLogger('hdcpf')

_phase = RangeValidator(-7.0, 7.0)
_flag = ChoiceValidator((True, False))


class Conventions(models.Model):
    """
    Element phases that are only fixed implicitly by the stage
    walkthroughs. Phases are in radians.
    """
    pbs_reflection_phase = models.Field(validators=[_phase], cast=float,
                                        default=1.5707963267948966)
    pbs_reflection_flips_oam = models.Field(validators=[_flag], default=True)
    mirror_phase = models.Field(validators=[_phase], cast=float,
                                default=1.5707963267948966)
    mirror_flips_oam = models.Field(validators=[_flag], default=True)
    interferometer_phase = models.Field(validators=[_phase], cast=float,
                                        default=-1.5707963267948966)
    pp_b = models.Field(validators=[_phase], cast=float,
                        default=3.141592653589793)
    pp_p2 = models.Field(validators=[_phase], cast=float,
                         default=3.141592653589793)

    class Meta:
        label = 'conventions'


def load_conventions(path=None, **overrides):
    """
    Reads the frozen convention fixture, keyword overrides are applied on
    top (used to inject faults)
    """
    path = path or settings.CONVENTIONS
    try:
        with open(path, 'r') as f:
            raw = json.load(f)
    except (IOError, ValueError) as e:
        raise ConventionError('Could not read conventions %s: %s' % (path, e))

    raw.pop('version', None)
    raw.update(overrides)
    log.debug('[%s] Loading conventions from %s with overrides %r'
              % (log.name.upper(), path, overrides))
    try:
        return Conventions(**raw).clean()
    except (TypeError, ValidationError) as e:
        raise ConventionError('Invalid conventions in %s: %s' % (path, e))


@functools.lru_cache(maxsize=None)
def default_conventions():
    return load_conventions()
