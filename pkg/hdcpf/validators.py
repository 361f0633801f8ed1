# -*- coding: utf-8 -*-
import math

from .exceptions import ValidationError


class RangeValidator(object):
    """
    Closed interval check, either bound may be None
    """
    def __init__(self, low=None, high=None):
        self.low = low
        self.high = high

    def __call__(self, value):
        if value is None or not math.isfinite(value):
            raise ValidationError(['%r is not a finite number' % (value, )])
        if self.low is not None and value < self.low:
            raise ValidationError(['%r is below %r' % (value, self.low)])
        if self.high is not None and value > self.high:
            raise ValidationError(['%r is above %r' % (value, self.high)])


class PositiveValidator(object):
    def __call__(self, value):
        if value is None or not value > 0:
            raise ValidationError(['%r must be positive' % (value, )])


class ChoiceValidator(object):
    def __init__(self, choices):
        self.choices = tuple(choices)

    def __call__(self, value):
        if value not in self.choices:
            raise ValidationError(['%r is not one of %s'
                                   % (value, ', '.join(map(str,
                                                           self.choices)))])


class FiniteValidator(object):
    def __call__(self, value):
        if value is None or not math.isfinite(value):
            raise ValidationError(['%r is not a finite number' % (value, )])


non_negative = RangeValidator(low=0.0)
probability = RangeValidator(low=0.0, high=1.0)
