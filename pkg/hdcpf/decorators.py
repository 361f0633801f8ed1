# -*- coding: utf-8 -*-
import functools

from .exceptions import SpaceMismatch
from .exceptions import NotNormalized


def require_same_space(func):
    """
    Every positional argument carrying a ``space`` attribute must live on the
    same ModeSpace
    """
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        spaces = [a.space for a in args if hasattr(a, 'space')]
        for space in spaces[1:]:
            if space != spaces[0]:
                raise SpaceMismatch('%s called with %r and %r'
                                    % (func.__name__, spaces[0], space))
        return func(*args, **kwargs)
    return wrapper


def require_normalized(tolerance):
    def decorator(func):
        @functools.wraps(func)
        def wrapper(state, *args, **kwargs):
            norm = state.norm()
            if abs(norm - 1.0) > tolerance:
                raise NotNormalized('%s expects a normalized state, got norm '
                                    '%.3g' % (func.__name__, norm))
            return func(state, *args, **kwargs)
        return wrapper
    return decorator
