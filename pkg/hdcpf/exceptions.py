# -*- coding: utf-8 -*-


class TruncationOverflow(Exception):
    pass


class UnknownElement(Exception):
    pass


class ConventionError(Exception):
    pass


class SpaceMismatch(Exception):
    pass


class EmptyPostSelection(Exception):
    pass


class BasisIncomplete(Exception):
    pass


class InvalidDimension(Exception):
    pass


class InvalidSubspace(Exception):
    pass


class NotNormalized(Exception):
    pass


class EncodingError(Exception):
    pass


class InsufficientTrace(Exception):
    pass


class ValidationError(Exception):
    pass


class FieldException(Exception):
    pass


class NetlistError(Exception):
    """
    Raised with the list of diagnostics when a netlist can not be executed
    """
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super(NetlistError, self).__init__(
            '; '.join(str(d) for d in self.diagnostics))


class ExecutionError(Exception):
    pass


class EmitError(Exception):
    pass


class DescriptorError(ValueError):
    """
    Malformed element descriptor, ``column`` is 0-based within the text
    """
    def __init__(self, message, column=0):
        self.column = column
        super(DescriptorError, self).__init__(message)
