# -*- coding: utf-8 -*-
'''
Exception hierarchy shared by every JNSpace module.
'''


class JNSpaceError(Exception):
    """Base class of all errors raised by JNSpace."""


class GridError(JNSpaceError):
    pass


class GridFormatError(JNSpaceError):
    pass


class MomentOrderError(JNSpaceError):
    pass


class ParameterError(JNSpaceError):
    pass


class ProjectionError(JNSpaceError):
    pass


class OracleLimitError(JNSpaceError):
    pass


class DecompositionError(JNSpaceError):
    pass

