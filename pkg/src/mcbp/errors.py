"""Exception hierarchy shared across the package."""


class MCBPError(Exception):
    """Base class for every error raised by mcbp."""


class ParameterError(MCBPError, ValueError):
    """An argument is out of its documented range or has the wrong shape."""


class DimensionError(ParameterError):
    pass


class SymmetryError(ParameterError):
    pass


class DatasetTooSmallError(ParameterError):
    pass


class DegeneratePatchError(MCBPError):
    pass


class IsolatedVertexError(MCBPError):
    """A vertex of a weighted graph has zero degree."""


class DataParseError(MCBPError):
    def __init__(self, message, row=None, column=None):
        super().__init__(message)
        self.row = row
        self.column = column


class UndefinedIndexError(MCBPError):
    """A validity index is undefined for the given labelling (e.g. one cluster)."""


class NoValidClusteringError(MCBPError):
    pass


class InsufficientSmoothPointsError(MCBPError):
    pass


class PropagationError(MCBPError):
    pass
