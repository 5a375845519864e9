"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line can map failures
onto its documented codes (2 usage/config, 3 data/validation, 4 numerical).
"""


class PolarnetError(Exception):
    exit_code = 3


class ConfigError(PolarnetError):
    exit_code = 2


class DataError(PolarnetError):
    exit_code = 3


class NumericalError(PolarnetError):
    exit_code = 4


# graph
class IndexOutOfRange(DataError):
    pass


class SelfLoop(DataError):
    pass


class DisconnectedGraph(DataError):
    pass


class DimensionMismatch(DataError):
    pass


class NegativeQuadraticForm(NumericalError):
    pass


class ParseError(DataError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        where = f"{path}:{line}" if line is not None else str(path)
        super().__init__(f"{where}: {message}")


# opinions
class WrongCommunityCount(ConfigError):
    pass


class NotOrthogonal(DataError):
    pass


class RangeViolation(DataError):
    pass


class ZeroVector(DataError):
    pass


# metrics
class TooFewOpinions(DataError):
    pass


class DegenerateCovariance(NumericalError):
    pass


class EmptySamples(DataError):
    pass


# generators
class TooFewNodes(ConfigError):
    pass


class Unbalanced(ConfigError):
    pass


class ConnectivityFailure(NumericalError):
    pass


class LastCommunities(ConfigError):
    pass


# experiments
class ConfigMismatch(ConfigError):
    pass


class TooFewPoints(DataError):
    pass


class MissingScenario(DataError):
    pass
