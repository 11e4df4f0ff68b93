"""Exception hierarchy shared by all modules."""


class ConsensusKitError(Exception):
    """Base class for every error raised by the toolkit."""


class NotConnected(ConsensusKitError):
    pass


class TooLarge(ConsensusKitError):
    pass


class NotSourceOrSink(ConsensusKitError):
    pass


class BadArgs(ConsensusKitError):
    pass


class BadFamilyArgs(BadArgs):
    pass


class BarrierHit(ConsensusKitError):
    """A coupling was evaluated within the guard band of its singularity."""

    def __init__(self, message, theta=None):
        super().__init__(message)
        self.theta = theta


class InvalidFormation(ConsensusKitError):
    pass


class InfeasibleFrequency(ConsensusKitError):
    pass


class DegenerateSign(ConsensusKitError):
    pass


class EmptyPositiveSet(ConsensusKitError):
    def __init__(self, agent, message=None):
        super().__init__(message or f"agent {agent} has an empty positive neighbour set")
        self.agent = agent


class NonpositiveEpsilon(ConsensusKitError):
    pass


class NotSolvable(ConsensusKitError):
    pass


class StepCollapse(ConsensusKitError):
    """Step halving fell below the minimum step; carries the last valid time."""

    def __init__(self, message, t_last=None):
        super().__init__(message)
        self.t_last = t_last


class InvalidInit(ConsensusKitError):
    pass
