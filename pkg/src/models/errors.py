class MfspecError(Exception):
    kind = 'error'

    def __init__(self, message, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self):
        return {
            'success': False,
            'kind': self.kind,
            'message': str(self),
            **self.details
        }


class EnumerationLimitError(MfspecError):
    kind = 'enumeration_limit'


class InvalidMeasureError(MfspecError):
    kind = 'invalid_measure'


class InvalidSystemError(MfspecError):
    kind = 'invalid_system'


class DegenerateCylinderError(MfspecError):
    kind = 'degenerate_cylinder'


class InsufficientDepthError(MfspecError):
    kind = 'insufficient_depth'


class NoCylindersError(MfspecError):
    kind = 'no_cylinders'


class NotContractingError(MfspecError):
    kind = 'not_contracting'


class AlphaUnreachableError(MfspecError):
    kind = 'alpha_unreachable'


class InfeasibleAlphaError(MfspecError):
    kind = 'infeasible_alpha'


class SolverDidNotConvergeError(MfspecError):
    kind = 'not_converged'


class InvalidScheduleError(MfspecError):
    kind = 'invalid_schedule'


class NonStationaryChainError(MfspecError):
    kind = 'non_stationary'


class InstanceTooLargeError(MfspecError):
    kind = 'instance_too_large'


class InvalidOptionsError(MfspecError):
    kind = 'invalid_options'


class ConfigError(MfspecError):
    kind = 'config'
