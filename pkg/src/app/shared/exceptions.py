class SpoisonError(Exception):
    pass


class GridError(SpoisonError):
    pass


class FieldError(SpoisonError):
    pass


class ProfileError(SpoisonError):
    pass


class ParameterError(SpoisonError):
    pass


class ProjectionError(SpoisonError):
    pass


class ShootingError(SpoisonError):
    pass


class ConvergenceError(SpoisonError):
    pass


class InstabilityError(SpoisonError):
    pass


class TraceError(SpoisonError):
    pass


class ConfigError(SpoisonError):
    pass


class OutputLockedError(SpoisonError):
    pass
