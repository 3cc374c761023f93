"""Exception hierarchy shared by the solvers and the command-line front end."""


class BWAError(Exception):
    """Base class for all errors raised by bwalab."""


class ConfigError(BWAError, ValueError):
    """Invalid experiment configuration.  ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class NumericalError(BWAError, RuntimeError):
    """A computation ran but did not produce a trustworthy result."""


class DivergenceError(NumericalError):
    def __init__(self, z: float, linf: float, h: float | None = None):
        self.z, self.linf, self.h = z, linf, h
        where = f" (h={h})" if h is not None else ""
        super().__init__(f"solution diverged at z={z:.6g}: sup norm {linf:.3e}{where}")


class HorizonError(NumericalError):
    """Requested final z lies beyond the a-priori existence horizon."""


class BoundaryContaminationError(NumericalError):
    """Periodic continuum field reached the edge of the computational box."""


class HomoclinicError(NumericalError):
    """Phase-plane orbit failed to return to the origin within the allotted range."""


class ShootingError(NumericalError):
    def __init__(self, message: str, defect: float):
        self.defect = defect
        super().__init__(f"{message} (final defect {defect:.3e})")


class MassProfileError(BWAError, ValueError):
    def __init__(self, prop: str, defect: float):
        self.property, self.defect = prop, defect
        super().__init__(f"mass profile fails '{prop}' (defect {defect:.3e})")
