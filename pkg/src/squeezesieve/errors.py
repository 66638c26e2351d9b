"""Exception types raised by the physics layer.

Every class derives from :class:`PhysicsError`, which the CLI maps to exit
code 3.
"""


class PhysicsError(ValueError):
    """Base class for unphysical or out-of-domain inputs."""


class NotPositive(PhysicsError):
    pass


class HeisenbergViolation(PhysicsError):
    pass


class InvalidShape(PhysicsError):
    pass


class InvalidArea(PhysicsError):
    pass


class NonDissipative(PhysicsError):
    pass


class PositivityViolation(PhysicsError):
    """Diffusion matrix fails d_pp*d_qq - d_pq**2 >= (lambda*hbar/2)**2."""


class NegativeTime(PhysicsError):
    pass
