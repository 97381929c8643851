"""Error types shared across the package.

Every exception carries a short machine-readable ``code`` so the CLI and
tests can dispatch on the failure kind without parsing messages.
"""


class KickedRotorError(Exception):
    """Base class for all domain errors."""

    code = "KICKED_ROTOR_ERROR"


class ResonanceMismatchError(KickedRotorError):
    """``ell`` is set but ``kbar`` is not 2*pi*ell."""

    code = "RESONANCE_MISMATCH"


class LadderTooSmallError(KickedRotorError):
    """Momentum ladder too short for the requested kick budget."""

    code = "LADDER_TOO_SMALL"


class NotRationalError(KickedRotorError):
    """Kick period is not a rational multiple of the Talbot time."""

    code = "NOT_RATIONAL"


class OutOfLadderError(KickedRotorError):
    """Requested momentum rung falls outside the ladder."""

    code = "OUT_OF_LADDER"


class LadderLeakError(KickedRotorError):
    """A kick pushed more norm past the ladder edge than tolerated."""

    code = "LADDER_LEAK"


class NotResonantError(KickedRotorError):
    """Operation requires the resonance condition kbar = 2*pi*ell."""

    code = "NOT_RESONANT"


class WindowTooSmallError(KickedRotorError):
    """Fit window holds fewer points than a meaningful fit needs."""

    code = "WINDOW_TOO_SMALL"


class OutOfLobeError(KickedRotorError):
    """Central-lobe filter approximation evaluated outside its validity."""

    code = "OUT_OF_LOBE"


class SeriesTooShortError(KickedRotorError):
    """Observable series too short for the requested inversion."""

    code = "SERIES_TOO_SHORT"


class ConfigError(KickedRotorError):
    """Experiment configuration is malformed or incomplete."""

    code = "CONFIG"


class AntiResonantTransportWarning(UserWarning):
    """Directed-transport formula evaluated at odd resonance order.

    At kbar = 2*pi*ell with ell odd each slice of the distribution receives
    from kick t a momentum opposite to the one received at kick t-1, so no
    net current builds up; the closed-form current is informational only.
    """

    code = "ANTIRESONANT_NO_TRANSPORT"
