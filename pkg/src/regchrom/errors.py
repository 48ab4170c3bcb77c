"""Error types shared across the package.

Two families matter to callers: invalid inputs (divisibility, parity,
domain violations) and guard refusals (a request that is valid but too
large for the exact desk-scale algorithms). The CLI maps them to exit
codes 2 and 3 respectively.
"""


class RegchromError(Exception):
    """Base class; carries a short machine-readable code."""

    code = "error"


class InputError(RegchromError, ValueError):
    """Invalid parameters: parity, divisibility, or domain violations."""

    code = "invalid-input"


class GuardError(RegchromError, ValueError):
    """Request exceeds a desk-scale guard; the message names the bound."""

    code = "guard-refused"
