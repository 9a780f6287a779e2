"""Exception taxonomy.

Geometric impossibilities (empty, unbounded, flat) and numeric failures are
distinct conditions and get distinct types; LP infeasibility/unboundedness
when probing a polytope is an answer, not an error, and lives in lp.LPStatus.
"""

from __future__ import annotations


class HellyError(Exception):
    """Base class for every library-raised error."""


class CapExceeded(HellyError):
    """Instance exceeds the dimension or facet cap."""


class ZeroNormal(HellyError):
    """Half-space normal has (near-)zero length."""


class ZeroPoint(HellyError):
    """Polar of a point set containing (near-)zero, which is unbounded."""


class Empty(HellyError):
    """The intersection is empty."""


class Unbounded(HellyError):
    """The intersection is unbounded in some direction."""


class Degenerate(HellyError):
    """The body is not full-dimensional (no interior ball of radius 1e-10)."""


class DegenerateSimplex(HellyError):
    """Simplex vertices are affinely dependent."""


class NotCentered(HellyError):
    """Operation requires a body centered at the origin."""


class NoConvergence(HellyError):
    """Iterative solver ran out of its step budget."""


class TooFewContacts(HellyError):
    """Fewer than d+1 near-tangent half-spaces after normalization."""


class NoDecomposition(HellyError):
    """Nonnegative weight recovery left a residual above tolerance."""


class NumericalBreakdown(HellyError):
    """An inequality the construction guarantees failed numerically."""


class ReductionFailed(HellyError):
    """Affine-dependence search found no usable null direction."""


class Misaligned(HellyError):
    """Contraction endpoints are not antipodal through the origin."""


class SubfamilyTooLarge(HellyError):
    """Selected subfamily exceeds the 2d size guarantee."""


class GenerationFailed(HellyError):
    """Random instance/decomposition generator hit its retry cap."""


class MalformedDocument(HellyError):
    """Input file does not match the expected schema."""


class MalformedCertificate(MalformedDocument):
    """Certificate document is missing fields or structurally invalid."""


class PipelineError(HellyError):
    """Wraps an upstream error with the pipeline stage it occurred in."""

    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")
