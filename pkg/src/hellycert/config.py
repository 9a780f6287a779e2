"""Numeric tolerances and size caps, centralized.

Every comparison threshold in the library reads from a single Tolerances
record so that producer and checker can be rescaled together (the checker
defaults to 10x looser than the producer).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

VERSION = "0.1.0"

# Hard size caps. Combinatorial primitives are exponential in the dimension;
# the library is meant for desk-scale certified runs, not bulk computation.
DIM_CAP = 8
FACET_CAP = 64


@dataclass(frozen=True)
class Tolerances:
    incidence: float = 1e-9        # vertex-on-facet slack in enumeration/volume
    dedupe: float = 1e-9           # two points closer than this are one point
    spd_floor: float = 1e-12       # smallest admissible ellipsoid eigenvalue
    unit_norm: float = 1e-12       # half-space normal normalization slack
    feasibility: float = 1e-8      # membership / containment re-checks
    contact: float = 1e-7          # near-tangency admission for contact points
    decomposition: float = 1e-6    # identity / barycenter residual cap
    solver_gap: float = 1e-9       # barrier duality-gap target (log-volume)
    newton_cap: int = 500          # total damped-Newton step budget
    lp_pivot: float = 1e-9         # simplex pivot / reduced-cost threshold
    degenerate_ray: float = 1e-10  # |u| below which the ray direction is moot
    checker_scale: float = 10.0    # verification tolerance = producer x this

    def scaled(self, factor: float) -> "Tolerances":
        """Return a copy with every float tolerance multiplied by factor."""
        if factor <= 0:
            raise ValueError("tolerance scale must be positive")
        return replace(
            self,
            incidence=self.incidence * factor,
            dedupe=self.dedupe * factor,
            spd_floor=self.spd_floor * factor,
            unit_norm=self.unit_norm * factor,
            feasibility=self.feasibility * factor,
            contact=self.contact * factor,
            decomposition=self.decomposition * factor,
            solver_gap=self.solver_gap * factor,
            lp_pivot=self.lp_pivot * factor,
            degenerate_ray=self.degenerate_ray * factor,
        )


DEFAULT = Tolerances()
