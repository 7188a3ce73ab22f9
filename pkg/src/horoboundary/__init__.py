"""Horofunction boundaries, hyperbolicity estimates and dynamics of non-expanding maps."""
from .errors import (CapabilityError, ConvergenceError, DomainError, GeometryError,
                     InconclusiveError, MapValidationError, PreconditionError, SamplingError,
                     SolverError, UnreachableError)
from .spaces import (ComplexBall, FiniteGraph, KleinEllipsoid, Ladder, PoincareDisc,
                     RightHalfPlane, distance, geodesic_between, geodesic_ray_to, load_space)
from .hyperbolicity import (asymptotic, delta_estimate, extract_shifts, goes_to_infinity,
                            gromov_product, interpolate_discrete, is_quasigeodesic,
                            strong_asymptoticity_gap)
from .horofunctions import (HoroballSpec, big_small_gap, boundary_atlas, busemann,
                            busemann_handle, horoball_membership, horofunction_along,
                            ladder_horofunction, weakJ_check)
from .maps import load_map, validate_nonexpanding
from .dynamics import (GeodesicRegion, backward_orbit, brfp_check, denjoy_wolff, dilation,
                       divergence_rate, forward_step, geodesic_limit, iterate, julia_check,
                       king_inequality_check, minimal_displacement, orbit_quasigeodesic_check,
                       region_busemann_divergence, region_membership)
from .report import Report, emit_report

__all__ = [name for name in dir() if not name.startswith("_")]
