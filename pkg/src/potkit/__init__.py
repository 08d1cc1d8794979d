"""potkit: potential theory on multiply connected planar domains.

Two layers solve the same problems and check each other: a numerical
Szego-kernel pipeline (Kerzman-Stein equation, Dirichlet solver, Green's
function, Poisson kernel, measures) valid on any smooth domain, and an exact
rational pipeline (Schwarz functions, pole subtraction, residue integration,
closed-form boundary operators) on quadrature-domain models of the disc.
"""

__version__ = "0.1.0"
