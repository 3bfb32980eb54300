"""Discrete gauge-field toolkit: su(n)-valued forms on flat tori and
cylinders, Chern-Simons type functionals, presymplectic 2-forms on spaces of
connections, covariant elliptic solvers and a verification harness."""
from .forms import (FormField, codifferential, constant_form, exterior_d, hodge_star,
                    integrate_trace, l2_inner, sample, wedge, zeros)
from .functionals import (NORM, NotFlatError, chern_simons3, map_degree, second_chern,
                          sector_charge)
from .gauge import (GaugeMap, covariant_codifferential, covariant_d, curvature,
                    gauge_transform, pure_gauge)
from .mesh import Mesh, slab_reduce

__version__ = "0.1.0"

__all__ = [
    "FormField", "GaugeMap", "Mesh", "NORM", "NotFlatError", "chern_simons3", "codifferential",
    "constant_form", "covariant_codifferential", "covariant_d", "curvature", "exterior_d",
    "gauge_transform", "hodge_star", "integrate_trace", "l2_inner", "map_degree",
    "pure_gauge", "sample", "second_chern", "sector_charge", "slab_reduce", "wedge", "zeros",
]
