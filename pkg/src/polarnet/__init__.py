"""Multipolar polarization metrics on attributed networks."""

__version__ = "0.1.0"

from .graph import (Graph, LaplacianKernel, build_graph, ged, is_connected,  # noqa: E402
                    laplacian, laplacian_pseudoinverse)
from .metrics import (MdsConfig, PolarizationEstimate, adm, apd, mds_embed,  # noqa: E402
                      mds_polarization, pc, tv)
from .opinions import CommunityAssignment, OpinionMatrix  # noqa: E402

__all__ = [
    "Graph", "LaplacianKernel", "build_graph", "ged", "is_connected", "laplacian",
    "laplacian_pseudoinverse", "MdsConfig", "PolarizationEstimate", "adm", "apd",
    "mds_embed", "mds_polarization", "pc", "tv", "CommunityAssignment", "OpinionMatrix",
]
