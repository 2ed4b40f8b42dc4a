"""Exact homomorphism densities, stepping operators and refutation criteria
for the step Sidorenko property."""

__version__ = "0.1.0"

from .errors import ConstraintError, ResourceLimitError, StepcheckError
from .graphs import (BIPARTITE, TRANSITIVE, DistinguishedVertices, Graph, WeightedGraph, blow_up, c4_plus,
                     cartesian, complete_bipartite, cycle, generate, hypercube, path, torus)
from .homs import (ConstraintSet, Cover, brute_force_hom_sum, find_hom, iter_homs, search_hom_sum,
                   weighted_hom_sum)
from .graphon import Coarsening, StepGraphon, density, from_weighted_graph, step
from .criteria import (ORDERED, PAIRS, CriterionMatrix, degree_matrix, lemma5_check, psd_witness, thm1_matrix,
                       thm2_matrix)
from .gadgets import build_cor4_gadget, build_lemma5_gadget, build_thm1_perturbation, build_thm2_perturbation
from .certify import (CertificateFormatError, Inconclusive, RefutationCertificate, alpha_search, refute,
                      verify)
