"""Cell structures, complexity filtration and Vassiliev theory for plumbers' knots."""
from .combinatorics import (AdmissibleSet, CellName, DecoratedTransposition, SingularityPartition,
                            TriplePerm, canonicalize, coarsenings, is_admissible, osp_table,
                            refinement_cofaces, tau_of)
from .complex import (BlowupCellName, Chain, CellComplex, boundary, build_blowup, build_complex,
                      project)
from .errors import (CapacityError, CycleCheckError, DomainError, InvariantError,
                     NonGenericProjection, PlumbKnotError)
from .filtration import (complexity, complexity_table, filtration_level, is_simple,
                         isotopy_classes, knot_components)
from .geometry import (PlumbersCurve, cell_of, gauss_diagram, is_knot, pipes_of, representative,
                       singularity_report)
from .homology import homology_ranks, reindex_cohomological, spectral_sequence
from .invariants import check_invariance, evaluate, get_invariant
from .vassiliev import (chord_diagram_of, class_coboundary, minimal_cycle, taylor_series,
                        total_coboundary, vassiliev_derivative)

__version__ = "0.1.0"
