"""
Irreducibility checks on the support graph
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from chains.kernel import FiniteKernel


@dataclass
class RupiReport:
    irreducible: bool
    witness: Optional[Tuple[int, int]] = None
    closed_class: List[int] = field(default_factory=list)

    def __bool__(self):
        return self.irreducible


def _graph(T: FiniteKernel, tol: float):
    keep = T.support
    sub = T.matrix[np.ix_(keep, keep)]
    return csr_matrix(sub > tol), keep


def rupi_check(T: FiniteKernel, tol: float = 1e-14) -> RupiReport:
    """
    True iff all positive-mass states communicate (reachability through any
    number of steps). On failure the witness is a pair (x, y) with y not
    reachable from x, and `closed_class` a closed communicating class not
    containing every state.
    """
    graph, keep = _graph(T, tol)
    n_comp, labels = connected_components(graph, directed=True, connection="strong")
    if n_comp == 1:
        return RupiReport(True)
    # a strongly connected component with no edge leaving it is closed
    rows, cols = graph.nonzero()
    leaving = np.zeros(n_comp, dtype=bool)
    leaving[labels[rows][labels[rows] != labels[cols]]] = True
    closed = int(np.flatnonzero(~leaving)[0])
    inside = np.flatnonzero(labels == closed)
    outside = np.flatnonzero(labels != closed)
    x, y = int(keep[inside[0]]), int(keep[outside[0]])
    return RupiReport(False, witness=(x, y), closed_class=[int(keep[i]) for i in inside])


def zero_energy_witness(T: FiniteKernel, tol: float = 1e-14) -> Optional[np.ndarray]:
    """f = 1_A - mu(A) for a closed class A, so E(T, f) = 0; None when T is irreducible"""
    report = rupi_check(T, tol)
    if report.irreducible:
        return None
    f = np.zeros(T.n)
    f[report.closed_class] = 1.0
    return f - T.mu @ f
