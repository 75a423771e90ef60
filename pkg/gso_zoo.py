"""Baseline graph shift operators: Laplacian (gft), extended Laplacian (df1/df2),
shortest-path (sp2/sp3), Markov (mrk) and the unified extended matrix (uem)."""
import itertools
import logging

import numpy as np
from scipy.sparse.csgraph import shortest_path

from config import GSO_KINDS
from diffusion import extended_adjacency
from graph_core import consensus_matrix, laplacian
from models import GsoSpec, UnknownGsoKindError
from spectral import decompose
from uem import build_uem

logger = logging.getLogger(__name__)

KINDS = ("laplacian", "extended_laplacian", "shortest_path", "markov", "uem")


def shortest_path_gso(g, max_hops):
    """Entry 1/d(i, j) for hop distance 1 <= d <= max_hops, else 0; zero diagonal."""
    hops = shortest_path((g.adjacency > 0).astype(float), method="D", directed=False, unweighted=True)
    within = (hops >= 1) & (hops <= max_hops)
    gso = np.zeros_like(hops)
    gso[within] = 1.0 / hops[within]
    return gso


def build_gso(g, spec, consensus=None, extended=None):
    """Materialize the GSO described by `spec` on graph `g`.

    `consensus` and `extended` let a caller reuse matrices already built for this graph.
    """
    if spec.kind not in KINDS:
        raise UnknownGsoKindError(f"Unknown GSO kind: '{spec.kind}'. Expected one of {', '.join(KINDS)}.")
    if spec.kind == "laplacian":
        return laplacian(g)
    if spec.kind == "shortest_path":
        return shortest_path_gso(g, spec.max_hops)

    b = consensus if consensus is not None else consensus_matrix(g)
    if spec.kind == "markov":
        return b.entries
    ext = extended if extended is not None else extended_adjacency(b, spec.t, spec.rho)
    if spec.kind == "extended_laplacian":
        return ext.l_bar
    return build_uem(ext, spec.m, spec.n).entries


def baseline_spec(label, rho=None, m=None, n=None, t=None):
    """GsoSpec for a stable method label (gft, df1, df2, sp2, sp3, mrk, uem)."""
    if label == "gft":
        return GsoSpec(kind="laplacian")
    if label == "mrk":
        return GsoSpec(kind="markov")
    if label in ("sp2", "sp3"):
        return GsoSpec(kind="shortest_path", max_hops=int(label[2]))
    if label in ("df1", "df2"):
        return GsoSpec(kind="extended_laplacian", t=int(label[2]), rho=rho)
    if label == "uem":
        return GsoSpec(kind="uem", t=t, rho=rho, m=m, n=n)
    raise UnknownGsoKindError(f"Unknown GSO kind: '{label}'. Expected one of {', '.join(GSO_KINDS)}.")


def structure_grid(label, rhos, ms=(), ns=(), ts=()):
    """Structural hyperparameter points for a method, in lattice order (rho, m, n, t)."""
    if label in ("gft", "mrk", "sp2", "sp3"):
        return [{}]
    if label in ("df1", "df2"):
        return [{"rho": rho} for rho in rhos]
    if label == "uem":
        return [
            {"rho": rho, "m": m, "n": n, "t": t}
            for rho, m, n, t in itertools.product(rhos, ms, ns, ts)
        ]
    raise UnknownGsoKindError(f"Unknown GSO kind: '{label}'. Expected one of {', '.join(GSO_KINDS)}.")


def basis_factory(g, label):
    """Callable mapping a structure point to the SpectralBasis of that GSO on `g`.

    The consensus matrix is built once; extended matrices are reused per (t, rho).
    """
    b = consensus_matrix(g)
    extended = {}

    def factory(point):
        spec = baseline_spec(label, **point)
        ext = None
        if spec.kind in ("extended_laplacian", "uem"):
            key = (spec.t, spec.rho)
            if key not in extended:
                extended[key] = extended_adjacency(b, spec.t, spec.rho)
            ext = extended[key]
        gso = build_gso(g, spec, consensus=b, extended=ext)
        return decompose(gso, source=describe(label, point))

    return factory


def describe(label, point):
    if not point:
        return label
    params = ",".join(f"{key}={value}" for key, value in point.items())
    return f"{label}({params})"
