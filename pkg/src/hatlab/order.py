"""Maximal indicator and order of curvature.

For a strictly decreasing angle sequence (a_n) the maximal indicator of K is
built greedily: its first element is the least i for which some hat of
radius 1/i and angle a_i sits on K, and every further element is the least
j above the previous one for which a single tip and axis carry the hats of
all chosen indices and j at once. The order of curvature is its size.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError
from .hat import CapSpec, find_hat, has_hat, joint_deficit
from .indicator import indicator_sum

SEQUENCES = {
    "harmonic2": ("1/(n+2)", lambda n: 1.0 / (n + 2)),
    "geometric": ("0.45*0.8^(n-1)", lambda n: 0.45 * 0.8 ** (n - 1)),
}


class AngleSequence:
    """Strictly decreasing angles a_1 > a_2 > ... inside (0, 1/2)."""

    def __init__(self, fn, name="custom"):
        self.fn = fn
        self.name = name

    @classmethod
    def named(cls, name="harmonic2"):
        if name not in SEQUENCES:
            raise InvalidInputError(f"unknown angle sequence {name!r}; choose from {sorted(SEQUENCES)}")
        return cls(SEQUENCES[name][1], name)

    def __call__(self, n):
        if n < 1:
            raise InvalidInputError("sequence indices start at 1")
        return float(self.fn(n))

    def validate(self, upto):
        vals = [self(n) for n in range(1, upto + 1)]
        if any(not 0 < v < 0.5 for v in vals):
            raise InvalidInputError("angle sequence must stay inside (0, 1/2)")
        if any(a <= b for a, b in zip(vals, vals[1:])):
            raise InvalidInputError("angle sequence must be strictly decreasing")
        return vals

    def specs(self, indices):
        """Hat parameters (1/i, a_i) for the given indices."""
        return [(1.0 / i, self(i)) for i in indices]


@dataclass(frozen=True)
class IndexSet:
    elements: tuple = ()

    def __post_init__(self):
        el = tuple(int(i) for i in self.elements)
        if any(i < 1 for i in el) or any(a >= b for a, b in zip(el, el[1:])):
            raise InvalidInputError("an index set is a strictly increasing list of naturals")
        object.__setattr__(self, "elements", el)

    def __call__(self, n):
        """n-th element (1-based), infinity when the set is shorter."""
        return self.elements[n - 1] if 1 <= n <= len(self.elements) else math.inf

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def issubset(self, other):
        return set(self.elements) <= set(other.elements)


def compare_index_sets(I, J):
    """-1 if I precedes J, 0 if equal, 1 if J precedes I.

    I precedes J when they agree below some position and I is smaller
    there, with missing elements counting as infinity.
    """
    I, J = IndexSet(tuple(I)), IndexSet(tuple(J))
    for n in range(1, max(len(I), len(J)) + 2):
        a, b = I(n), J(n)
        if a != b:
            return -1 if a < b else 1
        if a == math.inf:
            return 0
    return 0


@dataclass(frozen=True)
class OrderResult:
    index_set: IndexSet
    horizon: int
    eta: float
    n_dirs: int
    sequence: str
    certificates: tuple = field(repr=False)

    @property
    def order(self):
        return len(self.index_set)

    @property
    def verdict(self):
        """'exact' when the horizon itself was tested and failed, otherwise a lower bound."""
        if self.horizon in self.index_set.elements:
            return f">= {self.order} at horizon {self.horizon}"
        return "exact"

    @property
    def is_lower_bound(self):
        return self.horizon in self.index_set.elements

    def to_dict(self):
        return {
            "index_set": list(self.index_set),
            "order": self.order,
            "verdict": self.verdict,
            "horizon": self.horizon,
            "eta": self.eta,
            "n_dirs": self.n_dirs,
            "sequence": self.sequence,
            "certificates": [
                {"prefix": m + 1, "tip": np.asarray(x).tolist(), "axis": np.asarray(u).tolist()}
                for m, (x, u) in enumerate(self.certificates)
            ],
        }


def maximal_indicator(K, seq=None, i_max=64, eta=None, n_dirs=None):
    """Greedy maximal indicator up to the horizon i_max, with certificates.

    Joint feasibility is re-searched from scratch for every candidate j, so
    the tip and axis of the final certificate may differ from earlier ones.
    """
    if i_max < 1:
        raise InvalidInputError("horizon must be at least 1")
    seq = seq or AngleSequence.named()
    seq.validate(i_max)
    if eta is None:
        eta = 1e-6 * K.diameter()
    chosen, certs = [], []
    for j in range(1, i_max + 1):
        found = find_hat(K, seq.specs(chosen + [j]), eta=eta, n_dirs=n_dirs)
        if found is not None:
            chosen.append(j)
            certs.append((found.tip, found.axis))
    n_used = n_dirs or (720 if K.dim == 2 else 4096)
    return OrderResult(IndexSet(tuple(chosen)), i_max, eta, n_used, seq.name, tuple(certs))


def order_of_curvature(K, seq=None, i_max=64, eta=None, n_dirs=None):
    return maximal_indicator(K, seq, i_max, eta, n_dirs)


def verify_certificates(K, result, seq=None, tol=None):
    """Re-check each certificate against its full cap family with has_hat."""
    seq = seq or AngleSequence.named(result.sequence)
    tol = result.eta / 10 if tol is None else tol
    out = []
    for m, (x, u) in enumerate(result.certificates):
        idx = result.index_set.elements[: m + 1]
        out.append(all(has_hat(K, CapSpec(x, u, e, d), tol=tol, check_tip=False) for e, d in seq.specs(idx)))
    return out


def infinite_curvature_witness(K, result, m_max=None, seq=None):
    """Direction whose touching point carries the deepest certified hats.

    Among the certificate axes, picks the one minimizing the largest prefix
    indicator sum (the finite stand-in for intersecting the closed zero
    sets of the indicators); the curvature there is at least the last index.
    """
    if not result.certificates:
        raise InvalidInputError("no certificates to build a witness from")
    seq = seq or AngleSequence.named(result.sequence)
    m_max = min(m_max or len(result.certificates), len(result.certificates))
    idx = result.index_set.elements[:m_max]
    best = None
    for x, u in result.certificates:
        u = np.asarray(u, dtype=float)
        if K.strictly_convex:
            # nonnegative terms: the largest prefix sum is the full one
            score = indicator_sum(K, -u, seq.specs(idx))
        else:
            score = max(0.0, float(joint_deficit(K, x[None, :], u[None, :], seq.specs(idx), K.extreme_points()[0])[0]))
        # ties go to the deepest certificate, whose hats are the most restrictive
        if best is None or score <= best[0]:
            best = (score, x, u)
    score, x, u = best
    return {
        "tau": (-u).tolist(),
        "axis": u.tolist(),
        "point": np.asarray(x).tolist(),
        "prefix_indicator": score,
        "depth": m_max,
        "kappa_lower_bound": float(idx[-1]),
    }
