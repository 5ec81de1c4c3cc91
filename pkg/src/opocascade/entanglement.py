"""PPT entanglement tests over bipartitions and reduced subsystems."""

from dataclasses import asdict, dataclass, field
from itertools import combinations
import re

import numpy as np

from .covariance import partial_transpose, reduce
from .errors import InvalidEigenvalue, InvalidPartition, LabelError, NotPhysical
from .linalg import PHYSICAL_TOL, symplectic_spectrum

ENTANGLEMENT_TOL = 1e-6
PURITY_TOL = 1e-3

_TWIN_LABEL = re.compile(r"^([12])_([A-Z]+)$")


@dataclass(frozen=True)
class Bipartition:
    """Split of the modes into ``side_a | side_b``, stored canonically.

    ``side_a`` is the smaller side; on a tie it is the side holding the
    earliest mode. Both sides keep the covariance's mode order.
    """

    side_a: tuple
    side_b: tuple

    @classmethod
    def of(cls, modes, side):
        modes = tuple(str(m) for m in modes)
        chosen = {str(m) for m in side}
        if not chosen <= set(modes):
            raise LabelError(f"unknown modes {sorted(chosen - set(modes))}")
        if not chosen or len(chosen) == len(modes):
            raise InvalidPartition("a bipartition needs two non-empty sides")
        a = tuple(m for m in modes if m in chosen)
        b = tuple(m for m in modes if m not in chosen)
        if len(b) < len(a) or (len(a) == len(b) and modes.index(b[0]) < modes.index(a[0])):
            a, b = b, a
        return cls(a, b)

    def __str__(self):
        return "{" + ",".join(self.side_a) + "}|{" + ",".join(self.side_b) + "}"


def enumerate_bipartitions(modes):
    """All ``2**(N-1) - 1`` bipartitions, by size of the smaller side."""
    modes = tuple(str(m) for m in modes)
    n = len(modes)
    if n < 2:
        raise InvalidPartition("need at least two modes")
    seen, out = set(), []
    for size in range(1, n // 2 + 1):
        for side in combinations(modes, size):
            bp = Bipartition.of(modes, side)
            if bp not in seen:
                seen.add(bp)
                out.append(bp)
    return out


def pt_spectrum(V, transposed):
    return symplectic_spectrum(partial_transpose(V, transposed))


def pt_min_eigenvalue(V, part):
    """Smallest symplectic eigenvalue after transposing one side of ``part``."""
    side = part.side_a if isinstance(part, Bipartition) else part
    return float(pt_spectrum(V, side)[0])


def reduced_pt_min_eigenvalue(V, kept, transposed):
    return pt_min_eigenvalue(reduce(V, kept), transposed)


def log_negativity(nu_min):
    """Logarithmic negativity in ebits, ``max(0, -log2 nu_min)``."""
    if not nu_min > 0.0:
        raise InvalidEigenvalue(f"symplectic eigenvalue {nu_min!r} must be > 0")
    return max(0.0, -float(np.log2(nu_min)))


def twin_groups(modes):
    """Map OPO letter -> (twin 1, twin 2) for chain-style labels like ``1_A``."""
    groups = {}
    for m in modes:
        match = _TWIN_LABEL.match(m)
        if match:
            groups.setdefault(match.group(2), {})[match.group(1)] = m
    return {k: (v["1"], v["2"]) for k, v in groups.items() if len(v) == 2}


def _compact(label):
    return label.replace("_", "")


def named_subsystems(modes):
    """Default reduced subsystems as ``(key, kept, transposed)`` triples.

    Three-mode states get every pair (transposing the pump when present);
    chains get each neighbouring pair of twin pairs (transposing the first)
    and each twin pair with the final pump (transposing the pump).
    """
    modes = tuple(modes)
    groups = twin_groups(modes)
    out = []
    if len(modes) == 3:
        for a, b in combinations(modes, 2):
            pair = sorted((a, b), key=lambda m: (m != "0", modes.index(m)))
            t = pair[0] if "0" in pair else a
            kept = tuple(m for m in modes if m in (a, b))
            out.append((f"nu_{''.join(_compact(m) for m in pair)}_pt{_compact(t)}", kept, (t,)))
        return out
    letters = list(groups)
    if not letters:
        return out
    for x, y in zip(letters, letters[1:]):
        kept = tuple(m for m in modes if m in groups[x] + groups[y])
        out.append((f"nu_{x}{y}_pt{x}", kept, groups[x]))
    if "0" in modes:
        for x in letters:
            kept = tuple(m for m in modes if m in groups[x] + ("0",))
            out.append((f"nu_{x}0_pt0", kept, ("0",)))
    return out


def quantity_specs(modes):
    """Summary eigenvalues reported per scan point, as ``(key, kept, transposed)``.

    Keys: ``nu_<mode>`` for each single-mode transposition (pump first),
    ``nu_<X>`` for transposing twin pair ``X`` of a chain with two or more
    OPOs, then the reduced subsystems of :func:`named_subsystems`.
    """
    modes = tuple(modes)
    out = []
    for m in sorted(modes, key=lambda m: (m != "0", modes.index(m))):
        out.append((f"nu_{_compact(m)}", modes, (m,)))
    groups = twin_groups(modes)
    if len(groups) >= 2:
        for x, pair in groups.items():
            out.append((f"nu_{x}", modes, pair))
    out.extend(named_subsystems(modes))
    return out


def named_quantities(V):
    return {
        key: reduced_pt_min_eigenvalue(V, kept, transposed)
        for key, kept, transposed in quantity_specs(V.modes)
    }


@dataclass(frozen=True)
class PartitionRecord:
    partition: Bipartition
    nu_min: float
    log_negativity: float
    entangled: bool
    n_below_one: int

    def to_dict(self):
        return {
            "side_a": list(self.partition.side_a),
            "side_b": list(self.partition.side_b),
            "nu_min": self.nu_min,
            "log_negativity": self.log_negativity,
            "entangled": self.entangled,
            "n_below_one": self.n_below_one,
        }


@dataclass(frozen=True)
class ReducedRecord:
    key: str
    subsystem: tuple
    transposed: tuple
    nu_min: float
    log_negativity: float
    entangled: bool

    def to_dict(self):
        d = asdict(self)
        d["subsystem"] = list(self.subsystem)
        d["transposed"] = list(self.transposed)
        return d


@dataclass(frozen=True)
class EntanglementReport:
    modes: tuple
    spectrum: tuple
    physical: bool
    pure: bool
    purity_deviation: float
    partitions: tuple
    reduced: tuple
    tolerance: float
    fully_inseparable: bool = field(init=False)
    genuine_multipartite: bool = field(init=False)

    def __post_init__(self):
        full = bool(self.partitions) and all(r.entangled for r in self.partitions)
        object.__setattr__(self, "fully_inseparable", full)
        object.__setattr__(self, "genuine_multipartite", full and self.pure)

    @property
    def verdict(self):
        if self.genuine_multipartite:
            return "genuine multipartite entanglement"
        if self.fully_inseparable:
            return "fully inseparable"
        if any(r.entangled for r in self.partitions):
            return "partially entangled"
        return "separable at tolerance"

    def partition(self, side):
        """Record for the bipartition with ``side`` on either side."""
        bp = Bipartition.of(self.modes, side)
        for r in self.partitions:
            if r.partition == bp:
                return r
        raise KeyError(str(bp))

    def reduced_record(self, key):
        for r in self.reduced:
            if r.key == key:
                return r
        raise KeyError(key)

    def to_dict(self):
        return {
            "modes": list(self.modes),
            "symplectic_spectrum": list(self.spectrum),
            "physical": self.physical,
            "pure": self.pure,
            "purity_deviation": self.purity_deviation,
            "tolerance": self.tolerance,
            "fully_inseparable": self.fully_inseparable,
            "genuine_multipartite": self.genuine_multipartite,
            "verdict": self.verdict,
            "partitions": [r.to_dict() for r in self.partitions],
            "reduced": [r.to_dict() for r in self.reduced],
        }


def _reduced_key(kept, transposed):
    return f"nu_{''.join(_compact(m) for m in kept)}_pt{''.join(_compact(m) for m in transposed)}"


def certify(V, tol=ENTANGLEMENT_TOL, purity_tol=PURITY_TOL, extra_subsystems=()):
    """PPT analysis of every bipartition plus the named reduced subsystems.

    The state counts as pure when it comes from a lossless construction
    (``V.pure is True``); without provenance the symplectic spectrum must lie
    within ``purity_tol`` of one. ``extra_subsystems`` adds
    ``(kept, transposed)`` pairs to the reduced table. Raises NotPhysical
    when ``V`` violates the uncertainty relation, since a PPT verdict on such
    a matrix means nothing.
    """
    spectrum = symplectic_spectrum(V)
    deviation = float(np.abs(spectrum - 1.0).max())
    physical = bool(spectrum[0] >= 1.0 - PHYSICAL_TOL)
    if not physical:
        raise NotPhysical(f"smallest symplectic eigenvalue {spectrum[0]:.6g} < 1")
    if V.pure is None:
        pure = physical and deviation <= purity_tol
    else:
        pure = bool(V.pure) and physical

    records = []
    for bp in enumerate_bipartitions(V.modes):
        nus = pt_spectrum(V, bp.side_a)
        nu = float(nus[0])
        records.append(
            PartitionRecord(
                bp, nu, log_negativity(nu), nu < 1.0 - tol, int(np.sum(nus < 1.0 - tol))
            )
        )

    wanted = list(named_subsystems(V.modes))
    for kept, transposed in extra_subsystems:
        kept = tuple(m for m in V.modes if m in {str(k) for k in kept})
        transposed = tuple(str(t) for t in transposed)
        wanted.append((_reduced_key(kept, transposed), kept, transposed))
    reduced = []
    for key, kept, transposed in wanted:
        nu = reduced_pt_min_eigenvalue(V, kept, transposed)
        reduced.append(ReducedRecord(key, tuple(kept), tuple(transposed), nu, log_negativity(nu), nu < 1.0 - tol))

    return EntanglementReport(
        modes=V.modes,
        spectrum=tuple(float(x) for x in spectrum),
        physical=physical,
        pure=pure,
        purity_deviation=deviation,
        partitions=tuple(records),
        reduced=tuple(reduced),
        tolerance=tol,
    )
