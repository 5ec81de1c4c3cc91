"""Spectral covariance matrices of single and cascaded OPOs.

Each OPO contributes two twin modes; the pump reflected by OPO ``k`` is the
pump input of OPO ``k+1`` and the pump leaving the last OPO is mode ``0``.
Covariances are the symmetrized real matrices ``Re(C C^dagger)`` of the
transfer coefficients ``C`` from independent unit-variance vacuum inputs.
"""

from dataclasses import dataclass, field
import string

import numpy as np

from .errors import (
    DerivedSigmaOutOfRange,
    InvalidLoss,
    InvalidPartition,
    LabelError,
    NotPositiveDefinite,
    ValidationError,
)
from .linalg import as_symmetric
from .opo import OpoParams, TransferMap, build_transfer_map, classical_steady_state

_SQRT_HALF = np.sqrt(0.5)

# (p+, q+, p0out, q0out, p-, q-) -> (p1, q1, p2, q2, p0, q0)
TWIN_ROTATION = np.array(
    [
        [_SQRT_HALF, 0, 0, 0, _SQRT_HALF, 0],
        [0, _SQRT_HALF, 0, 0, 0, _SQRT_HALF],
        [_SQRT_HALF, 0, 0, 0, -_SQRT_HALF, 0],
        [0, _SQRT_HALF, 0, 0, 0, -_SQRT_HALF],
        [0, 0, 1, 0, 0, 0],
        [0, 0, 0, 1, 0, 0],
    ]
)
TWIN_ROTATION.setflags(write=False)


def opo_letter(k):
    """Letter naming the ``k``-th OPO (0-based): A, B, C, ..."""
    if k < 26:
        return string.ascii_uppercase[k]
    return string.ascii_uppercase[k // 26 - 1] + string.ascii_uppercase[k % 26]


def chain_modes(n_opos):
    """Mode labels of a cascade: ``1_A, 2_A, 1_B, ..., 0`` (``1, 2, 0`` for one OPO)."""
    if n_opos == 1:
        return ("1", "2", "0")
    modes = []
    for k in range(n_opos):
        modes += [f"1_{opo_letter(k)}", f"2_{opo_letter(k)}"]
    return tuple(modes) + ("0",)


@dataclass(frozen=True)
class CovMatrix:
    """Covariance matrix with one ``(p, q)`` pair of rows per labelled mode.

    ``pure`` records provenance: True for a unitary (lossless) construction,
    False once vacuum has been mixed in, None when unknown (e.g. loaded from
    a file or a reduced/transposed matrix). ``factor`` optionally holds a
    real ``G`` with ``data = G G^T``, which spectra use for accuracy.
    """

    modes: tuple
    data: np.ndarray
    pure: object = None
    factor: np.ndarray = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        modes = tuple(str(m) for m in self.modes)
        if len(set(modes)) != len(modes):
            raise LabelError(f"duplicate mode labels in {modes}")
        data = as_symmetric(self.data)
        if data.shape[0] != 2 * len(modes):
            raise ValidationError(
                f"{len(modes)} modes need a {2 * len(modes)}-dim matrix, got {data.shape[0]}"
            )
        if np.any(np.diag(data) <= 0.0):
            raise NotPositiveDefinite("covariance has a non-positive diagonal entry")
        if np.linalg.eigvalsh(data)[0] <= 0.0:
            raise NotPositiveDefinite("covariance is not positive definite")
        object.__setattr__(self, "modes", modes)
        object.__setattr__(self, "data", data)
        if self.factor is not None:
            G = np.array(self.factor, dtype=float)
            if G.ndim != 2 or G.shape[0] != data.shape[0]:
                raise ValidationError(f"factor shape {G.shape} does not match the covariance")
            G.setflags(write=False)
            object.__setattr__(self, "factor", G)

    @property
    def n_modes(self):
        return len(self.modes)

    def indices(self, modes):
        """Row indices of the given modes, in the order given."""
        out = []
        for m in modes:
            try:
                i = self.modes.index(str(m))
            except ValueError:
                raise LabelError(f"unknown mode {m!r}; known modes {self.modes}") from None
            out.extend((2 * i, 2 * i + 1))
        return out

    def block(self, a, b):
        i, j = self.modes.index(a), self.modes.index(b)
        return self.data[2 * i : 2 * i + 2, 2 * j : 2 * j + 2]

    def permute(self, order):
        """Reorder (or relabel in place) modes; ``order`` lists all labels."""
        order = [str(m) for m in order]
        if sorted(order) != sorted(self.modes):
            raise LabelError("permutation must list every mode exactly once")
        idx = self.indices(order)
        G = None if self.factor is None else self.factor[idx]
        return CovMatrix(tuple(order), self.data[np.ix_(idx, idx)], self.pure, G)

    def to_text(self):
        lines = [" ".join([str(self.data.shape[0]), *self.modes])]
        for row in self.data:
            lines.append(" ".join(f"{x:.17g}" for x in row))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text):
        rows = [ln.split() for ln in text.splitlines() if ln.strip()]
        if not rows:
            raise ValidationError("empty covariance file")
        header = rows[0]
        try:
            dim = int(header[0])
        except ValueError:
            raise ValidationError(f"bad covariance header {' '.join(header)!r}") from None
        modes = tuple(header[1:])
        if dim != 2 * len(modes):
            raise ValidationError(f"header declares dim {dim} but {len(modes)} mode labels")
        body = rows[1:]
        if len(body) != dim or any(len(r) != dim for r in body):
            raise ValidationError(f"expected {dim} rows of {dim} numbers")
        try:
            data = np.array([[float(x) for x in r] for r in body])
        except ValueError as exc:
            raise ValidationError(f"non-numeric covariance entry: {exc}") from None
        return cls(modes, data)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read())


def covariance_from_transfer(tmap, modes, pure=True):
    """``Re(C C^dagger)`` for outputs ordered ``(p, q)`` per mode."""
    C = tmap.coeffs
    # Re(C C^dagger) = G G^T with G = [Re C, Im C]
    G = np.hstack([C.real, C.imag])
    return CovMatrix(tuple(modes), np.real(C @ C.conj().T), pure=pure, factor=G)


def plus_minus_covariance(p):
    """Single-OPO covariance in the (+, 0, -) basis, modes ``("+", "0", "-")``."""
    return covariance_from_transfer(build_transfer_map(p), ("+", "0", "-"))


def single_opo_covariance(p):
    """Covariance of twins 1, 2 and reflected pump 0 of one OPO."""
    t = build_transfer_map(p)
    rotated = TransferMap(
        t.inputs, ("p1", "q1", "p2", "q2", "p0", "q0"), TWIN_ROTATION @ t.coeffs
    )
    return covariance_from_transfer(rotated, ("1", "2", "0"))


@dataclass(frozen=True)
class MirrorSet:
    """One OPO in a chain; ``threshold_ratio`` is its threshold over OPO 1's."""

    gamma0: float
    gamma: float
    threshold_ratio: float = 1.0


@dataclass(frozen=True)
class ChainSpec:
    """Ordered OPO cascade driven by one pump.

    ``output_loss`` holds one loss fraction per output beam in mode order
    (twins of each OPO, then the final pump), or one number for all beams; ``pump_loss`` is the power
    fraction lost on the pump between consecutive OPOs.
    """

    opos: tuple
    sigma_first: float
    omega_rel_first: float
    output_loss: tuple = None
    pump_loss: float = 0.0
    modes: tuple = field(init=False)

    def __post_init__(self):
        opos = tuple(o if isinstance(o, MirrorSet) else MirrorSet(*o) for o in self.opos)
        if not opos:
            raise ValidationError("a chain needs at least one OPO")
        if opos[0].threshold_ratio != 1.0:
            raise ValidationError("the first OPO's threshold_ratio must be 1")
        for k, o in enumerate(opos, start=1):
            if not o.threshold_ratio > 0.0:
                raise ValidationError(f"threshold_ratio of OPO {k} must be > 0")
        if not 0.0 <= self.pump_loss < 1.0:
            raise InvalidLoss(f"pump_loss = {self.pump_loss!r} must lie in [0, 1)")
        object.__setattr__(self, "opos", opos)
        modes = chain_modes(len(opos))
        object.__setattr__(self, "modes", modes)
        if self.output_loss is not None:
            if np.ndim(self.output_loss) == 0:
                loss = (float(self.output_loss),) * len(modes)
            else:
                loss = tuple(float(x) for x in self.output_loss)
            if len(loss) != len(modes):
                raise InvalidLoss(f"need {len(modes)} output losses, got {len(loss)}")
            for x in loss:
                _check_loss(x)
            object.__setattr__(self, "output_loss", loss)

    def derived_sigmas(self):
        """Pump level of every OPO; raises DerivedSigmaOutOfRange if one fails."""
        sigmas = []
        sigma = self.sigma_first
        for k, o in enumerate(self.opos):
            if k == 0:
                classical_steady_state(sigma, o.gamma0, o.gamma)
            else:
                ratio = self.opos[k - 1].threshold_ratio / o.threshold_ratio
                sigma = float((np.sqrt(sigma) - 2.0) ** 2 * ratio * (1.0 - self.pump_loss))
                if not 1.0 < sigma < 4.0:
                    raise DerivedSigmaOutOfRange(k + 1, sigma)
            sigmas.append(float(sigma))
        return sigmas

    def omega_rels(self):
        """Analysis frequency in each OPO's own bandwidth units (equal round trips)."""
        g1 = self.opos[0].gamma
        return [self.omega_rel_first * g1 / o.gamma for o in self.opos]

    def opo_params(self):
        sigmas = self.derived_sigmas()
        return [
            OpoParams(o.gamma0, o.gamma, s, w)
            for o, s, w in zip(self.opos, sigmas, self.omega_rels())
        ]


def chain_transfer_map(spec):
    """Compose the OPO maps of a cascade, expressed in the (1, 2) twin basis."""
    params = spec.opo_params()
    lossy_pump = spec.pump_loss > 0.0
    inputs = ["p0in", "q0in"]
    for k in range(len(params)):
        letter = opo_letter(k)
        if k > 0 and lossy_pump:
            inputs += [f"vp0loss_{letter}", f"vq0loss_{letter}"]
        inputs += [f"vp+_{letter}", f"vq+_{letter}", f"vp-_{letter}", f"vq-_{letter}"]
    col = {name: i for i, name in enumerate(inputs)}
    n_in = len(inputs)

    def unit(name):
        e = np.zeros(n_in, dtype=complex)
        e[col[name]] = 1.0
        return e

    pump = {"p": unit("p0in"), "q": unit("q0in")}
    rows, outputs = [], []
    for k, p in enumerate(params):
        letter = opo_letter(k)
        if k > 0 and lossy_pump:
            t_keep, t_loss = np.sqrt(1.0 - spec.pump_loss), np.sqrt(spec.pump_loss)
            for quad in "pq":
                pump[quad] = t_keep * pump[quad] + t_loss * unit(f"v{quad}0loss_{letter}")
        t = build_transfer_map(p)
        twin = {}
        for quad in "pq":
            plus = t.coefficient(f"{quad}+", f"{quad}0in") * pump[quad] + t.coefficient(
                f"{quad}+", f"v{quad}+"
            ) * unit(f"v{quad}+_{letter}")
            minus = t.coefficient(f"{quad}-", f"v{quad}-") * unit(f"v{quad}-_{letter}")
            reflected = t.coefficient(f"{quad}0out", f"{quad}0in") * pump[quad] + t.coefficient(
                f"{quad}0out", f"v{quad}+"
            ) * unit(f"v{quad}+_{letter}")
            twin[quad] = (_SQRT_HALF * (plus + minus), _SQRT_HALF * (plus - minus))
            pump[quad] = reflected
        for j in (0, 1):
            for quad in "pq":
                rows.append(twin[quad][j])
                outputs.append(f"{quad}{spec.modes[2 * k + j]}")
    for quad in "pq":
        rows.append(pump[quad])
        outputs.append(f"{quad}0")
    return TransferMap(tuple(inputs), tuple(outputs), np.array(rows))


def chain_covariance(spec):
    """Covariance of all ``2M + 1`` output beams of a cascade."""
    V = covariance_from_transfer(chain_transfer_map(spec), spec.modes)
    if spec.output_loss is not None and any(x > 0.0 for x in spec.output_loss):
        V = apply_output_loss(V, spec.output_loss)
    elif spec.pump_loss > 0.0:
        V = CovMatrix(V.modes, V.data, pure=False, factor=V.factor)
    return V


def _mode_set(V, modes):
    chosen = {str(m) for m in modes}
    unknown = chosen - set(V.modes)
    if unknown:
        raise LabelError(f"unknown modes {sorted(unknown)}; known modes {V.modes}")
    return chosen


def partial_transpose(V, transposed_modes):
    """Flip the sign of ``q`` on every transposed mode."""
    chosen = _mode_set(V, transposed_modes)
    if not chosen or len(chosen) == V.n_modes:
        raise InvalidPartition("transposed set must be a non-empty proper subset")
    d = np.ones(2 * V.n_modes)
    for i, m in enumerate(V.modes):
        if m in chosen:
            d[2 * i + 1] = -1.0
    G = None if V.factor is None else d[:, None] * V.factor
    return CovMatrix(V.modes, d[:, None] * V.data * d[None, :], factor=G)


def reduce(V, kept_modes):
    """Gaussian partial trace: keep only ``kept_modes`` (original order)."""
    chosen = _mode_set(V, kept_modes)
    if not chosen:
        raise InvalidPartition("cannot reduce to an empty set of modes")
    if len(chosen) == V.n_modes:
        return V
    order = [m for m in V.modes if m in chosen]
    idx = V.indices(order)
    G = None if V.factor is None else V.factor[idx]
    return CovMatrix(tuple(order), V.data[np.ix_(idx, idx)], factor=G)


def _check_loss(x):
    if not 0.0 <= x < 1.0:
        raise InvalidLoss(f"loss fraction {x!r} must lie in [0, 1)")


def apply_output_loss(V, lambdas):
    """Mix each beam with vacuum on a beamsplitter of transmission ``1 - lambda``.

    ``lambdas`` is a scalar (same loss everywhere), a sequence in mode order,
    or a mapping from mode label to loss (missing labels are lossless).
    """
    if np.isscalar(lambdas):
        lam = [float(lambdas)] * V.n_modes
    elif isinstance(lambdas, dict):
        _mode_set(V, lambdas)
        lam = [float(lambdas.get(m, 0.0)) for m in V.modes]
    else:
        lam = [float(x) for x in lambdas]
        if len(lam) != V.n_modes:
            raise InvalidLoss(f"need {V.n_modes} loss values, got {len(lam)}")
    for x in lam:
        _check_loss(x)
    t = np.repeat(np.sqrt(1.0 - np.array(lam)), 2)
    added = np.repeat(np.array(lam), 2)
    data = t[:, None] * V.data * t[None, :] + np.diag(added)
    lossless = all(x == 0.0 for x in lam)
    G = None
    if V.factor is not None:
        vacuum = np.diag(np.sqrt(added))[:, added > 0.0]
        G = np.hstack([t[:, None] * V.factor, vacuum])
    return CovMatrix(V.modes, data, pure=V.pure if lossless else False, factor=G)


__all__ = [
    "ChainSpec",
    "CovMatrix",
    "MirrorSet",
    "TWIN_ROTATION",
    "apply_output_loss",
    "chain_covariance",
    "chain_modes",
    "chain_transfer_map",
    "covariance_from_transfer",
    "opo_letter",
    "partial_transpose",
    "plus_minus_covariance",
    "reduce",
    "single_opo_covariance",
]
