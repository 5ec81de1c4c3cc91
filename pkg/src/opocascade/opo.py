"""Single above-threshold OPO at exact triple resonance.

Quadrature fluctuations of the twin beams are handled in the sum/difference
basis ``p+- = (p1 +- p2)/sqrt(2)`` where the linearized equations decouple.
All coefficients are evaluated at one analysis frequency ``omega_rel``
(sideband frequency over the twin-cavity bandwidth); the round-trip time
only enters through that normalization.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BelowThreshold, LabelError, PumpDepleted, ValidationError

# input/output labels of a single OPO, in the (+, -) twin basis
OPO_INPUTS = ("p0in", "q0in", "vp+", "vq+", "vp-", "vq-")
OPO_OUTPUTS = ("p+", "q+", "p0out", "q0out", "p-", "q-")


def classical_steady_state(sigma, gamma0, gamma):
    """Mean-field steady state above threshold.

    Returns ``(beta, reflected_power_ratio)`` where ``beta = p/p0`` is the
    twin-to-pump intracavity amplitude ratio and the reflected ratio is
    ``P0_out / P_in``. The intracavity pump is clamped at its threshold value,
    which gives ``beta**2 = (gamma0/gamma) (sqrt(sigma) - 1)`` and
    ``P0_out/P_in = (2 - sqrt(sigma))**2 / sigma``.
    """
    if not sigma > 1.0:
        raise BelowThreshold(f"sigma = {sigma!r} must exceed 1 for oscillation")
    if not sigma < 4.0:
        raise PumpDepleted(f"sigma = {sigma!r} must stay below 4")
    root = np.sqrt(sigma)
    beta = float(np.sqrt(gamma0 / gamma * (root - 1.0)))
    reflected = float((2.0 - root) ** 2 / sigma)
    return beta, reflected


@dataclass(frozen=True)
class OpoParams:
    """Physical parameters of one OPO.

    ``gamma0`` and ``gamma`` are half the pump and twin coupling-mirror
    transmissions, ``sigma`` the pump power over threshold and ``omega_rel``
    the analysis frequency over this OPO's twin-cavity bandwidth.
    """

    gamma0: float
    gamma: float
    sigma: float
    omega_rel: float
    beta: float = field(init=False)

    def __post_init__(self):
        for name in ("gamma0", "gamma"):
            value = getattr(self, name)
            if not 0.0 < value <= 0.5:
                raise ValidationError(f"{name} = {value!r} must lie in (0, 0.5]")
        if not self.omega_rel > 0.0 or not np.isfinite(self.omega_rel):
            raise ValidationError(f"omega_rel = {self.omega_rel!r} must be > 0")
        beta, _ = classical_steady_state(self.sigma, self.gamma0, self.gamma)
        object.__setattr__(self, "beta", beta)

    @property
    def reflected_power_ratio(self):
        return classical_steady_state(self.sigma, self.gamma0, self.gamma)[1]


@dataclass(frozen=True)
class TransferCoefficients:
    xi_p: complex
    xi_q: complex
    kappa_p: complex
    kappa_q: complex
    vartheta_p: complex
    vartheta_q: complex


def transfer_coefficients(p):
    g0, g, b, w = p.gamma0, p.gamma, p.beta, p.omega_rel
    pump_denom = g0 + 2j * g * w
    depletion = 2.0 * g * g * b * b
    xi_p = 2j * g * w + depletion / pump_denom
    xi_q = 2.0 * g + xi_p
    gain = 2.0 * np.sqrt(2.0) * g * b * np.sqrt(g0 * g) / pump_denom

    def vartheta(xi):
        return -1.0 + 2.0 * g0 / pump_denom * (1.0 - depletion / (pump_denom * xi))

    return TransferCoefficients(
        xi_p=complex(xi_p),
        xi_q=complex(xi_q),
        kappa_p=complex(gain / xi_p),
        kappa_q=complex(gain / xi_q),
        vartheta_p=complex(vartheta(xi_p)),
        vartheta_q=complex(vartheta(xi_q)),
    )


def difference_coefficients(omega_rel):
    """Vacuum-to-output coefficients of the twin difference mode ``(p-, q-)``."""
    w = omega_rel
    return -1j * w / (1.0 + 1j * w), -1j * (1.0 - 1j * w) / w


@dataclass(frozen=True)
class TransferMap:
    """Linear map from unit-variance vacuum input quadratures to outputs.

    ``coeffs[i, k]`` is the complex coefficient of input ``inputs[k]`` in
    output ``outputs[i]`` at one analysis frequency.
    """

    inputs: tuple
    outputs: tuple
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.shape != (len(self.outputs), len(self.inputs)):
            raise LabelError(
                f"coefficient shape {c.shape} does not match "
                f"{len(self.outputs)} outputs x {len(self.inputs)} inputs"
            )
        c.setflags(write=False)
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "outputs", tuple(self.outputs))
        object.__setattr__(self, "coeffs", c)

    def coefficient(self, output, input):
        return self.coeffs[self.outputs.index(output), self.inputs.index(input)]

    def quadrature_blocks(self):
        """Split into matched p-type and q-type blocks.

        Returns ``(p_rows, q_rows, p_cols, q_cols)`` index lists such that
        ``p_rows[i]`` and ``q_rows[i]`` are partner outputs and likewise for
        the input columns.
        """
        p_rows, q_rows = _pair_labels(self.outputs)
        p_cols, q_cols = _pair_labels(self.inputs)
        return p_rows, q_rows, p_cols, q_cols


def _split_label(label):
    # inputs carry a leading "v" for vacuum ports: "vp+" -> ("p", "+")
    core = label[1:] if label.startswith("v") else label
    if not core or core[0] not in "pq":
        raise LabelError(f"label {label!r} does not name a p or q quadrature")
    return core[0], ("v" if label.startswith("v") else "") + core[1:]


def _pair_labels(labels):
    p_keys, q_keys = {}, {}
    for i, label in enumerate(labels):
        quad, key = _split_label(label)
        target = p_keys if quad == "p" else q_keys
        if key in target:
            raise LabelError(f"duplicate quadrature label {label!r}")
        target[key] = i
    if set(p_keys) != set(q_keys):
        unmatched = sorted(set(p_keys) ^ set(q_keys))
        raise LabelError(f"labels without a p/q partner: {unmatched}")
    keys = list(p_keys)
    return [p_keys[k] for k in keys], [q_keys[k] for k in keys]


def build_transfer_map(p):
    """Transfer map of one OPO in the (+, -) twin basis."""
    t = transfer_coefficients(p)
    g = p.gamma
    c_pm, c_qm = difference_coefficients(p.omega_rel)
    C = np.zeros((6, 6), dtype=complex)
    idx_in = {name: k for k, name in enumerate(OPO_INPUTS)}
    idx_out = {name: k for k, name in enumerate(OPO_OUTPUTS)}

    def put(out, inp, value):
        C[idx_out[out], idx_in[inp]] = value

    put("p+", "p0in", t.kappa_p)
    put("p+", "vp+", 2.0 * g / t.xi_p - 1.0)
    put("q+", "q0in", t.kappa_q)
    put("q+", "vq+", 2.0 * g / t.xi_q - 1.0)
    put("p0out", "p0in", t.vartheta_p)
    put("p0out", "vp+", -t.kappa_p)
    put("q0out", "q0in", t.vartheta_q)
    put("q0out", "vq+", -t.kappa_q)
    put("p-", "vp-", c_pm)
    put("q-", "vq-", c_qm)
    return TransferMap(OPO_INPUTS, OPO_OUTPUTS, C)


def commutation_residual(t):
    """Largest deviation of ``M_p M_q^dagger`` from the identity.

    Zero residual means the map preserves canonical commutators, i.e. the
    lossless model is unitary at this frequency.
    """
    p_rows, q_rows, p_cols, q_cols = t.quadrature_blocks()
    Mp = t.coeffs[np.ix_(p_rows, p_cols)]
    Mq = t.coeffs[np.ix_(q_rows, q_cols)]
    if Mp.shape[0] > Mp.shape[1]:
        raise LabelError("more outputs than inputs in a quadrature block")
    # zero detuning: any p<->q leakage is itself a violation
    leak = max(
        np.abs(t.coeffs[np.ix_(p_rows, q_cols)]).max(initial=0.0),
        np.abs(t.coeffs[np.ix_(q_rows, p_cols)]).max(initial=0.0),
    )
    unitarity = np.abs(Mp @ Mq.conj().T - np.eye(Mp.shape[0])).max()
    return float(max(unitarity, leak))
