"""
Joint space-time waveform shaping.

Given the channel H and the occupancy matrix O, pick a quaternary chip code
s and beam weights w (||w||^2 = M) so the max-SINR receiver sees a large
whitened signature energy ``g^H O^{-1} g`` with ``g = s kron (H^T w)``;
the transmit energy needed for a target SINR gamma is then
``gamma * M / (g^H O^{-1} g)``.

Codes are searched exhaustively over the 4**(L-1) phase-reduced candidates
(first chip fixed to +1/sqrt(L)). For each code the weights come from one of
two rules:

``max_metric``
    the principal eigenvector of ``(s kron H^T)^H O^{-1} (s kron H^T)``,
    which maximizes the whitened energy exactly for that code.
``closed_form``
    the least-squares fit of ``(s kron H^T) w`` to the top eigenvector of
    O^{-1}, i.e. ``(H* H^T)^{-1} (s^H kron H*) q_max``, rescaled to the norm
    constraint.
"""

import itertools
from dataclasses import dataclass

import numpy as np

from .model import (ALPHABET, BeamWeights, CodeVector, assemble_signature)
from .stlinalg import (ContractError, DimensionError, MAX_CONDITION,
                       SingularMatrixError, fix_phase, hermitian_min_eigpair,
                       hpd_solve, hpd_whiten)

__all__ = ['VARIANTS', 'POLICIES', 'WEIGHT_RULES', 'MAX_CODE_LEN',
           'DegenerateDirectionError', 'ShapingVariant', 'ShapingResult',
           'Design', 'code_candidates', 'whitened_max_eigpair',
           'optimize_weights', 'optimize_code', 'design', 'apply_energy_policy',
           'shape']

VARIANTS = ('joint', 'space_only', 'time_only', 'arbitrary', 'non_adaptive')
POLICIES = ('cap', 'refrain')
WEIGHT_RULES = ('max_metric', 'closed_form')
MAX_CODE_LEN = 12
GRADIENT_TOL = 1e-8
# relative slack under which two candidate metrics count as tied
_TIE_TOL = 1e-12
_CHUNK = 4096


class DegenerateDirectionError(ContractError):
    """The eigenvector has no component in the code's signature subspace."""


@dataclass(frozen=True)
class ShapingVariant:
    tag: str
    fixed_code: CodeVector = None
    fixed_weights: BeamWeights = None

    def __post_init__(self):
        if self.tag not in VARIANTS:
            raise ContractError(f"unknown variant {self.tag!r}")
        if self.tag in ('space_only', 'arbitrary', 'non_adaptive') \
                and self.fixed_code is None:
            raise ContractError(f"variant {self.tag} needs a fixed code")
        if self.tag in ('time_only', 'arbitrary', 'non_adaptive') \
                and self.fixed_weights is None:
            raise ContractError(f"variant {self.tag} needs fixed weights")

    @classmethod
    def with_defaults(cls, tag, cfg, fixed_code=None, fixed_weights=None):
        """Fill missing fixed parts with the all-ones code and all-ones weights."""
        if fixed_code is None and tag in ('space_only', 'arbitrary', 'non_adaptive'):
            fixed_code = CodeVector.ones(cfg.code_len)
        if fixed_weights is None and tag in ('time_only', 'arbitrary', 'non_adaptive'):
            fixed_weights = BeamWeights.ones(cfg.m_tx)
        if tag == 'joint':
            fixed_code = fixed_weights = None
        elif tag == 'space_only':
            fixed_weights = None
        elif tag == 'time_only':
            fixed_code = None
        return cls(tag, fixed_code, fixed_weights)


@dataclass(frozen=True, eq=False)
class Design:
    """Energy-independent part of a shaping decision."""
    variant: str
    s: CodeVector
    w: BeamWeights
    metric: float
    lambda_max: float
    q_max: np.ndarray
    gain_bound: float
    residual: float


@dataclass(frozen=True, eq=False)
class ShapingResult:
    variant: str
    s_opt: CodeVector
    w_opt: BeamWeights
    e_t_opt: float
    e_t_required: float
    gamma_max_ideal: float
    gamma_max_achieved: float
    sinr_at_cap: float
    transmitting: bool
    metric: float
    lambda_max: float
    residual: float

    def as_dict(self):
        def cplx(v):
            return [f"{x.real + 0.0:.9g}{x.imag + 0.0:+.9g}j" for x in v]
        return {
            'variant': self.variant,
            's_opt': cplx(self.s_opt.s),
            'w_opt': cplx(self.w_opt.w),
            'e_t_opt': self.e_t_opt,
            'e_t_required': self.e_t_required,
            'gamma_max_ideal': self.gamma_max_ideal,
            'gamma_max_achieved': self.gamma_max_achieved,
            'sinr_at_cap': self.sinr_at_cap,
            'transmitting': self.transmitting,
            'metric': self.metric,
            'lambda_max': self.lambda_max,
            'residual': self.residual,
        }


def code_candidates(l):
    """
    All phase-reduced codes of length ``l`` as rows, scaled by 1/sqrt(l).

    Rows are in lexicographic order of the chips under -1 < -j < +j < +1,
    with chip 0 fixed to +1.
    """
    if l < 1:
        raise DimensionError("code length must be >= 1")
    if l > MAX_CODE_LEN:
        raise ContractError(
            f"exhaustive code search is limited to L <= {MAX_CODE_LEN}, got {l}")
    if l == 1:
        return np.ones((1, 1), dtype=complex)
    tail = np.array(list(itertools.product(range(4), repeat=l - 1)))
    chips = np.concatenate([np.full((tail.shape[0], 1), 1.0 + 0j),
                            ALPHABET[tail]], axis=1)
    return chips / np.sqrt(l)


def _chunks(total):
    for start in range(0, total, _CHUNK):
        yield slice(start, min(start + _CHUNK, total))


def _first_best(values, tol=_TIE_TOL):
    """Index of the first entry within a relative ``tol`` of the maximum."""
    best = np.max(values)
    return int(np.argmax(values >= best - tol * abs(best)))


def whitened_max_eigpair(o):
    """
    Largest eigenvalue of O^{-1} and its unit eigenvector.

    Computed from the smallest eigenpair of O itself.
    """
    lam_min, q = hermitian_min_eigpair(o.o)
    vals = np.linalg.eigvalsh(o.o)
    if lam_min <= 0.0 or vals[-1] / lam_min > MAX_CONDITION:
        raise SingularMatrixError("occupancy matrix is numerically singular")
    return 1.0 / lam_min, q


def _code_projection(codes, q, n):
    """(s^H kron I_N) q for each code row; shape (P, N)."""
    blocks = q.reshape(codes.shape[1], n)
    return codes.conj() @ blocks


def optimize_weights(s, h, q_max):
    """
    Closed-form least-squares weights for a fixed code.

    Returns ``(w_raw, w_norm)``: the unconstrained minimizer of
    ``||q_max - (s kron H^T) w||^2`` and its rescaling to ||w||^2 = M.
    """
    q = np.asarray(q_max, dtype=complex).ravel()
    if q.size != len(s) * h.n:
        raise DimensionError(
            f"q_max length {q.size} != N*L = {h.n * len(s)}")
    u = _code_projection(s.s[None, :], q, h.n)[0]
    gram = h.h.conj() @ h.h.T
    w_raw = hpd_solve(gram, h.h.conj() @ u, name='H* H^T')
    if np.linalg.norm(w_raw) <= 1e-12 * np.linalg.norm(q):
        raise DegenerateDirectionError(
            "q_max is orthogonal to the code's signature subspace")
    return w_raw, BeamWeights.normalized(w_raw)


def optimize_code(q_max, n, l):
    """
    Code whose chip subspace captures the most energy of ``q_max``.

    Maximizes ||sum_l conj(s_l) q_l||^2 over phase-reduced codes, q_l being
    the l-th length-N block. Ties go to the lexicographically first code.
    """
    q = np.asarray(q_max, dtype=complex).ravel()
    if q.size != n * l:
        raise DimensionError(f"q_max length {q.size} != n*l = {n * l}")
    codes = code_candidates(l)
    obj = np.empty(codes.shape[0])
    for sl in _chunks(codes.shape[0]):
        obj[sl] = np.sum(np.abs(_code_projection(codes[sl], q, n)) ** 2, axis=1)
    return CodeVector(codes[_first_best(obj)])


def _whitened_blocks(h, o, l):
    """
    C^{-1} (e_l kron H^T) for every chip l, with O = C C^H.

    Shape (L, NL, M); the whitened signature of code s and weights w is
    ``sum_l s_l T[l] @ w``.
    """
    n, m = h.n, h.m
    rhs = np.zeros((n * l, l * m), dtype=complex)
    for k in range(l):
        rhs[k * n:(k + 1) * n, k * m:(k + 1) * m] = h.h.T
    z = hpd_whiten(o.o, rhs, name='occupancy')
    return z.reshape(n * l, l, m).transpose(1, 0, 2)


def _stack(codes, blocks):
    return np.tensordot(codes, blocks, axes=([1], [0]))


def _max_metric_scan(codes, blocks, m):
    """Best whitened energy and unit weight direction for each code."""
    metrics = np.empty(codes.shape[0])
    dirs = np.empty((codes.shape[0], m), dtype=complex)
    for sl in _chunks(codes.shape[0]):
        z = _stack(codes[sl], blocks)
        gram = np.conj(np.swapaxes(z, 1, 2)) @ z
        vals, vecs = np.linalg.eigh(gram)
        metrics[sl] = m * vals[:, -1]
        dirs[sl] = vecs[:, :, -1]
    return metrics, dirs


def _fixed_weight_scan(codes, blocks, w):
    metrics = np.empty(codes.shape[0])
    for sl in _chunks(codes.shape[0]):
        z = _stack(codes[sl], blocks) @ w
        metrics[sl] = np.sum(np.abs(z) ** 2, axis=1)
    return metrics


def _closed_form_scan(codes, blocks, h, q):
    """Metric and normalized weights of the closed-form rule for each code."""
    m = h.m
    gram = h.h.conj() @ h.h.T
    metrics = np.full(codes.shape[0], -np.inf)
    weights = np.zeros((codes.shape[0], m), dtype=complex)
    for sl in _chunks(codes.shape[0]):
        u = _code_projection(codes[sl], q, h.n)
        w_raw = hpd_solve(gram, h.h.conj() @ u.T, name='H* H^T').T
        nrm = np.linalg.norm(w_raw, axis=1)
        ok = nrm > 1e-12
        w = np.zeros_like(w_raw)
        w[ok] = np.sqrt(m) * w_raw[ok] / nrm[ok, None]
        z = np.einsum('plm,lkm->pk', codes[sl][:, :, None] * w[:, None, :], blocks)
        met = np.sum(np.abs(z) ** 2, axis=1)
        metrics[sl] = np.where(ok, met, -np.inf)
        weights[sl] = w
    return metrics, weights


def _projection_residual(codes, q, n):
    """Energy of q_max left outside each code's chip subspace."""
    return 1.0 - np.sum(np.abs(_code_projection(codes, q, n)) ** 2, axis=1)


def _select(metrics, residuals):
    """Max metric, then smaller residual, then lower candidate index."""
    best = np.max(metrics)
    tied = np.flatnonzero(metrics >= best - _TIE_TOL * abs(best))
    if tied.size == 1:
        return int(tied[0])
    r = residuals[tied]
    return int(tied[np.argmax(r <= r.min() + 1e-12)])


def design(variant, h, o, cfg, weight_rule='max_metric'):
    """Code, weights and whitened signature energy for one variant."""
    if weight_rule not in WEIGHT_RULES:
        raise ContractError(f"unknown weight rule {weight_rule!r}")
    n, l, m = cfg.n_rx, cfg.code_len, cfg.m_tx
    if (h.m, h.n) != (m, n):
        raise DimensionError(f"channel {h.h.shape} does not match M={m}, N={n}")
    if o.dim != n * l:
        raise DimensionError(f"occupancy size {o.dim} != N*L = {n * l}")
    for part in (variant.fixed_code, variant.fixed_weights):
        if part is None:
            continue
        want = l if isinstance(part, CodeVector) else m
        if len(part) != want:
            raise DimensionError(f"fixed component length {len(part)} != {want}")

    lam, q = whitened_max_eigpair(o)
    blocks = _whitened_blocks(h, o, l)
    gain_bound = float(np.linalg.eigvalsh(h.h.conj() @ h.h.T)[-1])
    tag = variant.tag

    if tag in ('joint', 'space_only'):
        codes = code_candidates(l) if tag == 'joint' else variant.fixed_code.s[None, :]
        if weight_rule == 'max_metric':
            metrics, dirs = _max_metric_scan(codes, blocks, m)
        else:
            metrics, dirs = _closed_form_scan(codes, blocks, h, q)
            if not np.isfinite(metrics).any():
                raise DegenerateDirectionError(
                    "q_max is orthogonal to every candidate signature subspace")
        residuals = _projection_residual(codes, q, n)
        k = _select(metrics, residuals)
        s = CodeVector(codes[k])
        if weight_rule == 'max_metric':
            w = BeamWeights.normalized(fix_phase(dirs[k]))
        else:
            w = BeamWeights(dirs[k])
        metric, residual = float(metrics[k]), float(residuals[k])
    elif tag == 'time_only':
        codes = code_candidates(l)
        w = variant.fixed_weights
        metrics = _fixed_weight_scan(codes, blocks, w.w)
        residuals = _projection_residual(codes, q, n)
        k = _select(metrics, residuals)
        s = CodeVector(codes[k])
        metric, residual = float(metrics[k]), float(residuals[k])
    else:
        s, w = variant.fixed_code, variant.fixed_weights
        codes = s.s[None, :]
        metric = float(_fixed_weight_scan(codes, blocks, w.w)[0])
        residual = float(_projection_residual(codes, q, n)[0])

    # recompute for the selected pair so every variant reports the same quantity
    g = assemble_signature(s, w, h).g
    metric = float(np.sum(np.abs(hpd_whiten(o.o, g, name='occupancy')) ** 2))
    return Design(tag, s, w, metric, lam, q, gain_bound, residual)


def apply_energy_policy(d, cfg, policy='cap'):
    """
    Turn a design into an energy decision.

    The required energy is gamma*M/metric. When it exceeds E_T,max the link
    either stays silent (``refrain``) or transmits at E_T,max (``cap``).
    The non-adaptive benchmark always transmits at E_T,max.
    """
    if policy not in POLICIES:
        raise ContractError(f"unknown policy {policy!r}")
    m, gamma, cap = cfg.m_tx, cfg.gamma, cfg.et_max
    required = gamma * m / d.metric if d.metric > 0 else np.inf
    at_cap = cap * d.metric / m
    if d.variant == 'non_adaptive':
        e_t, sinr, tx = cap, at_cap, True
    elif required <= cap:
        e_t, sinr, tx = required, gamma, True
    elif policy == 'refrain':
        e_t, sinr, tx = 0.0, 0.0, False
    else:
        e_t, sinr, tx = cap, at_cap, True
    return ShapingResult(
        variant=d.variant, s_opt=d.s, w_opt=d.w, e_t_opt=float(e_t),
        e_t_required=float(required),
        gamma_max_ideal=float(cap * d.lambda_max * d.gain_bound),
        gamma_max_achieved=float(at_cap), sinr_at_cap=float(sinr),
        transmitting=bool(tx), metric=d.metric, lambda_max=d.lambda_max,
        residual=d.residual)


def shape(variant, h, o, cfg, policy='cap', weight_rule='max_metric'):
    """Run the full shaping pipeline for one variant."""
    return apply_energy_policy(design(variant, h, o, cfg, weight_rule), cfg, policy)
