"""Joint simulation of the atomic ladder coupled to truncated photon modes.

The state lives on a four-axis tensor (k, n_a, n_b, n_c): atomic excitation
number, detected Stokes mode, detected anti-Stokes mode, and one lumped
undetected mode c that absorbs the fraction of emission amplitude not coupled
into the detected modes. The write process raises the atomic ladder while
creating a photon in a/c; the read process lowers it while creating a photon
in b/c. Evolution is either the first-order expansion of the process unitary
(non-unitary at order p) or the exact exponential on the truncated space.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from .dicke import DickeVector, LadderDirection, ladder_coeff
from .errors import (
    MemampError,
    MixedConditionalError,
    ResourceGuardError,
    TruncationLeakageError,
    TruncationOverflowError,
)
from .metrics import DensityMatrix

#: Total tensor dimension cap for any joint state.
DIM_CAP = 2_000_000

#: Dense-exponential guard: exact evolution eigendecomposes a D x D matrix.
EXACT_DIM_CAP = 2048

#: Population allowed on a truncated top level (per axis) before the result
#: is considered untrustworthy.
LEAK_TOL = 1e-8

#: Norm drift allowed for the exact (unitary) evolution.
UNITARY_TOL = 1e-10

#: A heralded slice below this squared norm counts as a zero-probability event.
ZERO_PROB_FLOOR = 1e-280

#: Purity deficit below which a conditional state is accepted as pure.
PURITY_TOL = 1e-10

#: Default atomic levels carried by the joint tensor when unspecified.
DEFAULT_ATOMIC_K_MAX = 8


class EvolutionOrder(enum.Enum):
    """First-order perturbative unitary vs exact matrix exponential."""

    FIRST_ORDER = "first_order"
    EXACT = "exact"


@dataclass(frozen=True)
class ModeTruncation:
    """Fock cutoffs for the photon modes and the atomic ladder.

    ``fock_c_max = 0`` removes the loss mode (its axis keeps only the vacuum).
    ``atomic_k_max = None`` resolves to ``min(N, 8)`` once the atom count is
    known; see `resolve`.
    """

    fock_a_max: int = 3
    fock_b_max: int = 3
    fock_c_max: int = 2
    atomic_k_max: int | None = None

    def __post_init__(self):
        if self.fock_a_max < 1 or self.fock_b_max < 1:
            raise ValueError("fock_a_max and fock_b_max must be >= 1")
        if self.fock_c_max < 0:
            raise ValueError("fock_c_max must be >= 0")
        if self.atomic_k_max is not None:
            if self.atomic_k_max < 1:
                raise ValueError("atomic_k_max must be >= 1")
            if self.total_dim() > DIM_CAP:
                raise ResourceGuardError(
                    f"joint dimension {self.total_dim()} exceeds cap {DIM_CAP}"
                )

    def resolve(self, n_atoms: int) -> "ModeTruncation":
        """Pin the atomic cutoff for a concrete ensemble size."""
        k_max = self.atomic_k_max
        if k_max is None:
            k_max = min(n_atoms, DEFAULT_ATOMIC_K_MAX)
        k_max = min(k_max, n_atoms)
        return replace(self, atomic_k_max=k_max)

    def shape(self) -> tuple[int, int, int, int]:
        if self.atomic_k_max is None:
            raise ValueError("truncation not resolved against an atom count")
        return (
            self.atomic_k_max + 1,
            self.fock_a_max + 1,
            self.fock_b_max + 1,
            self.fock_c_max + 1,
        )

    def total_dim(self) -> int:
        s = self.shape()
        return s[0] * s[1] * s[2] * s[3]


@dataclass(frozen=True)
class HeraldPattern:
    """Exact photon counts required on the two detected modes."""

    detect_a: int = 1
    detect_b: int = 1

    def __post_init__(self):
        if self.detect_a < 0 or self.detect_b < 0:
            raise ValueError("photon counts must be >= 0")


@dataclass(frozen=True)
class JointState:
    """Complex tensor over (k, n_a, n_b, n_c) for an N-atom ensemble."""

    n_atoms: int
    truncation: ModeTruncation
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).copy()
        if amps.shape != self.truncation.shape():
            raise ValueError(
                f"amplitude shape {amps.shape} != truncation {self.truncation.shape()}"
            )
        if not np.all(np.isfinite(amps.view(np.float64))):
            raise ValueError("amplitudes must be finite")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def total_probability(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))


def build_joint(atomic: DickeVector, truncation: ModeTruncation) -> JointState:
    """Embed an atomic state into the joint tensor with all modes in vacuum."""
    trunc = truncation.resolve(atomic.n_atoms)
    k_top = trunc.atomic_k_max
    assert k_top is not None
    if atomic.k_max > k_top:
        tail = atomic.amplitudes[k_top + 1 :]
        if np.any(tail != 0):
            raise ValueError(
                f"atomic state populates k > {k_top}; enlarge atomic_k_max"
            )
    amps = np.zeros(trunc.shape(), dtype=np.complex128)
    m = min(atomic.k_max, k_top) + 1
    amps[:m, 0, 0, 0] = atomic.amplitudes[:m]
    return JointState(atomic.n_atoms, trunc, amps)


def target_joint_state(
    atomic: DickeVector, truncation: ModeTruncation, pattern: HeraldPattern
) -> JointState:
    """Atomic state combined with an exact photon pattern on modes a and b."""
    trunc = truncation.resolve(atomic.n_atoms)
    shape = trunc.shape()
    if pattern.detect_a >= shape[1] or pattern.detect_b >= shape[2]:
        raise ValueError(f"pattern {pattern} outside truncation {trunc}")
    k_top = trunc.atomic_k_max
    assert k_top is not None
    if atomic.k_max > k_top and np.any(atomic.amplitudes[k_top + 1 :] != 0):
        raise ValueError(f"atomic state populates k > {k_top}; enlarge atomic_k_max")
    amps = np.zeros(shape, dtype=np.complex128)
    m = min(atomic.k_max, k_top) + 1
    amps[:m, pattern.detect_a, pattern.detect_b, 0] = atomic.amplitudes[:m]
    return JointState(atomic.n_atoms, trunc, amps)


def _ladder_coeffs(n_atoms: int, k_top: int) -> np.ndarray:
    # raise coefficient from level k, equal to the lower coefficient from k+1
    return np.array(
        [ladder_coeff(LadderDirection.RAISE, k, n_atoms) for k in range(k_top)]
    )


def _slice_population(amps: np.ndarray, axis: int, index: int) -> float:
    return float(np.sum(np.abs(np.take(amps, index, axis=axis)) ** 2))


def _check_first_order_headroom(
    joint: JointState, process: str, beta: float
) -> None:
    """Reject inputs whose boundary population would flow past a cutoff."""
    amps = joint.amplitudes
    trunc = joint.truncation
    k_top = trunc.atomic_k_max
    assert k_top is not None
    checks: list[tuple[str, float]] = []
    if process == "write":
        if k_top < joint.n_atoms:
            checks.append(("atomic k", _slice_population(amps, 0, k_top)))
        checks.append(("mode a", _slice_population(amps, 1, trunc.fock_a_max)))
        if beta < 1.0:
            checks.append(("mode c", _slice_population(amps, 3, trunc.fock_c_max)))
    else:
        checks.append(("mode b", _slice_population(amps, 2, trunc.fock_b_max)))
        if beta < 1.0:
            checks.append(("mode c", _slice_population(amps, 3, trunc.fock_c_max)))
        if k_top < joint.n_atoms:
            # raising through the photon-absorption term needs n_b >= 1
            pop = float(np.sum(np.abs(amps[k_top, :, 1:, :]) ** 2))
            checks.append(("atomic k", pop))
    for name, pop in checks:
        if pop > LEAK_TOL:
            raise TruncationOverflowError(
                f"{process}: population {pop:.3e} at the {name} cutoff would "
                f"overflow the truncation"
            )


def _first_order_apply(
    joint: JointState, p: float, beta: float, process: str
) -> np.ndarray:
    psi = joint.amplitudes
    n = joint.n_atoms
    trunc = joint.truncation
    k_top = trunc.atomic_k_max
    assert k_top is not None
    lad = _ladder_coeffs(n, k_top).reshape(-1, 1, 1, 1)
    sqa = np.sqrt(np.arange(1, trunc.fock_a_max + 1)).reshape(1, -1, 1, 1)
    sqb = np.sqrt(np.arange(1, trunc.fock_b_max + 1)).reshape(1, 1, -1, 1)
    sqc = np.sqrt(np.arange(1, trunc.fock_c_max + 1)).reshape(1, 1, 1, -1)
    out = psi.copy()
    g_det = np.sqrt(p * beta)
    g_loss = np.sqrt(p * (1.0 - beta))
    if process == "write":
        out[1:, 1:] += g_det * lad * sqa * psi[:-1, :-1]
        out[:-1, :-1] -= g_det * lad * sqa * psi[1:, 1:]
        if g_loss > 0.0:
            out[1:, :, :, 1:] += g_loss * lad * sqc * psi[:-1, :, :, :-1]
            out[:-1, :, :, :-1] -= g_loss * lad * sqc * psi[1:, :, :, 1:]
    else:
        out[:-1, :, 1:] += g_det * lad * sqb * psi[1:, :, :-1]
        out[1:, :, :-1] -= g_det * lad * sqb * psi[:-1, :, 1:]
        if g_loss > 0.0:
            out[:-1, :, :, 1:] += g_loss * lad * sqc * psi[1:, :, :, :-1]
            out[1:, :, :, :-1] -= g_loss * lad * sqc * psi[:-1, :, :, 1:]
    return out


def _kron4(w, x, y, z):
    return np.kron(np.kron(np.kron(w, x), y), z)


def _exact_apply(joint: JointState, p: float, beta: float, process: str) -> np.ndarray:
    trunc = joint.truncation
    dim = trunc.total_dim()
    if dim > EXACT_DIM_CAP:
        raise ResourceGuardError(
            f"exact evolution needs total dimension <= {EXACT_DIM_CAP}, got {dim}"
        )
    k_top = trunc.atomic_k_max
    assert k_top is not None
    s_up = np.diag(_ladder_coeffs(joint.n_atoms, k_top), k=-1)
    a_dag = np.diag(np.sqrt(np.arange(1, trunc.fock_a_max + 1)), k=-1)
    b_dag = np.diag(np.sqrt(np.arange(1, trunc.fock_b_max + 1)), k=-1)
    c_dag = np.diag(np.sqrt(np.arange(1, trunc.fock_c_max + 1)), k=-1)
    eye_a = np.eye(trunc.fock_a_max + 1)
    eye_b = np.eye(trunc.fock_b_max + 1)
    eye_c = np.eye(trunc.fock_c_max + 1)
    g_det = np.sqrt(p * beta)
    g_loss = np.sqrt(p * (1.0 - beta))
    if process == "write":
        create = g_det * _kron4(s_up, a_dag, eye_b, eye_c)
        if g_loss > 0.0:
            create = create + g_loss * _kron4(s_up, eye_a, eye_b, c_dag)
    else:
        s_low = s_up.T
        create = g_det * _kron4(s_low, eye_a, b_dag, eye_c)
        if g_loss > 0.0:
            create = create + g_loss * _kron4(s_low, eye_a, eye_b, c_dag)
    generator = create - create.T  # real, antisymmetric
    hermitian = 1j * generator
    w, v = np.linalg.eigh(hermitian)
    flat = joint.amplitudes.reshape(-1)
    evolved = v @ (np.exp(-1j * w) * (v.conj().T @ flat))
    before = np.linalg.norm(flat)
    after = np.linalg.norm(evolved)
    if abs(after - before) > UNITARY_TOL * max(1.0, before):
        raise MemampError(
            f"exact evolution drifted the norm by {abs(after - before):.3e}"
        )
    return evolved.reshape(trunc.shape())


def _check_exact_leakage(out: np.ndarray, joint: JointState, process: str) -> None:
    trunc = joint.truncation
    k_top = trunc.atomic_k_max
    assert k_top is not None
    checks = []
    if k_top < joint.n_atoms:
        checks.append(("atomic k", _slice_population(out, 0, k_top)))
    if process == "write":
        checks.append(("mode a", _slice_population(out, 1, trunc.fock_a_max)))
    else:
        checks.append(("mode b", _slice_population(out, 2, trunc.fock_b_max)))
    if trunc.fock_c_max > 0:
        checks.append(("mode c", _slice_population(out, 3, trunc.fock_c_max)))
    for name, pop in checks:
        if pop > LEAK_TOL:
            raise TruncationLeakageError(
                f"{process}: exact evolution left population {pop:.3e} on the "
                f"{name} cutoff (> {LEAK_TOL})"
            )


def _apply_process(
    joint: JointState,
    p: float,
    beta: float,
    order: EvolutionOrder,
    process: str,
) -> JointState:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"coupling p must be in [0, 1], got {p}")
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"mode-overlap beta must be in (0, 1], got {beta}")
    if beta < 1.0 and joint.truncation.fock_c_max == 0:
        raise ValueError("beta < 1 requires a loss mode (fock_c_max >= 1)")
    if p == 0.0:
        return joint
    if order is EvolutionOrder.FIRST_ORDER:
        _check_first_order_headroom(joint, process, beta)
        out = _first_order_apply(joint, p, beta, process)
    else:
        out = _exact_apply(joint, p, beta, process)
        _check_exact_leakage(out, joint, process)
    return JointState(joint.n_atoms, joint.truncation, out)


def apply_write(
    joint: JointState, p_w: float, beta_w: float, order: EvolutionOrder
) -> JointState:
    """One write process: raises the atomic ladder, emitting into a (and c)."""
    return _apply_process(joint, p_w, beta_w, order, "write")


def apply_read(
    joint: JointState, p_r: float, beta_r: float, order: EvolutionOrder
) -> JointState:
    """One read process: lowers the atomic ladder, emitting into b (and c)."""
    return _apply_process(joint, p_r, beta_r, order, "read")


def _herald_slice(joint: JointState, pattern: HeraldPattern) -> np.ndarray:
    shape = joint.truncation.shape()
    if pattern.detect_a >= shape[1] or pattern.detect_b >= shape[2]:
        raise ValueError(f"pattern {pattern} outside truncation {joint.truncation}")
    # columns indexed by the undetected-mode occupation
    return joint.amplitudes[:, pattern.detect_a, pattern.detect_b, :]


def herald(
    joint: JointState, pattern: HeraldPattern
) -> tuple[DickeVector, float]:
    """Condition on exact photon counts; returns (atomic state, probability).

    The probability is the squared norm of the matching slice with the
    undetected mode summed incoherently. The conditional atomic state is
    returned as a pure vector only when one exists (single undetected-mode
    sector, or all sectors parallel); otherwise MixedConditionalError points
    the caller at `reduced_conditional_density`.
    """
    block = _herald_slice(joint, pattern)
    prob = float(np.sum(np.abs(block) ** 2))
    k_dim = block.shape[0]
    if prob <= ZERO_PROB_FLOOR:
        zero = DickeVector(joint.n_atoms, np.zeros(k_dim, dtype=np.complex128))
        return zero, 0.0
    col_pop = np.sum(np.abs(block) ** 2, axis=0)
    populated = np.flatnonzero(col_pop > prob * 1e-24)
    if populated.size > 1:
        gram = block.conj().T @ block
        trace = np.trace(gram).real
        purity = float(np.sum(np.abs(gram) ** 2).real) / trace**2
        if 1.0 - purity > PURITY_TOL:
            raise MixedConditionalError(
                "conditional atomic state is mixed; use reduced_conditional_density"
            )
    best = int(np.argmax(col_pop))
    column = block[:, best]
    state = DickeVector(
        joint.n_atoms, column / np.linalg.norm(column), normalized=True
    )
    return state, prob


def reduced_conditional_density(
    joint: JointState, pattern: HeraldPattern
) -> tuple[DensityMatrix, float]:
    """Atomic density matrix conditioned on the pattern, loss mode traced out."""
    block = _herald_slice(joint, pattern)
    rho = block @ block.conj().T
    prob = float(np.trace(rho).real)
    if prob <= ZERO_PROB_FLOOR:
        return DensityMatrix(np.zeros_like(rho)), 0.0
    return DensityMatrix(rho / prob, normalized=True), prob


def outcome_probabilities(joint: JointState) -> np.ndarray:
    """Squared norms per (n_a, n_b, n_c) outcome; sums to the total probability."""
    return np.sum(np.abs(joint.amplitudes) ** 2, axis=0)


def conditional_on_counts(
    joint: JointState, n_a: int, n_b: int, n_c: int
) -> tuple[DickeVector, float]:
    """Pure conditional state for a fully resolved photon-count outcome."""
    column = joint.amplitudes[:, n_a, n_b, n_c]
    prob = float(np.sum(np.abs(column) ** 2))
    if prob <= ZERO_PROB_FLOOR:
        zero = DickeVector(joint.n_atoms, np.zeros_like(column))
        return zero, 0.0
    state = DickeVector(
        joint.n_atoms, column / np.linalg.norm(column), normalized=True
    )
    return state, prob


def dump_amplitudes(joint: JointState, path) -> None:
    """Debug dump of nonzero tensor amplitudes, one entry per line.

    Format (not a stable interface): ``k n_a n_b n_c re im`` with shortest
    round-trip decimals, indices in row-major order.
    """
    lines = [f"# n_atoms={joint.n_atoms} shape={joint.truncation.shape()}"]
    for index in np.argwhere(joint.amplitudes != 0):
        value = complex(joint.amplitudes[tuple(index)])
        k, n_a, n_b, n_c = (int(i) for i in index)
        lines.append(f"{k} {n_a} {n_b} {n_c} {value.real!r} {value.imag!r}")
    with open(path, "w") as handle:
        handle.write("\n".join(lines) + "\n")


def joint_density_traced(joint: JointState) -> tuple[DensityMatrix, float]:
    """Density matrix over (k, n_a, n_b) with the undetected mode traced out.

    Returns the trace-normalized matrix plus the pre-normalization trace (the
    total outcome probability of the underlying pure state).
    """
    shape = joint.truncation.shape()
    block = joint.amplitudes.reshape(shape[0] * shape[1] * shape[2], shape[3])
    rho = block @ block.conj().T
    trace = float(np.trace(rho).real)
    if trace <= ZERO_PROB_FLOOR:
        raise MemampError("cannot build a density matrix from a zero state")
    return (
        DensityMatrix(rho / trace, normalized=True, dims=shape[:3]),
        trace,
    )
