"""Quantum phase estimation on a normalized graph Laplacian.

Register layout: the system (one amplitude per padded vertex) sits on qubits
``0..n-1`` and the ``m`` phase ancillas on ``n..n+m-1``, ancilla ``j``
controlling ``U^(2^j)``. After the inverse QFT the ancilla register reads
``bin = round(theta * 2^m)`` with ``theta = lambda * t / (2 pi)``.

Post-selected states are optionally *filtered*: phase estimation is rerun on
the collapsed system register and the state is kept only if it lands in the
same bin again. Each pass suppresses leakage from eigenvalues that do not
belong to the bin.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ComponentSplitAdvised, NotNormalized, PostSelectionStarved, QlapError
from .evolution import TWO_PI, EvolutionBackend, trotter_powers
from .graph import (
    Graph,
    LaplacianMatrix,
    Partition,
    build_laplacian,
    connected_components,
    cut_size,
    normalize_laplacian,
    pad_to_power_of_two,
)
from .qsim import (
    QuantumState,
    RngStream,
    apply_unitary,
    draw_index,
    inverse_qft,
    measure_register,
    register_probabilities,
)
from .spectral import (
    SpectralResult,
    canonical_basis,
    eig_sym,
    fiedler,
    fix_sign,
    oracle_cap,
    sign_bisect,
)


@lru_cache(maxsize=256)
def phase_bits(delta: float) -> int:
    """Smallest ``b`` with ``2**-b <= delta``, computed exactly."""
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    target = 1 / Fraction(delta)
    b = 0
    while (1 << b) < target:
        b += 1
    return b


# ---------------------------------------------------------------------------
# State preparation
# ---------------------------------------------------------------------------

STRATEGIES = ("basis", "uniform", "random_real", "orthogonal_random", "injected")


@dataclass(frozen=True, eq=False)
class StatePrep:
    kind: str
    index: int = 0
    vector: np.ndarray | None = None
    avoid: tuple[np.ndarray, ...] | None = None

    def __post_init__(self):
        if self.kind not in STRATEGIES:
            raise ValueError(f"unknown state preparation {self.kind!r}")

    @property
    def deterministic(self) -> bool:
        return self.kind in ("basis", "uniform", "injected")

    @classmethod
    def parse(cls, text: str) -> "StatePrep":
        """``uniform``, ``random_real``, ``orthogonal_random`` or ``basis:<k>``."""
        name, _, arg = text.partition(":")
        if name == "basis":
            return cls("basis", index=int(arg or 0))
        if name in ("uniform", "random_real", "orthogonal_random"):
            return cls(name)
        raise ValueError(f"cannot parse state preparation {text!r}")

    @classmethod
    def injected(cls, v) -> "StatePrep":
        return cls("injected", vector=np.asarray(v))

    @classmethod
    def orthogonal_to(cls, vs) -> "StatePrep":
        return cls("orthogonal_random", avoid=tuple(np.asarray(v) for v in vs))

    def describe(self) -> str:
        return f"basis:{self.index}" if self.kind == "basis" else self.kind

    def avoid_basis(self) -> list[np.ndarray] | None:
        if self.avoid is None:
            return None
        cached = self.__dict__.get("_avoid_basis")
        if cached is None:
            cached = _orthonormalize(self.avoid)
            object.__setattr__(self, "_avoid_basis", cached)
        return cached


def known_kernel(lap: LaplacianMatrix) -> list[np.ndarray]:
    """Kernel vectors known without diagonalizing: all-ones on real vertices, ghost indicators."""
    n_real = lap.dim - lap.ghost_count
    ones = np.zeros(lap.dim)
    ones[:n_real] = 1 / math.sqrt(n_real)
    out = [ones]
    for g in range(n_real, lap.dim):
        e = np.zeros(lap.dim)
        e[g] = 1.0
        out.append(e)
    return out


def _orthonormalize(vs) -> list[np.ndarray]:
    basis: list[np.ndarray] = []
    for v in vs:
        w = np.asarray(v, dtype=np.complex128).copy()
        for _ in range(2):
            for b in basis:
                w -= np.vdot(b, w) * b
        nrm = np.linalg.norm(w)
        if nrm > 1e-10:
            basis.append(w / nrm)
    return basis


def prepare_state(strategy: StatePrep | str, n: int, rng: RngStream | None = None,
                  lap: LaplacianMatrix | None = None) -> QuantumState:
    if isinstance(strategy, str):
        strategy = StatePrep.parse(strategy)
    dim = 1 << n
    kind = strategy.kind
    if kind == "basis":
        if not 0 <= strategy.index < dim:
            raise ValueError(f"basis index {strategy.index} out of range")
        amps = np.zeros(dim, dtype=np.complex128)
        amps[strategy.index] = 1
        return QuantumState(n, amps)
    if kind == "uniform":
        return QuantumState(n, np.full(dim, 1 / math.sqrt(dim), dtype=np.complex128))
    if kind == "injected":
        v = np.asarray(strategy.vector, dtype=np.complex128)
        if v.shape != (dim,):
            raise ValueError(f"injected vector must have length {dim}")
        if abs(np.linalg.norm(v) - 1) > 1e-10:
            raise ValueError("injected vector must have unit norm")
        return QuantumState(n, v)
    if rng is None:
        raise ValueError(f"{kind} state preparation needs an RngStream")
    if kind == "random_real":
        v = rng.generator.standard_normal(dim)
        return QuantumState(n, v / np.linalg.norm(v))
    basis = strategy.avoid_basis()
    if basis is None:
        basis = _orthonormalize(
            known_kernel(lap) if lap is not None else [np.ones(dim) / math.sqrt(dim)]
        )
    if len(basis) >= dim:
        raise ValueError("vectors to avoid span the whole space")
    while True:
        w = rng.generator.standard_normal(dim).astype(np.complex128)
        for _ in range(2):
            for b in basis:
                w -= np.vdot(b, w) * b
        nrm = np.linalg.norm(w)
        if nrm >= 1e-6:
            return QuantumState(n, w / nrm)


# ---------------------------------------------------------------------------
# Configuration and results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QpeConfig:
    delta: float = 1 / 64
    guard: int = 2
    backend: EvolutionBackend = field(default_factory=EvolutionBackend)
    shots: int = 1024
    n_samples: int = 1000
    seed: int = 0
    state_prep: StatePrep | str = "orthogonal_random"
    # post-selection machinery
    filter_passes: int = 4
    filter_window: int = 1
    amplitude_tol: float = 1e-7
    retry_budget: int = 8
    max_rounds: int | None = None
    rank_tol: float = 1e-6
    noise_sigma: float = 3.0
    sign_floor: float | None = None
    sign_shots: int = 200
    connectivity_check: str = "union_find"
    threads: int = 1

    def __post_init__(self):
        if isinstance(self.state_prep, str):
            object.__setattr__(self, "state_prep", StatePrep.parse(self.state_prep))
        if self.shots < 1 or self.n_samples < 1:
            raise ValueError("shots and n_samples must be >= 1")
        if self.guard < 0:
            raise ValueError("guard must be >= 0")
        m = self.ancilla_bits
        assert m >= 1 and 2.0**-m <= self.delta
        assert m == phase_bits(self.delta) + self.guard

    @classmethod
    def with_bits(cls, m: int, **kw) -> "QpeConfig":
        """Config with exactly ``m`` ancillas and no guard bits."""
        return cls(delta=2.0**-m, guard=0, **kw)

    @property
    def ancilla_bits(self) -> int:
        return phase_bits(self.delta) + self.guard

    def total_qubits(self, dim: int) -> int:
        return int(round(math.log2(dim))) + self.ancilla_bits

    def describe(self) -> dict:
        return {
            "delta": self.delta,
            "guard": self.guard,
            "ancilla_bits": self.ancilla_bits,
            "backend": self.backend.to_dict(),
            "shots": self.shots,
            "n_samples": self.n_samples,
            "seed": self.seed,
            "state_prep": self.state_prep.describe(),
            "filter_passes": self.filter_passes,
            "filter_window": self.filter_window,
            "amplitude_tol": self.amplitude_tol,
        }


@dataclass(frozen=True, eq=False)
class EigHistogram:
    bin_counts: np.ndarray
    ancilla_bits: int
    divisor: float
    t: float = TWO_PI

    @property
    def total_shots(self) -> int:
        return int(self.bin_counts.sum())

    def eigenvalue_of_bin(self, k: int | np.ndarray):
        """Bin index to eigenvalue estimate on the unnormalized scale."""
        return np.asarray(k) / (1 << self.ancilla_bits) * self.divisor * TWO_PI / self.t

    def noise_floor(self, sigma: float = 3.0) -> float:
        p0 = 2.0**-self.ancilla_bits
        return sigma * math.sqrt(self.total_shots * p0 * (1 - p0))

    def modal_bin(self) -> int:
        return int(np.argmax(self.bin_counts))

    def peak_bins(self, sigma: float = 3.0) -> list[int]:
        """Bins above the noise floor that are local maxima (ties resolved to the left)."""
        c = self.bin_counts
        floor = self.noise_floor(sigma)
        out = []
        for k in range(len(c)):
            left = c[k - 1] if k > 0 else -1
            right = c[k + 1] if k + 1 < len(c) else -1
            if c[k] > floor and c[k] > left and c[k] >= right:
                out.append(k)
        return out

    def to_dict(self) -> dict:
        nz = np.flatnonzero(self.bin_counts)
        return {
            "ancilla_bits": self.ancilla_bits,
            "divisor": self.divisor,
            "total_shots": self.total_shots,
            "bins": [
                {"bin": int(k), "count": int(self.bin_counts[k]),
                 "eigenvalue": float(self.eigenvalue_of_bin(k))}
                for k in nz
            ],
        }


@dataclass(frozen=True, eq=False)
class ReadoutResult:
    magnitudes: np.ndarray
    signs: np.ndarray  # +1, -1, or 0 for unknown
    samples_used: int
    target_bin: int
    mode: str

    def signed_vector(self) -> np.ndarray:
        return self.magnitudes * self.signs

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "target_bin": self.target_bin,
            "magnitudes": [float(x) for x in self.magnitudes],
            "signs": [int(s) if s else "unknown" for s in self.signs],
            "samples_used": self.samples_used,
        }


# ---------------------------------------------------------------------------
# The circuit
# ---------------------------------------------------------------------------


def _system_qubits(lap: LaplacianMatrix) -> int:
    n = int(round(math.log2(lap.dim)))
    if 1 << n != lap.dim:
        raise ValueError("Laplacian dimension must be a power of two; pad the graph first")
    return n


@lru_cache(maxsize=64)
def _ladder_table(angles: bytes, m: int) -> np.ndarray:
    angles = np.frombuffer(angles, dtype=np.float64)
    return np.exp(1j * np.outer(np.arange(1 << m), angles))


def _phase_ladder(s: QuantumState, n_sys: int, m: int, phases: np.ndarray) -> QuantumState:
    """All ``m`` controlled powers of a diagonal unitary at once.

    Ancilla ``j`` contributes ``phases**(2**j)`` when set, so the ladder
    multiplies the row for ancilla value ``a`` by ``phases**a``.
    """
    table = _ladder_table(np.angle(phases).tobytes(), m)
    amps = (s.amplitudes.reshape(1 << m, 1 << n_sys) * table).reshape(-1)
    return QuantumState(s.num_qubits, amps)


def qpe_state(lap: LaplacianMatrix, psi0: QuantumState, cfg: QpeConfig,
              spectrum: SpectralResult | None = None) -> tuple[QuantumState, bool]:
    """Circuit up to (not including) the ancilla measurement.

    Returns the state and whether the system register is still expressed in
    the oracle eigenbasis. With the exact backend every controlled power is
    diagonal in that basis, so the system is rotated in once before the
    ladder; rotating back commutes with the ancilla-only inverse QFT and
    measurement, so it is deferred to the collapsed system register.
    """
    if not lap.is_normalized:
        raise NotNormalized("qpe needs a normalized Laplacian")
    n = _system_qubits(lap)
    if psi0.num_qubits != n:
        raise ValueError(f"initial state has {psi0.num_qubits} qubits, system needs {n}")
    m = cfg.ancilla_bits
    backend = cfg.backend
    plus = QuantumState(m, np.full(1 << m, 2.0 ** (-m / 2), dtype=np.complex128))
    ancillas = list(range(n, n + m))
    if backend.kind == "exact":
        spectrum = spectrum if spectrum is not None else eig_sym(lap)
        sys = apply_unitary(psi0, range(n), spectrum.eigenvectors.T, check=False) if n else psi0
        state = sys.tensor(plus)
        state = _phase_ladder(state, n, m, np.exp(1j * spectrum.eigenvalues * backend.t))
        rotated = True
    else:
        # rows indexed by ancilla value; ancilla j set -> apply W^(2^j)
        rows = np.outer(plus.amplitudes, psi0.amplitudes)
        values = np.arange(1 << m)
        for j, w in enumerate(trotter_powers(lap, backend, m)):
            sel = (values >> j) & 1 == 1
            rows[sel] = rows[sel] @ w.T
        state = QuantumState(n + m, rows.reshape(-1))
        rotated = False
    return inverse_qft(state, ancillas), rotated


def _collapse_system(state: QuantumState, n: int, outcome: int, rotated: bool,
                     spectrum: SpectralResult | None) -> QuantumState:
    sys = state.amplitudes.reshape(-1, 1 << n)[outcome]
    sys = sys / np.linalg.norm(sys)
    if rotated:
        sys = spectrum.eigenvectors @ sys
    return QuantumState(n, sys)


def qpe_run(lap: LaplacianMatrix, psi0: QuantumState, cfg: QpeConfig, rng: RngStream,
            spectrum: SpectralResult | None = None) -> tuple[int, QuantumState]:
    """One phase-estimation shot: returns the measured bin and the collapsed system state."""
    if cfg.backend.kind == "exact" and spectrum is None:
        spectrum = eig_sym(lap)
    n = _system_qubits(lap)
    state, rotated = qpe_state(lap, psi0, cfg, spectrum)
    outcome, post = measure_register(state, range(n, n + cfg.ancilla_bits), rng)
    return outcome, _collapse_system(post, n, outcome, rotated, spectrum)


def bin_distribution(lap: LaplacianMatrix, psi0: QuantumState, cfg: QpeConfig,
                     spectrum: SpectralResult | None = None) -> np.ndarray:
    """Exact outcome probabilities of the ancilla register for a fixed input."""
    n = _system_qubits(lap)
    state, _ = qpe_state(lap, psi0, cfg, spectrum)
    return register_probabilities(state, range(n, n + cfg.ancilla_bits))


def _spectrum_for(lap: LaplacianMatrix, cfg: QpeConfig,
                  spectrum: SpectralResult | None) -> SpectralResult | None:
    if cfg.backend.kind == "exact" and spectrum is None:
        return eig_sym(lap)
    return spectrum


def eigenvalue_histogram(lap: LaplacianMatrix, cfg: QpeConfig, rng: RngStream | None = None,
                         spectrum: SpectralResult | None = None) -> EigHistogram:
    """Repeat phase estimation ``cfg.shots`` times; shot ``i`` uses stream ``rng.spawn(i)``.

    Deterministic preparations are simulated once and sampled per shot,
    which draws exactly what independent runs would.
    """
    rng = rng if rng is not None else RngStream(cfg.seed)
    spectrum = _spectrum_for(lap, cfg, spectrum)
    n = _system_qubits(lap)
    m = cfg.ancilla_bits
    counts = np.zeros(1 << m, dtype=np.int64)
    prep = cfg.state_prep
    if prep.deterministic:
        probs = bin_distribution(lap, prepare_state(prep, n, None, lap), cfg, spectrum)
        for i in range(cfg.shots):
            counts[draw_index(probs, rng.spawn(i).uniform())] += 1
    else:
        def shot(i: int) -> int:
            stream = rng.spawn(i)
            psi0 = prepare_state(prep, n, stream, lap)
            state, _ = qpe_state(lap, psi0, cfg, spectrum)
            outcome, _ = measure_register(state, range(n, n + m), stream)
            return outcome

        if cfg.threads > 1:
            with ThreadPoolExecutor(cfg.threads) as pool:
                outcomes = list(pool.map(shot, range(cfg.shots)))
        else:
            outcomes = [shot(i) for i in range(cfg.shots)]
        for o in outcomes:
            counts[o] += 1
    return EigHistogram(counts, m, lap.divisor, cfg.backend.t)


# ---------------------------------------------------------------------------
# Post-selection, eigenvector readout and degeneracy counting
# ---------------------------------------------------------------------------


def _filtered(lap, post, cfg, target_bin, stream, spectrum,
              window: int | None = None) -> tuple[QuantumState | None, int]:
    """Rerun phase estimation on ``post``; keep it while it lands within ``window`` bins."""
    window = cfg.filter_window if window is None else window
    size = 1 << cfg.ancilla_bits
    runs = 0
    for _ in range(cfg.filter_passes):
        outcome, post = qpe_run(lap, post, cfg, stream, spectrum)
        runs += 1
        dist = abs(outcome - target_bin)
        if min(dist, size - dist) > window:
            return None, runs
    return post, runs


def post_select(lap: LaplacianMatrix, cfg: QpeConfig, target_bin: int, rng: RngStream,
                spectrum: SpectralResult | None = None, prep: StatePrep | None = None,
                budget: int | None = None) -> tuple[QuantumState, int]:
    """Run until the ancillas read ``target_bin`` (and survive filtering).

    Returns the collapsed system state and the number of circuit runs used.
    """
    spectrum = _spectrum_for(lap, cfg, spectrum)
    prep = prep or cfg.state_prep
    n = _system_qubits(lap)
    budget = budget if budget is not None else 100 * cfg.n_samples
    runs = 0
    attempt = 0
    while runs < budget:
        stream = rng.spawn(attempt)
        attempt += 1
        psi0 = prepare_state(prep, n, stream, lap)
        outcome, post = qpe_run(lap, psi0, cfg, stream, spectrum)
        runs += 1
        if outcome != target_bin:
            continue
        post, used = _filtered(lap, post, cfg, target_bin, stream, spectrum)
        runs += used
        if post is not None:
            return post, runs
    raise PostSelectionStarved(target_bin, runs)


def _real_phase_fixed(amps: np.ndarray) -> np.ndarray:
    """Rotate the global phase so the largest-magnitude entry is real positive."""
    k = int(np.argmax(np.abs(amps)))
    phase = amps[k] / abs(amps[k])
    return (amps / phase).real


def readout_eigenvector(lap: LaplacianMatrix, cfg: QpeConfig, target_bin: int,
                        rng: RngStream | None = None, mode: str = "trace",
                        spectrum: SpectralResult | None = None,
                        tie_tol: float | None = None, with_signs: bool = True) -> ReadoutResult:
    """Estimate the eigenvector behind ``target_bin``.

    ``trace`` reads the post-selected amplitudes directly (only a simulator
    can do this). ``sampling`` measures the post-selected system register
    once per accepted run and recovers signs by interference (skipped when
    ``with_signs`` is false, leaving every sign unknown).

    In trace mode amplitudes at or below ``tie_tol`` (default
    ``cfg.amplitude_tol``) read as exact zeros and get sign 0.
    """
    rng = rng if rng is not None else RngStream(cfg.seed)
    tie_tol = cfg.amplitude_tol if tie_tol is None else tie_tol
    spectrum = _spectrum_for(lap, cfg, spectrum)
    if mode == "trace":
        post, runs = post_select(lap, cfg, target_bin, rng.spawn(0), spectrum)
        vec = _real_phase_fixed(post.amplitudes)
        signs = np.where(np.abs(vec) <= tie_tol, 0, np.sign(vec)).astype(int)
        return ReadoutResult(np.abs(vec), signs, runs, target_bin, "trace")
    if mode != "sampling":
        raise ValueError(f"unknown readout mode {mode!r}")

    counts = np.zeros(lap.dim, dtype=np.int64)
    budget = 100 * cfg.n_samples
    runs = 0
    sample_rng = rng.spawn(0)
    for i in range(cfg.n_samples):
        stream = sample_rng.spawn(i)
        post, used = post_select(lap, cfg, target_bin, stream.spawn(0), spectrum,
                                 budget=budget - runs)
        runs += used
        counts[draw_index(post.probabilities(), stream.spawn(1).uniform())] += 1
    magnitudes = np.sqrt(counts / cfg.n_samples)
    if not with_signs:
        return ReadoutResult(magnitudes, np.zeros(lap.dim, dtype=int), runs, target_bin, "sampling")
    signs, sign_runs = _recover_signs(lap, cfg, target_bin, magnitudes, rng.spawn(1), spectrum)
    return ReadoutResult(magnitudes, signs, runs + sign_runs, target_bin, "sampling")


def recover_signs(lap: LaplacianMatrix, cfg: QpeConfig, target_bin: int, magnitudes: np.ndarray,
                  rng: RngStream, spectrum: SpectralResult | None = None) -> np.ndarray:
    """Relative signs against the largest-magnitude vertex, by interference.

    For each vertex ``k`` above the floor, the post-selected state gets a
    Hadamard on the two-level subspace {|r>, |k>}; the chance of then reading
    ``r`` is ``|a_r + a_k|^2 / 2``, above ``(|a_r|^2 + |a_k|^2) / 2`` iff the
    signs agree. Vertices at or below the floor come back 0 (unknown).
    """
    return _recover_signs(lap, cfg, target_bin, magnitudes, rng, spectrum)[0]


def _recover_signs(lap: LaplacianMatrix, cfg: QpeConfig, target_bin: int, magnitudes: np.ndarray,
                   rng: RngStream, spectrum: SpectralResult | None) -> tuple[np.ndarray, int]:
    spectrum = _spectrum_for(lap, cfg, spectrum)
    n = _system_qubits(lap)
    floor = cfg.sign_floor if cfg.sign_floor is not None else 3 / math.sqrt(cfg.n_samples)
    r = int(np.argmax(magnitudes))
    signs = np.zeros(lap.dim, dtype=int)
    signs[r] = 1
    runs = 0
    budget = 100 * cfg.n_samples
    for k in range(lap.dim):
        if k == r or magnitudes[k] <= floor:
            continue
        mix = np.eye(lap.dim, dtype=np.complex128)
        s2 = 1 / math.sqrt(2)
        mix[np.ix_([r, k], [r, k])] = [[s2, s2], [s2, -s2]]
        hits = 0
        vertex_rng = rng.spawn(k)
        for shot in range(cfg.sign_shots):
            stream = vertex_rng.spawn(shot)
            post, used = post_select(lap, cfg, target_bin, stream.spawn(0), spectrum,
                                     budget=max(1, budget - runs))
            runs += used
            mixed = apply_unitary(post, range(n), mix, check=False)
            hits += draw_index(mixed.probabilities(), stream.spawn(1).uniform()) == r
        p_same = hits / cfg.sign_shots
        signs[k] = 1 if p_same > (magnitudes[k] ** 2 + magnitudes[r] ** 2) / 2 else -1
    return signs, runs


@dataclass(frozen=True, eq=False)
class EigenspaceResult:
    basis: np.ndarray  # columns: orthonormal collapsed states
    target_bin: int
    rounds: int
    runs: int

    @property
    def dimension(self) -> int:
        return self.basis.shape[1]


def collect_eigenspace(lap: LaplacianMatrix, cfg: QpeConfig, target_bin: int,
                       rng: RngStream | None = None, spectrum: SpectralResult | None = None,
                       avoid=(), window: int | None = None) -> EigenspaceResult:
    """Span the eigenspace behind ``target_bin`` with post-selected states.

    Each round prepares a random state orthogonal to everything accepted so
    far (plus ``avoid``) and tries up to ``retry_budget`` times to land in
    the bin. A collapsed state is accepted if its Gram-Schmidt residual
    against the accepted set exceeds ``rank_tol``. Stops after
    ``max_rounds`` (default ``4 * dim``) consecutive rounds without growth.
    ``window`` overrides ``cfg.filter_window`` for the filter passes.
    """
    rng = rng if rng is not None else RngStream(cfg.seed)
    spectrum = _spectrum_for(lap, cfg, spectrum)
    n = _system_qubits(lap)
    max_rounds = cfg.max_rounds if cfg.max_rounds is not None else 4 * lap.dim
    fixed = _orthonormalize(avoid)
    accepted: list[np.ndarray] = []
    failures = 0
    rounds = 0
    runs = 0
    while failures < max_rounds and len(accepted) + len(fixed) < lap.dim:
        round_rng = rng.spawn(rounds)
        rounds += 1
        prep = StatePrep.orthogonal_to(fixed + accepted)
        grown = False
        for attempt in range(cfg.retry_budget):
            stream = round_rng.spawn(attempt)
            psi0 = prepare_state(prep, n, stream, lap)
            outcome, post = qpe_run(lap, psi0, cfg, stream, spectrum)
            runs += 1
            if outcome != target_bin:
                continue
            post, used = _filtered(lap, post, cfg, target_bin, stream, spectrum, window)
            runs += used
            if post is None:
                continue
            w = post.amplitudes.copy()
            for _ in range(2):
                for b in accepted:
                    w -= np.vdot(b, w) * b
            resid = np.linalg.norm(w)
            if resid > cfg.rank_tol:
                accepted.append(w / resid)
                grown = True
            break
        failures = 0 if grown else failures + 1
    basis = np.column_stack(accepted) if accepted else np.zeros((lap.dim, 0), dtype=complex)
    return EigenspaceResult(basis, target_bin, rounds, runs)


def count_zero_degeneracy(lap: LaplacianMatrix, cfg: QpeConfig, rng: RngStream | None = None,
                          spectrum: SpectralResult | None = None) -> int:
    """Multiplicity of eigenvalue 0 on the real (non-ghost) vertices."""
    return zero_eigenspace(lap, cfg, rng, spectrum).dimension - lap.ghost_count


def zero_eigenspace(lap: LaplacianMatrix, cfg: QpeConfig, rng: RngStream | None = None,
                    spectrum: SpectralResult | None = None) -> EigenspaceResult:
    # eigenvalue 0 is exactly dyadic, so the filter can demand the bin itself
    return collect_eigenspace(lap, cfg, 0, rng, spectrum, window=0)


# ---------------------------------------------------------------------------
# End-to-end Fiedler bisection
# ---------------------------------------------------------------------------


def select_fiedler_bin(hist: EigHistogram, sigma: float = 3.0) -> int:
    """Smallest nonzero bin above the noise floor, walked up to its local peak."""
    c = hist.bin_counts
    floor = hist.noise_floor(sigma)
    above = [k for k in range(1, len(c)) if c[k] > floor]
    if not above:
        raise QlapError("no nonzero eigenvalue bin rose above the noise floor")
    k = above[0]
    while k + 1 < len(c) and c[k + 1] > c[k]:
        k += 1
    return k


def _bisect_signed(signs: np.ndarray, g: Graph) -> Partition:
    """Positive -> block 0, negative -> block 1; unknowns follow their signed neighbours."""
    n = g.num_real
    signs = np.asarray(signs[:n], dtype=int)
    known = np.flatnonzero(signs)
    if known.size and signs[known[0]] < 0:
        signs = -signs
    labels = np.where(signs < 0, 1, 0)
    adj = g.neighbors()
    for v in np.flatnonzero(signs == 0):
        votes = [1 if signs[u] < 0 else 0 for u in adj[v] if signs[u] != 0]
        labels[v] = 1 if votes and 2 * sum(votes) > len(votes) else 0
    if labels.all():
        labels[:] = 0
    p = Partition(tuple(int(x) for x in labels), int(labels.max(initial=0)) + 1)
    return Partition(p.assignment, p.num_blocks, cut_size(g, p))


def quantum_fiedler_partition(g: Graph, cfg: QpeConfig, readout: str = "trace",
                              resolve_degeneracy: bool = True, normalization: str = "gershgorin_pow2",
                              rng: RngStream | None = None) -> tuple[Partition, dict]:
    """Bisect ``g`` by the sign pattern of a phase-estimated Fiedler vector.

    The initial states are random but orthogonal to the known kernel, so the
    histogram's lowest populated bin belongs to the Fiedler value. In trace
    mode with ``resolve_degeneracy`` the whole eigenspace behind that bin is
    collected; if it is degenerate the same canonical vector the classical
    oracle would pick is used.
    """
    rng = rng if rng is not None else RngStream(cfg.seed)
    if cfg.connectivity_check == "quantum":
        pg = pad_to_power_of_two(g)
        lap0 = normalize_laplacian(build_laplacian(pg), normalization)
        components = count_zero_degeneracy(lap0, cfg, rng.spawn(9))
    else:
        components, _ = connected_components(g)
    if components != 1:
        raise ComponentSplitAdvised(components)
    if g.num_real < 2:
        raise QlapError("need at least two vertices to bisect")

    pg = pad_to_power_of_two(g)
    lap = normalize_laplacian(build_laplacian(pg), normalization)
    spectrum = _spectrum_for(lap, cfg, None)
    kernel = known_kernel(lap)
    run_cfg = replace(cfg, state_prep=StatePrep.orthogonal_to(kernel))
    hist = eigenvalue_histogram(lap, run_cfg, rng.spawn(0), spectrum)
    target = select_fiedler_bin(hist, cfg.noise_sigma)

    diag: dict = {
        "histogram": hist.to_dict(),
        "chosen_bin": target,
        "fiedler_estimate": float(hist.eigenvalue_of_bin(target)),
        "readout": readout,
        "readout_kind": "simulator-privileged" if readout == "trace" else "interference",
        "ancilla_bits": cfg.ancilla_bits,
        "total_qubits": cfg.total_qubits(lap.dim),
    }
    eigenspace_dim = None
    if readout == "trace" and resolve_degeneracy:
        space = collect_eigenspace(lap, run_cfg, target, rng.spawn(1), spectrum, avoid=kernel)
        eigenspace_dim = space.dimension
        if space.dimension == 0:
            raise PostSelectionStarved(target, space.runs)
        real_basis = np.column_stack([_real_phase_fixed(space.basis[:, i])
                                      for i in range(space.dimension)])
        if space.dimension > 1:
            vec = canonical_basis(real_basis, 1)[:, 0]
        else:
            vec = real_basis[:, 0]
        signs = np.where(np.abs(vec) <= cfg.amplitude_tol, 0, np.sign(vec)).astype(int)
        result = ReadoutResult(np.abs(vec), signs, space.runs, target, "trace")
    else:
        result = readout_eigenvector(lap, run_cfg, target, rng.spawn(1), readout, spectrum)
    if readout == "trace":
        # zeros are measured, not unknown: they follow the oracle's tie rule
        vec = fix_sign(result.signed_vector()[: g.num_real].astype(float))
        partition = sign_bisect(vec, g, tie_tol=0.0)
    else:
        partition = _bisect_signed(result.signs, g)

    diag.update(result.to_dict())
    diag["eigenspace_dim"] = eigenspace_dim
    diag["degenerate"] = bool(eigenspace_dim and eigenspace_dim > 1)
    if g.num_real <= oracle_cap():
        real = g if g.ghost_count == 0 else g.induced(range(g.num_real))[0]
        cl = classical_reference(real)
        agree = partition.same_up_to_relabel(cl["partition"])
        diag["oracle"] = {
            "fiedler_value": cl["fiedler_value"],
            "degenerate": cl["degenerate"],
            "cut_edges": cl["partition"].cut_edges,
            "assignment_agrees": agree,
            "agreement": agree if not cl["degenerate"] else partition.cut_edges == cl["partition"].cut_edges,
        }
    return partition, diag


def classical_reference(g: Graph, gap_tol: float = 1e-6) -> dict:
    lap = build_laplacian(g)
    value, vec = fiedler(lap)
    res = eig_sym(lap)
    degenerate = len(res.eigenvalues) > 2 and abs(res.eigenvalues[2] - res.eigenvalues[1]) <= gap_tol
    return {"fiedler_value": value, "vector": vec, "degenerate": bool(degenerate),
            "partition": sign_bisect(vec, g)}
