"""Three-photon GHZ laboratory.

Quantum side: a three-qubit state, phase-shift observables
``sigma(phi) = cos(phi) X + sin(phi) Y`` and Born-rule sampling of one
collective per measurement setting. Classical side: exhaustive search over
the 64 deterministic local assignments and the feasibility of a single
distribution meeting every probability-one constraint.

For the default state ``(|000> + i|111>)/sqrt(2)`` the product correlation
is ``sin(phi1 + phi2 + phi3)``, giving +1, +1, +1, -1 on the four canonical
settings.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import reduce
from typing import NamedTuple, Sequence

import numpy as np

from . import _rng
from .collectives import Collective, IIDGenerator, LabelSet
from .errors import NotNormalized
from .measures import GHZ_PATTERNS, GHZ_SIGNS, all_assignments, assignment_label

NORM_TOL = 1e-12
CERTAINTY_TOL = 1e-12

_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)


class Setting(NamedTuple):
    phi1: float
    phi2: float
    phi3: float


CANONICAL_SETTINGS = (
    Setting(math.pi / 2, 0.0, 0.0),
    Setting(0.0, math.pi / 2, 0.0),
    Setting(0.0, 0.0, math.pi / 2),
    Setting(math.pi / 2, math.pi / 2, math.pi / 2),
)


class OutcomeTriple(NamedTuple):
    a: int
    b: int
    c: int

    @property
    def product(self) -> int:
        return self.a * self.b * self.c

    @property
    def label(self) -> str:
        return assignment_label(self)


# Lexicographic in (s1, s2, s3) with -1 < +1.
OUTCOMES = tuple(OutcomeTriple(a, b, c) for a in (-1, 1) for b in (-1, 1) for c in (-1, 1))
OUTCOME_LABELS = LabelSet(tuple(o.label for o in OUTCOMES))
OUTCOME_PRODUCTS = np.array([o.product for o in OUTCOMES])


@dataclass(frozen=True, eq=False)
class TripleState:
    """Amplitudes over basis ``|s1 s2 s3>``, index ``4*s1 + 2*s2 + s3``."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amp.shape != (8,):
            raise ValueError("a three-qubit state has 8 amplitudes")
        norm = float(np.vdot(amp, amp).real)
        if abs(norm - 1) > NORM_TOL:
            raise NotNormalized(f"squared norm is {norm!r}")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def ghz(cls) -> "TripleState":
        amp = np.zeros(8, dtype=complex)
        amp[0], amp[7] = 1 / math.sqrt(2), 1j / math.sqrt(2)
        return cls(amp)

    @classmethod
    def basis(cls, bits: str) -> "TripleState":
        amp = np.zeros(8, dtype=complex)
        amp[int(bits, 2)] = 1
        return cls(amp)


def _state(state) -> TripleState:
    return state if isinstance(state, TripleState) else TripleState(state)


def phase_observable(phi: float) -> np.ndarray:
    return math.cos(phi) * _X + math.sin(phi) * _Y


def eigenvector(phi: float, s: int) -> np.ndarray:
    """Eigenvector of ``sigma(phi)`` for eigenvalue ``s``: ``(|0> + s e^{i phi} |1>)/sqrt(2)``."""
    return np.array([1, s * np.exp(1j * phi)]) / math.sqrt(2)


def correlation(state, setting: Sequence[float]) -> float:
    """Expectation of ``sigma(phi1) (x) sigma(phi2) (x) sigma(phi3)``."""
    psi = _state(state).amplitudes
    op = reduce(np.kron, (phase_observable(p) for p in setting))
    return float(np.vdot(psi, op @ psi).real)


def outcome_probabilities(state, setting: Sequence[float]) -> np.ndarray:
    """Born probabilities in :data:`OUTCOMES` order."""
    psi = _state(state).amplitudes.reshape(2, 2, 2)
    # bra[s, k] = conj of component k of the eigenvector with eigenvalue s (-1, +1)
    bras = [np.conj(np.stack([eigenvector(p, -1), eigenvector(p, 1)])) for p in setting]
    amp = np.einsum("ai,bj,ck,ijk->abc", *bras, psi)
    return (np.abs(amp) ** 2).reshape(-1)


def outcome_distribution(state, setting: Sequence[float]) -> dict:
    return dict(zip(OUTCOMES, outcome_probabilities(state, setting).tolist()))


def wrong_parity_mass(state, setting: Sequence[float], sign: int) -> float:
    p = outcome_probabilities(state, setting)
    return float(p[OUTCOME_PRODUCTS != sign].sum())


def certified_sign(state, setting: Sequence[float]) -> int | None:
    """The product sign that occurs with probability one, if any."""
    for sign in (1, -1):
        if wrong_parity_mass(state, setting, sign) < CERTAINTY_TOL:
            return sign
    return None


def sample_setting_collective(state, setting: Sequence[float], n: int, seed: int = 0,
                              workers: int | None = None) -> Collective:
    """``n`` i.i.d. Born-rule outcomes, labelled like ``"+-+"``."""
    gen = IIDGenerator(OUTCOME_LABELS, outcome_probabilities(state, setting))
    return Collective.generate(gen, n, seed, workers)


def products(c: Collective) -> np.ndarray:
    """Per-draw product ``a*b*c`` of an outcome collective."""
    return OUTCOME_PRODUCTS[c.codes]


def photon_stream(c: Collective, photon: int) -> Collective:
    """Single-photon outcomes (``"-"``/``"+"``) from an outcome collective."""
    bits = (c.codes >> (2 - photon)) & 1
    return Collective(LabelSet(("-", "+")), bits)


# -- local hidden variables ----------------------------------------------------

class LhvStrategy(NamedTuple):
    A_x: int
    A_y: int
    B_x: int
    B_y: int
    C_x: int
    C_y: int

    def value(self, photon: int, kind: str) -> int:
        return self[2 * photon + (kind == "y")]

    def product(self, pattern: str) -> int:
        return math.prod(self.value(p, k) for p, k in enumerate(pattern))


STRATEGIES = tuple(LhvStrategy(*v) for v in all_assignments())
_STRATEGY_MATRIX = np.array(STRATEGIES, dtype=np.int8)


class Constraint(NamedTuple):
    pattern: str   # one of "x"/"y" per photon
    sign: int


def setting_pattern(setting) -> str:
    """``"yxx"`` style pattern of a setting whose phases are all 0 or pi/2."""
    if isinstance(setting, str):
        if len(setting) != 3 or set(setting) - {"x", "y"}:
            raise ValueError(f"bad pattern {setting!r}")
        return setting
    out = []
    for phi in setting:
        if math.isclose(phi, 0.0, abs_tol=1e-12):
            out.append("x")
        elif math.isclose(phi, math.pi / 2, abs_tol=1e-12):
            out.append("y")
        else:
            raise ValueError(f"phase {phi} is neither 0 nor pi/2")
    return "".join(out)


def _is_xy(setting) -> bool:
    try:
        setting_pattern(setting)
    except ValueError:
        return False
    return True


def _constraints(constraints) -> tuple:
    out = []
    for setting, sign in constraints:
        if sign not in (-1, 1):
            raise ValueError("required product sign must be -1 or +1")
        out.append(Constraint(setting_pattern(setting), int(sign)))
    return tuple(out)


GHZ_CONSTRAINTS = tuple(Constraint(p, s) for p, s in zip(GHZ_PATTERNS, GHZ_SIGNS))


@dataclass(frozen=True)
class FeasibilityReport:
    satisfying_count: int
    total: int
    max_satisfiable: int
    witness: LhvStrategy | None
    constraints: tuple = ()

    def to_json(self) -> str:
        return json.dumps({
            "satisfying_count": self.satisfying_count,
            "total": self.total,
            "max_satisfiable": self.max_satisfiable,
            "witness": None if self.witness is None else self.witness._asdict(),
        })


def lhv_enumerate(constraints=GHZ_CONSTRAINTS) -> FeasibilityReport:
    """Check every deterministic local assignment against the constraints.

    The witness is the first strategy (in :data:`STRATEGIES` order) meeting
    the largest number of constraints.
    """
    cons = _constraints(constraints)
    s = _STRATEGY_MATRIX
    met = np.zeros((len(s), len(cons)), dtype=bool)
    for k, (pattern, sign) in enumerate(cons):
        cols = [2 * p + (kind == "y") for p, kind in enumerate(pattern)]
        met[:, k] = s[:, cols].prod(axis=1) == sign
    hits = met.sum(axis=1)
    best = int(np.argmax(hits)) if len(cons) else 0
    return FeasibilityReport(
        satisfying_count=int(np.count_nonzero(hits == len(cons))),
        total=len(s),
        max_satisfiable=int(hits[best]) if len(cons) else 0,
        witness=STRATEGIES[best],
        constraints=cons,
    )


@dataclass(frozen=True)
class InfeasibilityProof:
    constraints: tuple
    satisfying_sets: tuple  # frozenset of strategies per constraint
    intersection: frozenset

    @property
    def feasible(self) -> bool:
        return bool(self.intersection)

    @property
    def witness(self) -> LhvStrategy | None:
        """Point mass meeting all constraints, when one exists."""
        return min(self.intersection) if self.intersection else None


def joint_feasibility(constraints=GHZ_CONSTRAINTS) -> InfeasibilityProof:
    """Can one distribution over strategies give every constraint probability one?

    It can iff some strategy meets all of them: probability one for a
    constraint means the distribution lives inside its satisfying set.
    """
    cons = _constraints(constraints)
    sets = tuple(frozenset(st for st in STRATEGIES if st.product(c.pattern) == c.sign) for c in cons)
    inter = frozenset.intersection(*sets) if sets else frozenset(STRATEGIES)
    return InfeasibilityProof(cons, sets, inter)


# -- gedanken kollektiv --------------------------------------------------------

@dataclass(frozen=True)
class SettingRecord:
    setting: Setting
    correlation: float
    certified_sign: int | None
    n: int = 0
    mean_product: float | None = None
    sign_fraction: float | None = None  # share of draws with the certified sign

    @property
    def matches(self) -> bool | None:
        if self.certified_sign is None or self.n == 0:
            return None
        return self.sign_fraction == 1.0


@dataclass(frozen=True)
class NonCombinabilityReport:
    records: tuple
    certificate: InfeasibilityProof | None
    collectives: tuple = field(default=(), repr=False)

    @property
    def empirical(self) -> tuple:
        return tuple(r for r in self.records if r.n > 0)

    @property
    def empirical_ok(self) -> bool:
        return all(r.matches is not False for r in self.records)

    @property
    def non_combinable(self) -> bool:
        """True when the certain per-setting signs cannot come from one joint assignment."""
        return self.certificate is not None and not self.certificate.feasible


def gedanken_audit(state=None, n: int = 10_000, seed: int = 0,
                   settings: Sequence[Setting] = CANONICAL_SETTINGS) -> NonCombinabilityReport:
    """Sample each setting, confirm its certain sign, and test for a common master sequence.

    Each setting draws from its own substream of ``seed``. The certificate is
    computed from the settings that have a probability-one sign and phases in
    {0, pi/2} (the only ones the six-value strategies describe); it is None
    when there are none.
    """
    state = TripleState.ghz() if state is None else _state(state)
    records, collectives, cons = [], [], []
    for i, s in enumerate(settings):
        s = Setting(*s)
        sign = certified_sign(state, s)
        rec = SettingRecord(s, correlation(state, s), sign)
        if n > 0:
            c = sample_setting_collective(state, s, n, _rng.derive_seed(seed, i))
            prods = products(c)
            frac = float(np.mean(prods == sign)) if sign is not None else None
            rec = SettingRecord(s, rec.correlation, sign, n, float(prods.mean()), frac)
            collectives.append(c)
        if sign is not None and _is_xy(s):
            cons.append((s, sign))
        records.append(rec)
    certificate = joint_feasibility(cons) if cons else None
    return NonCombinabilityReport(tuple(records), certificate, tuple(collectives))
