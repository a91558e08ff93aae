"""Vector-field generators and finite operator words.

Generators: spatial derivatives d_k, the time derivative dt, rotations
O_ij = x_i d_j - x_j d_i, the scaling S = t dt + x . grad, boosts
L_k = x_k dt + t d_k, and their speed-scaled variants
Lt_k = (1/c) x_k dt + c t d_k.

A word stores the generator sequence left to right in operator order, so
``OperatorWord.from_text("d1 O12 S")`` is the operator d_1 O_12 S and is
applied to a function S-first.  Energy-norm words are kept in the canonical
multi-index form d^a O^b S^d (S innermost, at most one S, no dt or boosts).
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

__all__ = [
    "Generator",
    "OperatorWord",
    "WordError",
    "rotation_pairs",
    "enumerate_words",
    "nkappa_index_set",
]


class WordError(ValueError):
    """Malformed generator or word."""


_KINDS = ("space", "time", "rotation", "scaling", "lorentz", "scaled_lorentz")


@dataclass(frozen=True)
class Generator:
    kind: str
    i: int = 0
    j: int = 0
    speed: float = 0.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise WordError(f"unknown generator kind {self.kind!r}")
        if self.kind == "rotation" and not self.i < self.j:
            raise WordError("rotation indices must satisfy i < j")
        if self.kind == "scaled_lorentz" and self.speed <= 0:
            raise WordError("scaled Lorentz generator needs a positive speed")

    @staticmethod
    def space(k: int) -> "Generator":
        return Generator("space", i=k)

    @staticmethod
    def time() -> "Generator":
        return Generator("time")

    @staticmethod
    def rotation(i: int, j: int) -> "Generator":
        return Generator("rotation", i=i, j=j)

    @staticmethod
    def scaling() -> "Generator":
        return Generator("scaling")

    @staticmethod
    def lorentz(k: int) -> "Generator":
        return Generator("lorentz", i=k)

    @staticmethod
    def scaled_lorentz(k: int, speed: float) -> "Generator":
        return Generator("scaled_lorentz", i=k, speed=speed)

    def validate_dimension(self, dim: int) -> None:
        if self.kind == "space" and not 1 <= self.i <= dim:
            raise WordError(f"d{self.i} out of range for dimension {dim}")
        if self.kind == "rotation" and not (1 <= self.i < self.j <= dim):
            raise WordError(f"O{self.i}{self.j} out of range for dimension {dim}")
        if self.kind in ("lorentz", "scaled_lorentz") and not 1 <= self.i <= dim:
            raise WordError(f"boost index {self.i} out of range for dimension {dim}")

    def to_text(self) -> str:
        if self.kind == "space":
            return f"d{self.i}"
        if self.kind == "time":
            return "dt"
        if self.kind == "rotation":
            return f"O{self.i}{self.j}"
        if self.kind == "scaling":
            return "S"
        if self.kind == "lorentz":
            return f"L{self.i}"
        return f"Lt{self.i}@{self.speed!r}"


_TOKEN = re.compile(
    r"^(?:d(?P<space>\d)|(?P<time>dt)|O(?P<roti>\d)(?P<rotj>\d)|(?P<scaling>S)"
    r"|Lt(?P<slk>\d)@(?P<speed>[^\s]+)|L(?P<lk>\d))$"
)


def _parse_token(tok: str) -> Generator:
    m = _TOKEN.match(tok)
    if m is None:
        raise WordError(f"cannot parse generator token {tok!r}")
    if m.group("space"):
        return Generator.space(int(m.group("space")))
    if m.group("time"):
        return Generator.time()
    if m.group("roti"):
        return Generator.rotation(int(m.group("roti")), int(m.group("rotj")))
    if m.group("scaling"):
        return Generator.scaling()
    if m.group("slk"):
        return Generator.scaled_lorentz(int(m.group("slk")), float(m.group("speed")))
    return Generator.lorentz(int(m.group("lk")))


def rotation_pairs(dim: int) -> tuple:
    return tuple((i, j) for i in range(1, dim + 1) for j in range(i + 1, dim + 1))


@dataclass(frozen=True)
class OperatorWord:
    """A word in the generator algebra over a fixed spatial dimension."""

    dim: int
    gens: tuple = field(default=())

    def __post_init__(self):
        for g in self.gens:
            g.validate_dimension(self.dim)

    @property
    def order(self) -> int:
        return len(self.gens)

    @property
    def s_count(self) -> int:
        return sum(1 for g in self.gens if g.kind == "scaling")

    @property
    def is_energy_admissible(self) -> bool:
        """Usable inside the generalized energies: d^a O^b S^d, d <= 1."""
        if self.s_count > 1:
            return False
        if any(g.kind in ("time", "lorentz", "scaled_lorentz") for g in self.gens):
            return False
        kinds = [g.kind for g in self.gens]
        # canonical order: all space, then rotations, then at most one S
        rank = {"space": 0, "rotation": 1, "scaling": 2}
        return all(rank[a] <= rank[b] for a, b in zip(kinds, kinds[1:]))

    @property
    def is_spatial_rotational(self) -> bool:
        return all(g.kind in ("space", "rotation") for g in self.gens)

    def multi_index(self) -> tuple:
        """(a, b, d) for canonical words d^a O^b S^d."""
        if not self.is_energy_admissible:
            raise WordError(f"word {self.to_text()!r} is not in canonical energy form")
        a = [0] * self.dim
        b = [0] * len(rotation_pairs(self.dim))
        d = 0
        pairs = {p: idx for idx, p in enumerate(rotation_pairs(self.dim))}
        for g in self.gens:
            if g.kind == "space":
                a[g.i - 1] += 1
            elif g.kind == "rotation":
                b[pairs[(g.i, g.j)]] += 1
            else:
                d += 1
        return tuple(a), tuple(b), d

    @classmethod
    def from_multi_index(cls, dim: int, a, b, d: int) -> "OperatorWord":
        gens = []
        for k, count in enumerate(a, start=1):
            gens.extend([Generator.space(k)] * count)
        for (i, j), count in zip(rotation_pairs(dim), b):
            gens.extend([Generator.rotation(i, j)] * count)
        gens.extend([Generator.scaling()] * d)
        return cls(dim, tuple(gens))

    def to_text(self) -> str:
        return " ".join(g.to_text() for g in self.gens) if self.gens else "1"

    @classmethod
    def from_text(cls, dim: int, text: str) -> "OperatorWord":
        text = text.strip()
        if text in ("", "1"):
            return cls(dim, ())
        return cls(dim, tuple(_parse_token(tok) for tok in text.split()))

    def __mul__(self, other: "OperatorWord") -> "OperatorWord":
        if self.dim != other.dim:
            raise WordError("cannot compose words over different dimensions")
        return OperatorWord(self.dim, self.gens + other.gens)


def nkappa_index_set(dim: int, kappa: int):
    """Multi-indices (a, b, d) with |a| + |b| + d <= kappa - 1 and d <= 1."""
    if kappa < 1:
        raise WordError("kappa must be >= 1")
    n_rot = len(rotation_pairs(dim))
    out = []
    budget = kappa - 1
    for total in range(budget + 1):
        for d in (0, 1):
            if d > total or d > 1:
                continue
            rem = total - d
            for spatial in range(rem + 1):
                rot = rem - spatial
                for a in _compositions(spatial, dim):
                    for b in _compositions(rot, n_rot):
                        out.append((a, b, d))
    return out


def _compositions(total: int, parts: int):
    if parts == 0:
        if total == 0:
            yield ()
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def enumerate_words(dim: int, kappa: int) -> list:
    """All canonical energy words of order <= kappa - 1, deterministic order."""
    return [OperatorWord.from_multi_index(dim, a, b, d) for a, b, d in nkappa_index_set(dim, kappa)]


def brute_force_word_count(dim: int, kappa: int) -> int:
    """Independent count of the ``nkappa_index_set`` size by direct product scan."""
    n_rot = len(rotation_pairs(dim))
    budget = kappa - 1
    count = 0
    ranges = [range(budget + 1)] * (dim + n_rot)
    for combo in itertools.product(*ranges, (0, 1)):
        if sum(combo) <= budget:
            count += 1
    return count
