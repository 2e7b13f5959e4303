"""Binary symmetric channel simulation and decoding objectives.

The solver works on the log-likelihood objective sum(gamma_i * f_i); every
report also carries the Hamming value through the affine identity

    sum(gamma_i * f_i) = a * hamming(r, f) - a * popcount(r),
    a = log((1 - p) / p),

so for p < 0.5 the two objectives rank solutions identically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .codes import GeneratorMatrix, _as_bits, encode


def random_message(rng: np.random.Generator, k: int) -> np.ndarray:
    """One uniform message draw; the shared primitive for instance creation
    and warm-start trials so that equal seeds replay equal messages."""
    return rng.integers(0, 2, size=k, dtype=np.uint8)


def transmit_bsc(v, p: float, seed) -> np.ndarray:
    """Flip each bit of v independently with probability p."""
    bits = _as_bits(v)
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"flip probability {p} outside [0, 1]")
    rng = np.random.default_rng(seed)
    flips = rng.random(bits.size) < p
    return (bits ^ flips).astype(np.uint8)


def log_likelihood_gammas(r, p: float) -> np.ndarray:
    """Per-bit objective coefficients: log(p/(1-p)) where r_i = 1, else
    log((1-p)/p). Natural logarithm; p must lie strictly inside (0, 1)."""
    bits = _as_bits(r)
    if not 0.0 < p < 1.0:
        raise ValueError(f"gamma coefficients undefined for p={p}")
    a = math.log((1.0 - p) / p)
    return np.where(bits == 1, -a, a).astype(np.float64)


def gamma_magnitude(p: float) -> float:
    """a = log((1-p)/p), the spacing between integral objective levels."""
    if not 0.0 < p < 1.0:
        raise ValueError(f"gamma magnitude undefined for p={p}")
    return math.log((1.0 - p) / p)


def hamming_distance(x, y) -> int:
    a = _as_bits(x)
    b = _as_bits(y, a.size)
    return int(np.count_nonzero(a != b))


def ber(v, y) -> float:
    """Fraction of decoded bits differing from the original codeword."""
    a = _as_bits(v)
    b = _as_bits(y, a.size)
    return float(np.count_nonzero(a != b)) / a.size


def hamming_from_loglik(obj: float, r, p: float) -> float:
    """Convert a log-likelihood objective value to the Hamming scale."""
    ones = int(np.count_nonzero(_as_bits(r)))
    return obj / gamma_magnitude(p) + ones


@dataclass
class ChannelInstance:
    """A transmission: original codeword v, received word r, error rate p.

    `generate` draws the message as the first draw from the instance RNG
    stream, then the channel flips; replaying the seed replays both.
    """

    v: np.ndarray
    r: np.ndarray
    p: float
    seed: int | None = None

    def __post_init__(self):
        self.v = _as_bits(self.v)
        self.r = _as_bits(self.r, self.v.size)

    @property
    def n(self) -> int:
        return self.v.size

    @classmethod
    def generate(cls, g: GeneratorMatrix, p: float, seed) -> "ChannelInstance":
        rng = np.random.default_rng(seed)
        u = random_message(rng, g.k_eff)
        v = encode(g, u)
        flips = rng.random(g.n) < p
        r = (v ^ flips).astype(np.uint8)
        return cls(v, r, p, seed)

    def gammas(self) -> np.ndarray:
        return log_likelihood_gammas(self.r, self.p)

    def errors(self) -> int:
        return hamming_distance(self.v, self.r)

    def to_text(self) -> str:
        v = "".join(str(b) for b in self.v)
        r = "".join(str(b) for b in self.r)
        seed = self.seed if self.seed is not None else -1
        return f"{self.n} {self.p!r} {seed}\n{v}\n{r}\n"

    @classmethod
    def from_text(cls, text: str) -> "ChannelInstance":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if len(lines) != 3:
            raise ValueError("instance file needs a header line plus v and r lines")
        n_s, p_s, seed_s = lines[0].split()
        n, p, seed = int(n_s), float(p_s), int(seed_s)
        v = np.frombuffer(lines[1].encode(), dtype=np.uint8) - ord("0")
        r = np.frombuffer(lines[2].encode(), dtype=np.uint8) - ord("0")
        if v.size != n or r.size != n:
            raise ValueError("v/r length disagrees with header")
        if not (np.isin(v, (0, 1)).all() and np.isin(r, (0, 1)).all()):
            raise ValueError("v/r lines must be ASCII 0/1 strings")
        return cls(v, r, p, seed if seed >= 0 else None)

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def load(cls, path) -> "ChannelInstance":
        with open(path) as fh:
            return cls.from_text(fh.read())
