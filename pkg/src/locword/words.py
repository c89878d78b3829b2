"""Word distributions and stationary potential sampling on the line.

A potential is built by concatenating independent words drawn from a finite
family with fixed weights.  Sampling is stationary: the word covering site 0
is drawn with length-biased probability and site 0 sits at a uniform offset
inside it, so single-site statistics do not depend on the site.

Determinism contract: a realization is a pure function of (distribution,
seed, window).  The word at slot j right (or left) of the origin is the j-th
draw of a dedicated per-seed stream, so enlarging the window, or sampling a
nested window with the same seed, reproduces identical values bit for bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import CoverageError, ParameterError
from .seeding import LANE_LEFT, LANE_ORIGIN, LANE_RIGHT, lane_stream

# Words are drawn from each lane stream in fixed-size batches so that the
# sequence of draws never depends on how much of the line a caller asked for.
_BATCH = 4096

_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class Word:
    """A finite block of potential values."""

    letters: tuple[float, ...]

    def __post_init__(self):
        if len(self.letters) < 1:
            raise ParameterError("a word needs at least one letter")
        object.__setattr__(self, "letters", tuple(float(x) for x in self.letters))

    def __len__(self) -> int:
        return len(self.letters)


@dataclass(frozen=True)
class WordDistribution:
    """Finite weighted family of words.

    `max_length` bounds every word length and `amplitude` bounds every
    letter magnitude; both default to the observed maxima.  Weights must be
    nonnegative and sum to one.  Words with zero weight stay in the family
    but are outside the support.
    """

    words: tuple[Word, ...]
    weights: tuple[float, ...]
    max_length: int = 0
    amplitude: float = 0.0

    def __post_init__(self):
        words = tuple(
            w if isinstance(w, Word) else Word(tuple(w)) for w in self.words
        )
        object.__setattr__(self, "words", words)
        weights = tuple(float(x) for x in self.weights)
        object.__setattr__(self, "weights", weights)
        if len(words) == 0:
            raise ParameterError("need at least one word")
        if len(weights) != len(words):
            raise ParameterError("words and weights differ in length")
        if any(w < 0.0 for w in weights):
            raise ParameterError("weights must be nonnegative")
        if abs(sum(weights) - 1.0) > _WEIGHT_TOL:
            raise ParameterError("weights must sum to 1 within %.0e" % _WEIGHT_TOL)
        obs_len = max(len(w) for w in words)
        obs_amp = max(abs(x) for w in words for x in w.letters)
        if self.max_length == 0:
            object.__setattr__(self, "max_length", obs_len)
        elif self.max_length < obs_len:
            raise ParameterError("max_length smaller than longest word")
        if self.amplitude == 0.0:
            object.__setattr__(self, "amplitude", obs_amp)
        elif self.amplitude < obs_amp:
            raise ParameterError("amplitude smaller than largest letter")

    # cached numeric layout used by the samplers -------------------------

    @cached_property
    def _lengths(self) -> np.ndarray:
        return np.array([len(w) for w in self.words], dtype=np.int64)

    @cached_property
    def _flat_letters(self) -> np.ndarray:
        return np.concatenate([np.asarray(w.letters, dtype=np.float64) for w in self.words])

    @cached_property
    def _flat_starts(self) -> np.ndarray:
        ends = np.cumsum(self._lengths)
        return ends - self._lengths

    @cached_property
    def _cum_weights(self) -> np.ndarray:
        c = np.cumsum(np.asarray(self.weights, dtype=np.float64))
        c[-1] = 1.0
        return c

    @cached_property
    def _cum_length_biased(self) -> np.ndarray:
        lb = self._lengths * np.asarray(self.weights, dtype=np.float64)
        c = np.cumsum(lb / lb.sum())
        c[-1] = 1.0
        return c

    def _ids_to_values(self, ids: np.ndarray) -> np.ndarray:
        """Concatenate the letters of the given word ids into one array."""
        lens = self._lengths[ids]
        total = int(lens.sum())
        ends = np.cumsum(lens)
        within = np.arange(total, dtype=np.int64) - np.repeat(ends - lens, lens)
        return self._flat_letters[np.repeat(self._flat_starts[ids], lens) + within]


def mean_word_length(dist: WordDistribution) -> float:
    """Expected word length under the distribution."""
    return float(np.dot(dist._lengths, dist.weights))


def check_noncommuting(dist: WordDistribution) -> bool:
    """True if some pair of distinct positive-weight words has unequal
    concatenations in the two orders (compared exactly as letter sequences)."""
    support = [w.letters for w, p in zip(dist.words, dist.weights) if p > 0.0]
    for i in range(len(support)):
        for j in range(i + 1, len(support)):
            if support[i] + support[j] != support[j] + support[i]:
                return True
    return False


def preset(name: str, *params: float, words=None, weights=None) -> WordDistribution:
    """Named distributions.

    dimer(lam): words (lam, lam) and (-lam, -lam), weight 1/2 each.
    bernoulli_anderson(a, b, p): single-letter words (a,) and (b,) with
    weights p and 1-p.
    free: the single word (0,).
    custom: pass words= and weights= explicitly.
    """
    if name == "dimer":
        (lam,) = params
        if lam <= 0:
            raise ParameterError("dimer coupling must be positive")
        return WordDistribution(
            words=(Word((lam, lam)), Word((-lam, -lam))), weights=(0.5, 0.5)
        )
    if name == "bernoulli_anderson":
        a, b, p = params
        if not 0.0 < p < 1.0:
            raise ParameterError("bernoulli weight must lie in (0, 1)")
        return WordDistribution(words=(Word((a,)), Word((b,))), weights=(p, 1.0 - p))
    if name == "free":
        if params:
            raise ParameterError("free preset takes no parameters")
        return WordDistribution(words=(Word((0.0,)),), weights=(1.0,))
    if name == "custom":
        if words is None or weights is None:
            raise ParameterError("custom preset needs words= and weights=")
        return WordDistribution(words=tuple(Word(tuple(w)) for w in words), weights=tuple(weights))
    raise ParameterError("unknown preset %r" % name)


def distribution_to_json(dist: WordDistribution) -> str:
    """Serialize as {"words": [[...], ...], "weights": [...]}."""
    payload = {
        "words": [list(w.letters) for w in dist.words],
        "weights": list(dist.weights),
    }
    return json.dumps(payload, sort_keys=True)


def distribution_from_json(text: str) -> WordDistribution:
    payload = json.loads(text)
    try:
        words = payload["words"]
        weights = payload["weights"]
    except (KeyError, TypeError) as exc:
        raise ParameterError("distribution JSON needs 'words' and 'weights'") from exc
    return WordDistribution(tuple(Word(tuple(w)) for w in words), tuple(weights))


# --------------------------------------------------------------------------
# sampling


def _draw_batch(rng: np.random.Generator, cum: np.ndarray) -> np.ndarray:
    """One fixed-size batch of word ids from a lane stream."""
    u = rng.random(_BATCH)
    return np.searchsorted(cum, u, side="right").astype(np.int64)


def _origin_draw(dist: WordDistribution, seed: int) -> tuple[int, int]:
    """Length-biased origin word id and uniform 1-based offset of site 0."""
    g = lane_stream(seed, LANE_ORIGIN)
    wid = int(np.searchsorted(dist._cum_length_biased, g.random(), side="right"))
    length = int(dist._lengths[wid])
    k = int(g.integers(1, length + 1))
    return wid, k


class _Chain:
    """Growable word chain around the origin, in original coordinates.

    Draws right and left lane batches on demand and records, for every
    materialized word, its id and start site.  The origin word always has
    chain index 0; rightward words get 1, 2, ... and leftward -1, -2, ...
    """

    def __init__(self, dist: WordDistribution, seed: int):
        self.dist = dist
        self.seed = seed
        wid, k = _origin_draw(dist, seed)
        self.origin_id = wid
        self.offset = k
        self.origin_start = 1 - k
        self.origin_len = int(dist._lengths[wid])
        self._right = lane_stream(seed, LANE_RIGHT)
        self._left = lane_stream(seed, LANE_LEFT)
        self._right_ids: list[np.ndarray] = []
        self._left_ids: list[np.ndarray] = []
        self._right_end = self.origin_start + self.origin_len - 1
        self._left_start = self.origin_start

    def cover(self, lo: int, hi: int) -> None:
        """Materialize words until sites lo..hi are covered."""
        while self._right_end < hi:
            ids = _draw_batch(self._right, self.dist._cum_weights)
            self._right_ids.append(ids)
            self._right_end += int(self.dist._lengths[ids].sum())
        while self._left_start > lo:
            ids = _draw_batch(self._left, self.dist._cum_weights)
            self._left_ids.append(ids)
            self._left_start -= int(self.dist._lengths[ids].sum())

    def layout(self) -> tuple[np.ndarray, np.ndarray]:
        """(ids, starts) for the whole materialized chain, left to right."""
        left = (
            np.concatenate(self._left_ids)[::-1]
            if self._left_ids
            else np.empty(0, dtype=np.int64)
        )
        right = (
            np.concatenate(self._right_ids)
            if self._right_ids
            else np.empty(0, dtype=np.int64)
        )
        ids = np.concatenate([left, [self.origin_id], right])
        lens = self.dist._lengths[ids]
        ends = np.cumsum(lens)
        starts = self._left_start + ends - lens
        return ids, starts


@dataclass(frozen=True, eq=False)
class PotentialRealization:
    """A sampled potential on an integer window.

    `values[i]` is the potential at site `window[0] + i`.  `boundaries`
    lists the sites inside the window where a new word begins, so the values
    between adjacent boundaries reproduce a support word exactly.
    `origin_offset` is the 1-based position of site 0 inside its covering
    word.  `frame` tracks accumulated shifts; values satisfy
    V_frame(n) = V_0(n + frame).
    """

    distribution: WordDistribution
    seed: int
    window: tuple[int, int]
    values: np.ndarray
    boundaries: np.ndarray
    origin_offset: int
    frame: int = 0
    _cover_start: int = field(default=0, repr=False)
    _cover_len: int = field(default=0, repr=False)
    _starts: np.ndarray = field(default=None, repr=False)
    _lengths: np.ndarray = field(default=None, repr=False)

    def value(self, n: int) -> float:
        a, b = self.window
        if not a <= n <= b:
            raise CoverageError("site %d outside window [%d, %d]" % (n, a, b))
        return float(self.values[n - a])

    def extended(self, window: tuple[int, int]) -> "PotentialRealization":
        """Same seed and frame on a different window; values agree on overlap."""
        return _materialize(self.distribution, self.seed, window, self.frame)


def _materialize(
    dist: WordDistribution, seed: int, window: tuple[int, int], frame: int
) -> PotentialRealization:
    a, b = int(window[0]), int(window[1])
    if a > b:
        raise ParameterError("window must satisfy a <= b")
    lo, hi = a + frame, b + frame  # original coordinates
    chain = _Chain(dist, seed)
    chain.cover(min(lo, frame), max(hi, frame))
    ids, starts = chain.layout()

    # slice out the values on [lo, hi]
    first = int(np.searchsorted(starts, lo, side="right")) - 1
    last = int(np.searchsorted(starts, hi, side="right")) - 1
    ids_w = ids[first : last + 1]
    starts_w = starts[first : last + 1]
    letters = dist._ids_to_values(ids_w)
    vals = letters[lo - int(starts_w[0]) : lo - int(starts_w[0]) + (hi - lo + 1)]

    # covering word of shifted site 0 (original site `frame`)
    j = int(np.searchsorted(starts, frame, side="right")) - 1
    cover_start = int(starts[j]) - frame
    cover_len = int(dist._lengths[ids[j]])
    offset = frame - int(starts[j]) + 1

    starts_shifted = starts_w - frame
    inside = (starts_shifted >= a) & (starts_shifted <= b)
    return PotentialRealization(
        distribution=dist,
        seed=seed,
        window=(a, b),
        values=np.ascontiguousarray(vals),
        boundaries=starts_shifted[inside].copy(),
        origin_offset=offset,
        frame=frame,
        _cover_start=cover_start,
        _cover_len=cover_len,
        _starts=starts_shifted,
        _lengths=dist._lengths[ids_w].copy(),
    )


def sample_potential(
    dist: WordDistribution, seed: int, window: tuple[int, int]
) -> PotentialRealization:
    """Stationary realization of the word potential on `window`."""
    return _materialize(dist, seed, window, frame=0)


def shift_realization(r: PotentialRealization, t: int) -> PotentialRealization:
    """Translate the potential: the result has V'(n) = V(n + t) on the same
    window, extending the underlying word chain deterministically from the
    same seed where needed."""
    return _materialize(r.distribution, r.seed, r.window, r.frame + int(t))


class ValueStream:
    """Consecutive potential values for sites 1, 2, ... of one realization.

    Chunked access for long cocycle runs: `take(n)` returns the next n
    values.  Uses the same lane streams and batch discipline as
    `sample_potential`, so the emitted values match the realization with the
    same seed bit for bit.
    """

    def __init__(self, dist: WordDistribution, seed: int):
        self.dist = dist
        chain = _Chain(dist, seed)
        wid, k = chain.origin_id, chain.offset
        letters = np.asarray(dist.words[wid].letters, dtype=np.float64)
        # letters of the origin word from site 1 onward (may be empty)
        self._carry = [letters[k:]] if k < len(letters) else []
        self._carry_len = len(letters) - k if k < len(letters) else 0
        self._rng = lane_stream(seed, LANE_RIGHT)

    def take(self, n: int) -> np.ndarray:
        while self._carry_len < n:
            ids = _draw_batch(self._rng, self.dist._cum_weights)
            vals = self.dist._ids_to_values(ids)
            self._carry.append(vals)
            self._carry_len += len(vals)
        buf = np.concatenate(self._carry) if len(self._carry) != 1 else self._carry[0]
        out = buf[:n]
        rest = buf[n:]
        self._carry = [rest] if len(rest) else []
        self._carry_len = len(rest)
        return out


@dataclass(frozen=True)
class WordScales:
    """Word-counting scales for one realization.

    `s_n` is the total length of the n words right of the word covering
    site 0, `lengths` their individual lengths, and `r_n`, `q_n` the derived
    inner and outer scales (`q_n = s_n + 2 * max_length`)."""

    n: int
    s_n: int
    lengths: tuple[int, ...]
    r_n: int
    q_n: int


def random_scales(r: PotentialRealization, n: int) -> WordScales:
    """Scales built from the n words right of the covering word of site 0.

    Requires the window to contain those n words entirely."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    first = r._cover_start + r._cover_len
    j = int(np.searchsorted(r._starts, first))
    if j >= len(r._starts) or int(r._starts[j]) != first or j + n > len(r._starts):
        raise CoverageError("window does not cover %d words right of origin" % n)
    lens = r._lengths[j : j + n]
    end = int(r._starts[j + n - 1]) + int(lens[-1]) - 1
    if end > r.window[1]:
        raise CoverageError("window does not cover %d words right of origin" % n)
    s = int(lens.sum())
    y0 = r._cover_len
    k = r.origin_offset
    half = s // 2 if s % 2 == 0 else (s - 1) // 2
    r_n = half - y0 - k + 1
    q_n = s + 2 * r.distribution.max_length
    return WordScales(n=n, s_n=s, lengths=tuple(int(x) for x in lens), r_n=r_n, q_n=q_n)
