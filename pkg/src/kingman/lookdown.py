"""The look-down particle system: events, state replay, line sampling.

Levels 1..N each carry one line. Ordered pairs i < k ring at unit rate; at a
ring the line at level i begets a new line at level k, lines at levels >= k
are pushed up one, and the line formerly at level N exits. Level 1 is
immortal and holds no birth time; the state tracks the birth times of the
lines at levels 2..N.

Two samplers cover the infinite-level system: :func:`sample_line_lifelength`
draws the total life length of a line born at a given level (sum of
exponential sojourn times with rates C(j,2), truncated at a documented
tolerance with the deterministic tail mean added back), and
:func:`sample_infinite_deaths` builds the death point process of one level
over a window via Poisson births on a burn-in-extended window.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .rng import RngStream, sample_poisson_times

__all__ = [
    "Event",
    "EventLog",
    "LineRecord",
    "LookdownState",
    "PointProcessSample",
    "SequencingError",
    "decode_pair",
    "default_burn_in",
    "pair_count",
    "resolve_final_state",
    "sample_infinite_deaths",
    "sample_line_lifelength",
    "sample_stationary_state",
    "simulate_events",
    "stationary_births",
    "truncation_level_for",
]


class SequencingError(ValueError):
    """An event was applied out of time order."""


def pair_count(n: int) -> int:
    """Number of ordered pairs i < k with k <= n, i.e. C(n, 2)."""
    return n * (n - 1) // 2


# ---------------------------------------------------------------------------
# Events
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    """A birth arrow: at `time`, level `source` begets a line at `target`."""

    time: float
    source: int
    target: int

    def __post_init__(self) -> None:
        if not (1 <= self.source < self.target):
            raise ValueError(
                f"need 1 <= source < target, got ({self.source}, {self.target})"
            )


def decode_pair(codes: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Map uniform integers in [0, C(N,2)) to ordered pairs (source, target).

    Decoding order: targets ascending, sources ascending within a target.
    Code m covers target k when C(k-1,2) <= m < C(k,2), with
    source = m - C(k-1,2) + 1. The float sqrt inversion is corrected by an
    exact integer step, so the decode is exact for any N whose pair count
    fits in a double's integer range (N well beyond 10^7).
    """
    m = np.asarray(codes, dtype=np.int64)
    k = ((3.0 + np.sqrt(8.0 * m + 1.0)) / 2.0).astype(np.int64)
    # Correct rare off-by-one from float rounding.
    low = (k - 1) * (k - 2) // 2
    k = np.where(low > m, k - 1, k)
    high = k * (k - 1) // 2
    k = np.where(m >= high, k + 1, k)
    low = (k - 1) * (k - 2) // 2
    i = m - low + 1
    return i.astype(np.int64), k.astype(np.int64)


@dataclass
class EventLog:
    """Time-ordered birth events of the N-level system on a window.

    Canonical storage is struct-of-arrays (times, sources, targets) for
    replay speed; Event objects are materialized on demand.
    """

    N: int
    t_start: float
    t_end: float
    times: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    tie_perturbations: int = 0

    def __post_init__(self) -> None:
        if self.N < 2:
            raise ValueError("N must be at least 2")
        if self.t_start > self.t_end:
            raise ValueError("window start exceeds end")
        t = np.asarray(self.times, dtype=np.float64)
        if t.size:
            if not (np.all(t > self.t_start) and np.all(t <= self.t_end)):
                raise ValueError("event times must lie in (t_start, t_end]")
            if not np.all(np.diff(t) > 0.0):
                raise SequencingError("event times must be strictly increasing")
        s = np.asarray(self.sources, dtype=np.int64)
        k = np.asarray(self.targets, dtype=np.int64)
        if not (t.size == s.size == k.size):
            raise ValueError("times/sources/targets lengths differ")
        if t.size and not np.all((1 <= s) & (s < k) & (k <= self.N)):
            raise ValueError("pairs must satisfy 1 <= source < target <= N")
        self.times, self.sources, self.targets = t, s, k

    @property
    def n_events(self) -> int:
        return int(self.times.size)

    @property
    def window(self) -> tuple[float, float]:
        return (self.t_start, self.t_end)

    def __len__(self) -> int:
        return self.n_events

    def __iter__(self):
        for idx in range(self.n_events):
            yield Event(
                float(self.times[idx]), int(self.sources[idx]), int(self.targets[idx])
            )

    @classmethod
    def from_events(
        cls, N: int, window: tuple[float, float], events: list[Event]
    ) -> "EventLog":
        return cls(
            N=N,
            t_start=float(window[0]),
            t_end=float(window[1]),
            times=np.array([e.time for e in events], dtype=np.float64),
            sources=np.array([e.source for e in events], dtype=np.int64),
            targets=np.array([e.target for e in events], dtype=np.int64),
        )

    # -- CSV interface (columns: time,source,target) -----------------------

    def write_csv(self, fp: io.TextIOBase, header_comments: dict | None = None) -> None:
        from .reports import format_float, write_header_comments

        meta = {"N": self.N, "t_start": self.t_start, "t_end": self.t_end}
        if header_comments:
            meta.update(header_comments)
        write_header_comments(fp, meta)
        fp.write("time,source,target\n")
        for idx in range(self.n_events):
            fp.write(
                f"{format_float(self.times[idx])},"
                f"{int(self.sources[idx])},{int(self.targets[idx])}\n"
            )

    @classmethod
    def read_csv(cls, fp: io.TextIOBase) -> "EventLog":
        from .reports import read_header_comments

        meta, rows = read_header_comments(fp, expected_header="time,source,target")
        times = np.array([float(r[0]) for r in rows])
        sources = np.array([int(r[1]) for r in rows], dtype=np.int64)
        targets = np.array([int(r[2]) for r in rows], dtype=np.int64)
        return cls(
            N=int(meta["N"]),
            t_start=float(meta["t_start"]),
            t_end=float(meta["t_end"]),
            times=times,
            sources=sources,
            targets=targets,
        )


def simulate_events(
    N: int, window: tuple[float, float], stream: RngStream
) -> EventLog:
    """Simulate the full event stream of the N-level system on (a, b].

    Total rate is C(N,2); each event's ordered pair is decoded from a single
    uniform integer in [0, C(N,2)) (see :func:`decode_pair` for the order).
    An empty window (a == b) yields an empty log; a > b is a parameter error.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    a, b = float(window[0]), float(window[1])
    if a > b:
        raise ValueError(f"window start {a} exceeds end {b}")
    if a == b:
        empty = np.empty(0)
        return EventLog(N, a, b, empty, empty.astype(np.int64), empty.astype(np.int64))
    rate = float(pair_count(N))
    times = sample_poisson_times(stream, rate, (a, b))
    codes = stream.generator.integers(0, pair_count(N), size=times.size)
    sources, targets = decode_pair(codes)
    return EventLog(N=N, t_start=a, t_end=b, times=times, sources=sources, targets=targets)


# ---------------------------------------------------------------------------
# Finite-N state
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LineRecord:
    """A finished line: born at `birth_level`, exited when pushed past N.

    For lines sampled in the infinite system, `truncation_level` records the
    level J at which the exponential sum was cut and `tail_bias_bound` the
    replaced tail mean 2/(J-1); finite-N replay lines carry None and 0.
    """

    birth_time: float
    birth_level: int
    exit_time: float
    life_length: float
    truncation_level: int | None = None
    tail_bias_bound: float = 0.0

    def __post_init__(self) -> None:
        if self.birth_level < 2:
            raise ValueError("birth_level must be at least 2")
        if self.exit_time < self.birth_time:
            raise ValueError("exit precedes birth")
        expect = self.exit_time - self.birth_time
        tol = 1e-12 * max(1.0, abs(expect))
        if abs(self.life_length - expect) > tol:
            raise ValueError("life_length inconsistent with birth/exit times")


class LookdownState:
    """Birth times of the lines at levels 2..N at the current time.

    Maintains a running sum of births (tree length in O(1)) and the minimum
    birth time (the MRCA time of the current population). Mutated in place
    by :meth:`step`, which returns the exited line's record.
    """

    __slots__ = ("N", "now", "_births", "_levels", "_sum", "_min")

    def __init__(self, N: int, now: float, births, birth_levels=None) -> None:
        if N < 2:
            raise ValueError("N must be at least 2")
        births = [float(x) for x in births]
        if len(births) != N - 1:
            raise ValueError(f"need {N - 1} birth times for levels 2..{N}")
        if any(x > now for x in births):
            raise ValueError("birth times cannot exceed the current time")
        if birth_levels is None:
            birth_levels = list(range(2, N + 1))
        birth_levels = [int(x) for x in birth_levels]
        if len(birth_levels) != N - 1 or any(x < 2 for x in birth_levels):
            raise ValueError("birth levels must list one level >= 2 per line")
        self.N = N
        self.now = float(now)
        self._births = births
        self._levels = birth_levels
        self._sum = math.fsum(births)
        self._min = min(births)

    # -- constructors -------------------------------------------------------

    @classmethod
    def degenerate(cls, N: int, t0: float) -> "LookdownState":
        """All lines born at t0. Use as a pre-window replay start only."""
        return cls(N, t0, [t0] * (N - 1))

    # -- views --------------------------------------------------------------

    @property
    def birth_time_of_level(self) -> np.ndarray:
        """Birth times indexed by level: entry j is level j+2's birth."""
        return np.asarray(self._births, dtype=np.float64)

    @property
    def birth_level_of_level(self) -> np.ndarray:
        return np.asarray(self._levels, dtype=np.int64)

    @property
    def sum_births(self) -> float:
        return self._sum

    @property
    def min_birth(self) -> float:
        """Earliest birth among current lines: the MRCA time."""
        return self._min

    def copy(self) -> "LookdownState":
        return LookdownState(self.N, self.now, list(self._births), list(self._levels))

    # -- dynamics ------------------------------------------------------------

    def step(self, event: Event) -> LineRecord:
        """Apply one event: insert at the target, push up, exit level N.

        The state is mutated in place; the exited line's record is returned.
        An event at or before the current time is a sequencing error.
        """
        if event.time <= self.now:
            raise SequencingError(
                f"event at {event.time} does not advance time from {self.now}"
            )
        if event.target > self.N:
            raise ValueError(f"target {event.target} exceeds N={self.N}")
        births, levels = self._births, self._levels
        exited_birth = births.pop()
        exited_level = levels.pop()
        births.insert(event.target - 2, event.time)
        levels.insert(event.target - 2, event.target)
        self._sum += event.time - exited_birth
        if exited_birth <= self._min:
            # The oldest line exited; rescan. The inserted time never lowers
            # the minimum because event.time > now >= every birth.
            self._min = min(births)
        self.now = event.time
        return LineRecord(
            birth_time=exited_birth,
            birth_level=exited_level,
            exit_time=event.time,
            life_length=event.time - exited_birth,
        )


def stationary_births(N: int, t0: float, stream: RngStream) -> np.ndarray:
    """Stationary per-level birth times at t0, as an array for levels 2..N.

    Built backward from t0. Tracing the current lines backward, their
    ancestral trajectories always occupy the bottom block of levels
    {1, ..., m}; with m of them left the next merger lies Exp(C(m,2)) deeper
    and its ordered pair is uniform over the C(m,2) pairs inside the block.
    The trajectory at block level `target` is the one born there, so the
    merger resolves the birth time of the (target-1)-th smallest unresolved
    current level. The resulting tree length reproduces the static length
    law sum_k k Exp(C(k,2)) exactly.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    m = np.arange(N, 1, -1, dtype=np.int64)
    rates = (m * (m - 1) // 2).astype(np.float64)
    depths = np.cumsum(stream.exponentials(1.0, N - 1) / rates)
    codes = stream.generator.integers(0, m * (m - 1) // 2)
    _, targets = decode_pair(codes)
    return t0 - _kernels.assign_levels(N, targets, depths)


def sample_stationary_state(N: int, t0: float, stream: RngStream) -> "LookdownState":
    """Draw the stationary state at t0 (see :func:`stationary_births`).

    Birth levels are not resolved by this construction (a stationary line's
    original birth level is below its current level); they are set to 2 as a
    conservative placeholder, which only affects LineRecord metadata of lines
    that exit later, never the tree length.
    """
    births = stationary_births(N, t0, stream)
    return LookdownState(N, t0, births, [2] * (N - 1))


def resolve_final_state(log: EventLog, initial_births) -> np.ndarray:
    """Births of levels 2..N at log.t_end, computed backward from the log.

    Dual route to forward replay. Scanning events last-to-first, the final
    lines' ancestral trajectories occupy the bottom block of levels
    {1, ..., K}; an event with target k <= K is the birth of the final line
    whose trajectory sits at block level k (the (k-1)-th smallest unresolved
    final level), and shrinks the block. Final levels still unresolved at
    the window start sat at their block levels then, so they inherit the
    initial births of levels 2..K in order. Matches forward replay exactly,
    float for float.
    """
    initial = [float(x) for x in initial_births]
    if len(initial) != log.N - 1:
        raise ValueError(f"need {log.N - 1} initial birth times")
    births = np.empty(log.N - 1)
    unresolved = list(range(2, log.N + 1))
    targets = log.targets.tolist()
    times = log.times.tolist()
    block = len(unresolved) + 1
    for idx in range(log.n_events - 1, -1, -1):
        k = targets[idx]
        if k > block:
            continue
        level = unresolved.pop(k - 2)
        births[level - 2] = times[idx]
        block -= 1
        if block == 1:
            break
    for block_pos, level in enumerate(unresolved):
        births[level - 2] = initial[block_pos]
    return births


# ---------------------------------------------------------------------------
# Infinite-level line sampling
# ---------------------------------------------------------------------------

def truncation_level_for(birth_level: int, tol: float) -> int:
    """Smallest level J >= birth_level with tail mean 2/(J-1) <= tol."""
    if birth_level < 2:
        raise ValueError("birth_level must be at least 2")
    if tol <= 0.0:
        raise ValueError("tol must be positive")
    return max(birth_level, 1 + math.ceil(2.0 / tol))


def sample_line_lifelength(
    birth_level: int, stream: RngStream, tol: float = 1e-6
) -> float:
    """Total life length of a line born at `birth_level` in the infinite system.

    The line sojourns Exp(C(j,2)) at each level j >= birth_level; the sum is
    truncated at J = smallest level with tail mean 2/(J-1) <= tol and the
    deterministic tail mean is added back, so E[T] = 2/(birth_level - 1)
    exactly for every tol while the discarded tail variance is below
    (4/3) J^-3.
    """
    return float(_lifelength_matrix(birth_level, 1, stream, tol)[0])


def _lifelength_matrix(
    birth_level: int, count: int, stream: RngStream, tol: float
) -> np.ndarray:
    """`count` i.i.d. life lengths for one birth level (vectorized).

    Works in row blocks of at most ~40M draws so deep truncations (small
    tol) never materialize a multi-GB matrix.
    """
    J = truncation_level_for(birth_level, tol)
    tail = 2.0 / (J - 1)
    if count == 0:
        return np.empty(0)
    if J == birth_level:
        return np.full(count, tail)
    width = J - birth_level
    j = np.arange(birth_level, J, dtype=np.float64)
    inv_rates = 2.0 / (j * (j - 1.0))
    out = np.empty(count)
    block = max(1, 40_000_000 // width)
    for lo in range(0, count, block):
        hi = min(count, lo + block)
        draws = stream.generator.standard_exponential((hi - lo, width))
        out[lo:hi] = draws @ inv_rates + tail
    return out


def default_burn_in(level: int, chernoff_exponent: float = 40.0) -> float:
    """Burn-in long enough that a line born before it is dead at the window.

    From the Chernoff bound P(T_level > B) <= exp(level - C(level,2) B / 2),
    taking B = 2 (level + c) / C(level,2) gives miss probability <= e^-c.
    The result is capped at 50, the documented safe span for level 2.
    """
    if level < 2:
        raise ValueError("level must be at least 2")
    bound = 2.0 * (level + chernoff_exponent) / pair_count(level)
    return min(50.0, bound)


@dataclass(frozen=True)
class PointProcessSample:
    """Deaths of one level's lines inside a window, with their life lengths.

    death_times is sorted and lies in (window[0], window[1]]; life_lengths
    aligns with it. Lines are born on (window[0] - burn_in, window[1]] at
    Poisson rate (level - 1) and die a life length later, so every death in
    the window is captured up to the documented burn-in miss probability.
    """

    level: int
    window: tuple[float, float]
    death_times: np.ndarray
    life_lengths: np.ndarray
    burn_in: float
    tol: float
    truncation_level: int

    def __post_init__(self) -> None:
        d = np.asarray(self.death_times, dtype=np.float64)
        t = np.asarray(self.life_lengths, dtype=np.float64)
        if d.shape != t.shape:
            raise ValueError("death_times and life_lengths must align")
        if d.size:
            s, e = self.window
            if not (np.all(d > s) and np.all(d <= e)):
                raise ValueError("death times must lie in the window")
            if not np.all(np.diff(d) >= 0.0):
                raise ValueError("death times must be sorted")
            if np.any(d - t > e):
                raise ValueError("a birth time exceeds the window end")
        object.__setattr__(self, "death_times", d)
        object.__setattr__(self, "life_lengths", t)

    @property
    def count(self) -> int:
        return int(self.death_times.size)


def sample_infinite_deaths(
    level: int,
    window: tuple[float, float],
    stream: RngStream,
    burn_in: float | None = None,
    tol: float = 1e-6,
) -> PointProcessSample:
    """Sample one level's death point process on a window.

    Births arrive at Poisson rate (level - 1) on (s - burn_in, t]; each birth
    gets an independent life length from :func:`sample_line_lifelength`;
    deaths falling in (s, t] are kept, ordered. burn_in defaults to
    :func:`default_burn_in` for the level.
    """
    if level < 2:
        raise ValueError("level must be at least 2")
    s, t = float(window[0]), float(window[1])
    if s > t:
        raise ValueError("window start exceeds end")
    if burn_in is None:
        burn_in = default_burn_in(level)
    if burn_in < 0.0:
        raise ValueError("burn_in must be nonnegative")
    births = sample_poisson_times(stream, float(level - 1), (s - burn_in, t))
    lives = _lifelength_matrix(level, births.size, stream, tol)
    deaths = births + lives
    keep = (deaths > s) & (deaths <= t)
    deaths, lives = deaths[keep], lives[keep]
    order = np.argsort(deaths, kind="stable")
    return PointProcessSample(
        level=level,
        window=(s, t),
        death_times=deaths[order],
        life_lengths=lives[order],
        burn_in=float(burn_in),
        tol=float(tol),
        truncation_level=truncation_level_for(level, tol),
    )
