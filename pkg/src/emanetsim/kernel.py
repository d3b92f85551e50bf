"""Discrete-event engine: simulated clock, priority queue, seeded RNG streams."""

import heapq
import random


class SchedulingError(Exception):
    """Raised when an event is scheduled in the past."""


class Event:
    """A scheduled simulation action.

    Events are ordered by (fire_time, sequence); the sequence counter makes
    the order total and gives FIFO behavior among equal fire times.
    """

    __slots__ = ("fire_time", "sequence", "kind", "node", "detail", "fn", "cancelled")

    def __init__(self, fire_time, sequence, kind, node, detail, fn):
        self.fire_time = fire_time
        self.sequence = sequence
        self.kind = kind
        self.node = node
        self.detail = detail
        self.fn = fn
        self.cancelled = False

    def __lt__(self, other):
        if self.fire_time != other.fire_time:
            return self.fire_time < other.fire_time
        return self.sequence < other.sequence


class EventKernel:
    """Single-threaded event loop owning the simulated clock.

    One kernel per simulation run; independent runs share nothing.
    """

    def __init__(self, trace=None):
        self.now = 0.0
        self._queue = []
        self._seq = 0
        self.scheduled = 0
        self.dispatched = 0
        self.cancelled = 0
        self.trace = trace  # optional callable(line) for the event-trace dump

    @property
    def pending(self):
        return self.scheduled - self.dispatched - self.cancelled

    def schedule(self, fire_time, fn, kind="timer", node=-1, detail=""):
        """Enqueue fn to run at fire_time; returns a cancellable Event handle."""
        if fire_time < self.now:
            raise SchedulingError(
                f"cannot schedule at t={fire_time} before now={self.now}")
        ev = Event(fire_time, self._seq, kind, node, detail, fn)
        self._seq += 1
        self.scheduled += 1
        heapq.heappush(self._queue, ev)
        return ev

    def schedule_in(self, delay, fn, kind="timer", node=-1, detail=""):
        return self.schedule(self.now + delay, fn, kind, node, detail)

    def cancel(self, ev):
        """Cancel an unfired event. Returns True iff the event will now never fire."""
        if ev is None or ev.cancelled or ev.fn is None:
            return False
        ev.cancelled = True
        ev.fn = None
        self.cancelled += 1
        return True

    def run_until(self, t_end):
        """Dispatch every event with fire_time <= t_end; leaves now == t_end."""
        if t_end < self.now:
            raise SchedulingError(f"run_until({t_end}) before now={self.now}")
        count = 0
        queue = self._queue
        while queue and queue[0].fire_time <= t_end:
            ev = heapq.heappop(queue)
            if ev.cancelled:
                continue
            self.now = ev.fire_time
            fn = ev.fn
            ev.fn = None
            self.dispatched += 1
            count += 1
            if self.trace is not None:
                self.trace(f"{ev.fire_time:.9f}\t{ev.node}\t{ev.kind}\t{ev.detail}")
            fn()
        self.now = t_end
        return count


class RandomStream:
    """Seeded pseudo-random stream with deterministic, named substreams.

    Substreams are seeded from the string "<path>/<label>", which CPython's
    random.seed hashes with sha512, so draw sequences are identical across
    runs and platforms. Forking per (node, purpose) keeps one node's draws
    independent of every other node's behavior.
    """

    def __init__(self, seed, _path=None):
        self.seed = seed
        self._path = str(seed) if _path is None else _path
        self._rng = random.Random(self._path)

    def fork(self, label):
        return RandomStream(self.seed, f"{self._path}/{label}")

    def random(self):
        return self._rng.random()

    def uniform(self, a, b):
        return self._rng.uniform(a, b)

    def randrange(self, n):
        return self._rng.randrange(n)

    def randint(self, a, b):
        return self._rng.randint(a, b)

    def choice(self, seq):
        return self._rng.choice(seq)

    def sample(self, seq, k):
        return self._rng.sample(seq, k)

    def shuffle(self, seq):
        self._rng.shuffle(seq)
