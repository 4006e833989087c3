"""Compare-and-set emulation on top of striped locks.

Python exposes no hardware CAS; each CAS takes one of a fixed set of lock stripes
chosen from the target object's identity, so unrelated cells rarely contend.
"""

import threading


_STRIPES = 64
_LOCKS = [threading.Lock() for _ in range(_STRIPES)]


def _stripe(obj):
    return _LOCKS[(id(obj) >> 4) & (_STRIPES - 1)]


def compare_and_set(obj, attr, expected, new):
    """Set ``obj.attr`` to ``new`` iff it is currently ``expected`` (identity)."""
    with _stripe(obj):
        if getattr(obj, attr) is not expected:
            return False
        setattr(obj, attr, new)
        return True


def compare_and_set_item(seq, index, expected, new):
    """Set ``seq[index]`` to ``new`` iff it is currently ``expected`` (identity)."""
    with _stripe(seq):
        if seq[index] is not expected:
            return False
        seq[index] = new
        return True


def set_flag(obj, attr, flag):
    """Atomically OR ``flag`` into the integer ``obj.attr``; True if it was clear."""
    with _stripe(obj):
        value = getattr(obj, attr)
        if value & flag:
            return False
        setattr(obj, attr, value | flag)
        return True


class AtomicCounter:
    def __init__(self, value=0):
        self._value = value
        self._lock = threading.Lock()

    def increment(self, delta=1):
        with self._lock:
            self._value += delta
            return self._value

    @property
    def value(self):
        return self._value

    def __int__(self):
        return self._value
