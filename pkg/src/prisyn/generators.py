"""Parameterized benchmark systems and small fixed fixtures."""

from __future__ import annotations

from .boolexpr import TRUE
from .model import Component, PrioritySet, System, Transition


def _t(src, label, dst, guard=TRUE, update=()):
    return Transition(src, guard, label, tuple(update), dst)


def philosophers(n: int) -> System:
    """Dining philosophers, components interleaved phil/fork around the table.

    Philosopher i grabs its own fork with take_left_i (staying hungry), the
    right neighbor's fork with take_right_i (starting to eat), keeps eating
    via the local eat_i loop, and puts both forks back with release_i.
    Grabbing every left fork first deadlocks the ring.
    """
    if n < 2:
        raise ValueError("need at least two philosophers")
    comps = []
    alphabet = []
    for i in range(1, n + 1):
        right = i % n + 1   # fork indices wrap around the table
        tl, tr, eat, rel = (f"take_left_{i}", f"take_right_{i}",
                            f"eat_{i}", f"release_{i}")
        alphabet += [tl, tr, eat, rel]
        phil = Component(f"phil_{i}", ("think", "eat"), (), (
            _t("think", tl, "think"),
            _t("think", tr, "eat"),
            _t("eat", eat, "eat"),
            _t("eat", rel, "think"),
        ), "think", {})
        comps.append((2 * i - 2, phil))
        left_tr = f"take_right_{(i - 2) % n + 1}"
        left_rel = f"release_{(i - 2) % n + 1}"
        # release transitions from both fork states: putting a fork down
        # always succeeds, so an eating philosopher is never wedged
        fork_moves = [
            _t("free", tl, "taken"),
            _t("taken", rel, "free"),
            _t("free", rel, "free"),
            _t("free", left_tr, "taken"),
            _t("taken", left_rel, "free"),
            _t("free", left_rel, "free"),
        ]
        fork = Component(f"fork_{i}", ("free", "taken"), (),
                         tuple(fork_moves), "free", {})
        comps.append((2 * i - 1, fork))
    comps.sort()
    return System(tuple(c for _, c in comps), tuple(alphabet))


def philosophers_local_fix(n: int) -> list:
    """The expected ring-local repair: each take_left yields to the left
    neighbor's take_right."""
    return sorted((f"take_left_{i}", f"take_right_{(i - 2) % n + 1}")
                  for i in range(1, n + 1))


def data_processing_unit() -> System:
    """A master that schedules a sensor round and then a serial transfer.

    Missing the sync window leaves only a doomed serial path; the deadlock
    cannot be repaired by ordering the serial interactions alone, so one
    repush round is required.
    """
    master = Component("master", ("boot", "synced", "missed", "done", "stuck"), (), (
        _t("boot", "sync_int", "synced"),
        _t("boot", "miss_sync", "missed"),
        _t("synced", "serial_int", "stuck"),
        _t("synced", "miss_serial", "done"),
        _t("missed", "miss_serial", "stuck"),
        _t("missed", "serial_int", "done"),
        _t("done", "idle", "done"),
    ), "boot", {})
    sensor = Component("sensor", ("ready",), (), (
        _t("ready", "sync_int", "ready"),
        _t("ready", "miss_sync", "ready"),
    ), "ready", {})
    sync_unit = Component("sync_unit", ("ready",), (), (
        _t("ready", "sync_int", "ready"),
    ), "ready", {})
    serial_unit = Component("serial_unit", ("ready",), (), (
        _t("ready", "serial_int", "ready"),
        _t("ready", "miss_serial", "ready"),
    ), "ready", {})
    watchdog = Component("watchdog", ("ready",), (), (
        _t("ready", "idle", "ready"),
    ), "ready", {})
    return System((master, sensor, sync_unit, serial_unit, watchdog),
                  ("sync_int", "miss_sync", "serial_int", "miss_serial", "idle"))


def attractor_example() -> System:
    """Single component whose graph mirrors the fault-localization walkthrough:
    two sink risk states, a fault-set of two escapable states, and one
    unreachable state that reachability pruning must discard."""
    comp = Component("C", tuple(f"c{i}" for i in range(1, 10)), (), (
        _t("c1", "a", "c1"),
        _t("c1", "d", "c2"),
        _t("c1", "e", "c8"),
        _t("c2", "a", "c3"),
        _t("c2", "g", "c4"),
        _t("c2", "b", "c1"),
        _t("c2", "c", "c1"),
        _t("c3", "a", "c6"),
        _t("c4", "b", "c7"),
        _t("c5", "g", "c6"),
        _t("c8", "b", "c5"),
        _t("c8", "a", "c1"),
        _t("c9", "a", "c3"),
        _t("c9", "b", "c1"),
    ), "c1", {})
    from .model import PartialConfiguration
    risks = (PartialConfiguration((("C", "c6", ()),)),
             PartialConfiguration((("C", "c7", ()),)))
    return System((comp,), ("a", "b", "c", "d", "e", "g"), PrioritySet(), risks)


def repush_example() -> System:
    """Single component where no depth-0 priority set works: the two branch
    states need opposite orderings of a and b, so the x/y choice must be
    restricted first."""
    comp = Component("C", ("c0", "c1", "c2", "s", "r"), (), (
        _t("c0", "x", "c1"),
        _t("c0", "y", "c2"),
        _t("c1", "a", "r"),
        _t("c1", "b", "s"),
        _t("c2", "b", "r"),
        _t("c2", "a", "s"),
        _t("s", "k", "s"),
    ), "c0", {})
    return System((comp,), ("x", "y", "a", "b", "k"))


def abstraction_example() -> System:
    """Three components where abstracting away C2/C3's private labels hides a
    concrete deadlock: after b then a, the kept labels are all disabled but
    C2 still has a private move, so the abstraction (keeping C1) stays
    plainly deadlock-free while the concrete system is stuck."""
    c1 = Component("C1", ("l10", "l11"), (), (
        _t("l10", "b", "l11"),
        _t("l11", "a", "l10"),
    ), "l10", {})
    c2 = Component("C2", ("l20", "l21"), (), (
        _t("l20", "b", "l21"),
        _t("l21", "e", "l20"),
        _t("l20", "f", "l20"),
    ), "l20", {})
    c3 = Component("C3", ("l30", "l31"), (), (
        _t("l30", "b", "l31"),
        _t("l31", "f", "l30"),
        _t("l30", "e", "l30"),
    ), "l30", {})
    return System((c1, c2, c3), ("a", "b", "e", "f"))


def shared_interaction_example() -> System:
    """Two components sharing a and b; used to show why a priority whose high
    side is shared cannot be checked component-locally."""
    c1 = Component("C1", ("l10", "l11", "l12"), (), (
        _t("l10", "a", "l11"),
        _t("l10", "b", "l12"),
    ), "l10", {})
    c2 = Component("C2", ("l20", "l21", "l22", "l23"), (), (
        _t("l20", "b", "l21"),
        _t("l20", "c", "l22"),
        _t("l22", "a", "l23"),
    ), "l20", {})
    return System((c1, c2), ("a", "b", "c"))
