import random

import pytest

from prisyn.boolexpr import TRUE
from prisyn.model import (Component, PartialConfiguration, PrioritySet, System,
                          Transition, closure_and_validate)


def random_system(rng: random.Random, max_comps=4, max_locs=4, max_vars=2,
                  with_priorities=True, with_risk=False) -> System:
    """Small random instance; every alphabet letter is used by some component."""
    n_comps = rng.randint(1, max_comps)
    labels = [f"s{i}" for i in range(rng.randint(1, 6))]
    comps = []
    for ci in range(n_comps):
        locs = [f"c{ci}l{j}" for j in range(rng.randint(1, max_locs))]
        variables = tuple(f"v{ci}{k}" for k in range(rng.randint(0, max_vars)))
        mine = rng.sample(labels, rng.randint(1, len(labels)))
        trans = []
        for _ in range(rng.randint(1, 6)):
            guard = TRUE
            if variables and rng.random() < 0.4:
                v = rng.choice(variables)
                guard = ("var", v) if rng.random() < 0.5 else ("not", ("var", v))
            update = tuple(
                (v, ("const", rng.random() < 0.5) if rng.random() < 0.4
                 else ("var", v))
                for v in variables)
            trans.append(Transition(rng.choice(locs), guard, rng.choice(mine),
                                    update, rng.choice(locs)))
        comps.append(Component(f"C{ci}", tuple(locs), variables, tuple(trans),
                               locs[0], {v: rng.random() < 0.5 for v in variables}))
    used = sorted({t.label for c in comps for t in c.transitions})
    prio = PrioritySet()
    if with_priorities and len(used) >= 2 and rng.random() < 0.5:
        pairs = []
        for _ in range(rng.randint(1, 2)):
            low, high = rng.sample(used, 2)
            try:
                closure_and_validate(PrioritySet(tuple(pairs) + ((low, high),)))
            except Exception:
                continue
            pairs.append((low, high))
        prio = PrioritySet(tuple(pairs))
    risks = ()
    if with_risk and rng.random() < 0.5:
        c = rng.choice(comps)
        risks = (PartialConfiguration(((c.name, rng.choice(c.locations), ()),)),)
    return System(tuple(comps), tuple(used), prio, risks)


@pytest.fixture
def rng():
    return random.Random(20240817)
