"""Seeded generators for the acceptance suite (exact case counts)."""

import random
from fractions import Fraction

from conftest import to_form


def rand_raw(rng: random.Random, max_terms=4, max_den=4, max_mod=4, masks=True, min_exp=-4, max_exp=12):
    out = []
    for _ in range(rng.randint(0, max_terms)):
        c = Fraction(rng.choice([i for i in range(-9, 10) if i]), rng.randint(1, 5))
        a = Fraction(rng.randint(min_exp, max_exp), rng.randint(1, max_den))
        m = rng.randint(1, max_mod) if masks else 1
        res = frozenset(r for r in range(m) if rng.random() < 0.5) or frozenset({rng.randrange(m)})
        out.append((c, a, m, res))
    return out


def rand_form(rng, **kw):
    return to_form(rand_raw(rng, **kw))

