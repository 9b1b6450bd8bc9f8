from hypothesis import strategies as st

from bunchlab.syntax import (
    ADD_UNIT, BOT, MULT_UNIT, TOP, UNIT, Atom, Binary, Comma, Leaf, Neg, Semi,
)

ATOMS = st.sampled_from([Atom(n) for n in ("p", "q", "r", "s")])
CONSTS = st.sampled_from([TOP, BOT, UNIT])


def formulas(kinds=("and", "or", "himp", "star", "wand", "ldiv", "rdiv"), consts=True,
             max_leaves=12):
    base = st.one_of(ATOMS, CONSTS) if consts else ATOMS

    def extend(children):
        return st.one_of(
            children.map(Neg),
            st.tuples(st.sampled_from(kinds), children, children).map(lambda t: Binary(*t)),
        )
    return st.recursive(base, extend, max_leaves=max_leaves)


def bunches(max_leaves=10, units=True):
    leaf = ATOMS.map(Leaf)
    if units:
        leaf = st.one_of(leaf, st.sampled_from([MULT_UNIT, ADD_UNIT]))

    def extend(children):
        return st.tuples(st.sampled_from([Comma, Semi]), children, children).map(
            lambda t: t[0](t[1], t[2]))
    return st.recursive(leaf, extend, max_leaves=max_leaves)


def comma_free_or_not(max_leaves=8):
    """Binary bunches without units (for depth arithmetic)."""
    return bunches(max_leaves, units=False)
