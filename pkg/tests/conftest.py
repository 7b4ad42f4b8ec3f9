import pytest

from xalpwb.machines import Action, MachineSpec


def make_machine(states, initial, accepting, mode, cells, alpha, transitions):
    """Compact machine builder: transitions maps (q, in, work) to a list of
    (state, write, dw, di, stack_op) tuples."""
    table = {}
    for key, acts in transitions.items():
        table[key] = tuple(Action(*act) for act in acts)
    return MachineSpec(
        states=tuple(states),
        initial=initial,
        accepting=frozenset(accepting),
        mode=dict(mode),
        work_cells=cells,
        work_alphabet=tuple(alpha),
        transitions=table,
    )


@pytest.fixture(scope="session")
def corpus():
    from xalpwb.corpus import load_corpus

    return load_corpus()
