from hypothesis import strategies as st

from jointbell.pauli_core import Direction

finite = st.floats(min_value=-1.0, max_value=1.0, allow_nan=False)
sharpness = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)


@st.composite
def directions(draw):
    v = draw(st.tuples(finite, finite, finite).filter(lambda t: sum(c * c for c in t) > 1e-3))
    return Direction.from_vector(v)
