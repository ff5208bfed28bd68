"""Shared hypothesis strategies."""

import numpy as np
from hypothesis import strategies as st

from adiacycle.trajectory import Ellipse


@st.composite
def ellipses(draw, max_axis=3.0, min_clearance=0.1):
    """Ellipses in the plane that keep ``min_clearance`` from the origin."""
    cz = draw(st.floats(-4.0, 4.0))
    cx = draw(st.floats(-4.0, 4.0))
    a = draw(st.floats(0.2, max_axis))
    b = draw(st.floats(0.2, max_axis))
    tilt = draw(st.floats(0.0, np.pi))
    orientation = draw(st.sampled_from([1, -1]))
    e = Ellipse((cz, cx), a, b, tilt, orientation)
    if e.min_radius < min_clearance:
        # push the center away so the curve stays clear of the origin
        shift = (max(a, b) + 1.0) * np.array([np.cos(tilt + 0.3), np.sin(tilt + 0.3)])
        e = Ellipse((cz + shift[0], cx + shift[1]), a, b, tilt, orientation)
    return e


def random_ellipses(rng, n, max_axis=3.0, min_clearance=0.1):
    out = []
    while len(out) < n:
        e = Ellipse(tuple(rng.uniform(-4, 4, 2)), *rng.uniform(0.2, max_axis, 2), rng.uniform(0, np.pi),
                    int(rng.choice([1, -1])))
        if e.min_radius >= min_clearance:
            out.append(e)
    return out
