"""Built-in example systems and points used by the CLI, the tests and the scripts."""

from __future__ import annotations

from .brent import BrentShape, natural_algorithm, strassen_scheme
from .polysys import PolySystem, parse_system

CUSP_TEXT = "x2^2 - x1^3"
WHITNEY_TEXT = "x1^2 - x2^2*x3"


def cusp() -> PolySystem:
    """``y^2 - x^3`` in variables ``(x, y) = (x1, x2)``."""
    return parse_system(CUSP_TEXT, 2)


def whitney() -> PolySystem:
    """The Whitney umbrella ``x^2 - y^2 z``."""
    return parse_system(WHITNEY_TEXT, 3)


CUSP_POINTS = [(0.0, 0.0), (1.0, 1.0)]
WHITNEY_POINTS = [(2.0, 2.0, 1.0), (0.0, 0.0, 1.0), (0.0, 0.0, 0.0)]

# sequences reported for the fixtures, first four numbers
EXPECTED = {
    ("cusp", (0.0, 0.0)): (2, 1, 1, 0),
    ("cusp", (1.0, 1.0)): (1, 1, 1, 1),
    ("whitney", (2.0, 2.0, 1.0)): (2, 2, 2, 2),
    ("whitney", (0.0, 0.0, 1.0)): (3, 2, 1, 1),
    ("whitney", (0.0, 0.0, 0.0)): (3, 2, 2, 1),
    ("strassen", None): (23, 23, 23, 23),
    ("natural", (2, 2, 2)): (40, 40, 32, 22),
    ("natural", (2, 2, 3)): (72, 72, 48, 34),
    ("natural", (2, 3, 3)): (126, 126, 54, 50),
    ("natural", (3, 3, 3)): (216, 216, 72, 72),
    ("natural", (3, 3, 4)): (324, 324, 96, 96),
    ("natural", (3, 4, 4)): (480, 480, 126, 126),
    ("natural", (4, 4, 4)): (704, 704, 164, 164),
}


def parse_natural(name: str) -> tuple[int, int, int]:
    """``natural:MxNxP`` or ``MxNxP`` -> ``(m, n, p)``."""
    dims = name.split(":", 1)[1] if name.startswith("natural:") else name
    m, n, p = (int(s) for s in dims.lower().split("x"))
    BrentShape(m, n, p, 1)
    return m, n, p


def builtin_scheme(name: str):
    """``strassen`` or ``natural:MxNxP``."""
    if name == "strassen":
        return strassen_scheme(), {"label": "strassen", "source": "builtin"}
    if name.startswith("natural:"):
        m, n, p = parse_natural(name)
        return natural_algorithm(m, n, p), {"label": f"N({m},{n},{p})", "source": "builtin"}
    raise KeyError(name)
