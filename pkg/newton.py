"""
qtwist - twisting q-holonomic recurrences by roots of unity

Copyright (C) 2026 qtwist contributors

License: MIT
"""

from dataclasses import dataclass

from sympy import Rational

from config import config
from kernel import QTwistError
from ore import ModuleElement, SignatureError, polynomial_parts


@dataclass(frozen=True)
class NewtonPolygon:
    """
    Convex hull of the exponent points (a, b) of the monomials M^b L^a of an operator.

    ``hull`` runs counterclockwise starting at the lowest point with smallest a, ``lower`` and
    ``upper`` run from smallest to largest a and contain no vertical edges.
    """

    points: frozenset
    hull: tuple
    lower: tuple
    upper: tuple

    @property
    def slopes(self) -> set:
        return _chain_slopes(self.lower)

    @property
    def upper_slopes(self) -> set:
        return _chain_slopes(self.upper)


def _cross(o, a, b) -> int:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _chain(points, lower: bool) -> list:
    """monotone chain over the extreme point of every column"""
    columns = {}
    for a, b in points:
        if a not in columns:
            columns[a] = b
        else:
            columns[a] = min(columns[a], b) if lower else max(columns[a], b)
    chain = []
    for p in sorted(columns.items()):
        while len(chain) > 1:
            turn = _cross(chain[-2], chain[-1], p)
            if (lower and turn <= 0) or (not lower and turn >= 0):
                chain.pop()
            else:
                break
        chain.append(p)
    return chain


def _chain_slopes(chain) -> set:
    return {Rational(b1 - b0, a1 - a0) for (a0, b0), (a1, b1) in zip(chain, chain[1:])}


def convex_hull(points) -> NewtonPolygon:
    points = frozenset((int(a), int(b)) for a, b in points)
    if not points:
        raise QTwistError("The Newton polygon of the zero operator is undefined")
    lower = _chain(points, lower=True)
    upper = _chain(points, lower=False)
    hull = list(lower)
    for p in reversed(upper):
        if p != hull[-1] and p != hull[0]:
            hull.append(p)
    return NewtonPolygon(points=points, hull=tuple(hull), lower=tuple(lower), upper=tuple(upper))


def exponent_points(P, include_rhs: bool = None) -> set:
    """(L-exponent, M-exponent) of every monomial; q is projected out"""
    if P.signature.r != 1:
        raise SignatureError("Newton polygons need one shift direction")
    if include_rhs is None:
        include_rhs = config.newton_include_rhs
    points = set()
    for (component, alpha), p in polynomial_parts(P).items():
        if component > 0 and not include_rhs:
            continue
        a = alpha[0] if component == 0 else 0
        for monom in p.itermonoms():
            points.add((a, sum(monom[P.signature.s :])))
    return points


def newton_polygon(P, include_rhs: bool = None) -> NewtonPolygon:
    if not P:
        raise QTwistError("The Newton polygon of the zero operator is undefined")
    if isinstance(P, ModuleElement) and not include_rhs and not P[0]:
        raise QTwistError("The homogeneous part of the module element is zero")
    return convex_hull(exponent_points(P, include_rhs))


def slope_set(P, include_rhs: bool = None) -> set:
    return newton_polygon(P, include_rhs).slopes


def upper_slopes(P, include_rhs: bool = None) -> set:
    return newton_polygon(P, include_rhs).upper_slopes


def _edges(chain):
    return [(a1 - a0, b1 - b0) for (a0, b0), (a1, b1) in zip(chain, chain[1:])]


def minkowski_lower(A: NewtonPolygon, B: NewtonPolygon) -> list:
    """lower hull of the Minkowski sum: edges of both lower hulls merged by slope"""
    start = (A.lower[0][0] + B.lower[0][0], A.lower[0][1] + B.lower[0][1])
    edges = sorted(_edges(A.lower) + _edges(B.lower), key=lambda e: Rational(e[1], e[0]))
    vertices = [start]
    previous = None
    for da, db in edges:
        slope = Rational(db, da)
        a, b = vertices[-1]
        if slope == previous:
            vertices[-1] = (a + da, b + db)
        else:
            vertices.append((a + da, b + db))
        previous = slope
    return vertices


def format_tsv(vertices) -> str:
    return "".join(f"{a}\t{b}\n" for a, b in vertices)


def format_slopes(slopes) -> str:
    return " ".join(str(s) for s in sorted(slopes))


def render_svg(polygon: NewtonPolygon, m: int = 1, coordinates: str = None, unit: int = 40) -> str:
    """
    Static SVG of the point set, hull and lower hull. In ``jolted`` coordinates the vertical axis
    is M^m, so M-exponents are divided by m.
    """
    if coordinates is None:
        coordinates = config.svg_coordinates
    scale = 1 / m if coordinates == "jolted" else 1
    max_a = max(a for a, _ in polygon.points)
    max_b = max(b for _, b in polygon.points) * scale
    width, height = (max_a + 2) * unit, (max_b + 2) * unit

    def xy(p):
        return (p[0] + 1) * unit, height - (p[1] * scale + 1) * unit

    hull = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(xy, polygon.hull))
    lower = " ".join(f"{x:.2f},{y:.2f}" for x, y in map(xy, polygon.lower))
    dots = "".join(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3"/>' for x, y in map(xy, sorted(polygon.points)))
    axis = f"M^{m}" if coordinates == "jolted" and m != 1 else "M"
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0f}" height="{height:.0f}">'
        f'<polygon points="{hull}" fill="#dde8f4" stroke="#36c"/>'
        f'<polyline points="{lower}" fill="none" stroke="#c33" stroke-width="2"/>'
        f"<g>{dots}</g>"
        f'<text x="{width - unit:.0f}" y="{height - 4:.0f}">L</text>'
        f'<text x="4" y="{unit / 2:.0f}">{axis}</text>'
        "</svg>\n"
    )
