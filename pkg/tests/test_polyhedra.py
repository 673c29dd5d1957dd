import math

import pytest

from coarsedim.covers import make_cover
from coarsedim.errors import InputError, InvariantViolation
from coarsedim.metric_core import build_explicit, grid_space, path_space
from coarsedim.polyhedra import (
    EmbeddedPoint,
    SimplicialComplex,
    SimplicialMap,
    barycenter_point,
    barycentric_subdivision,
    canonical_projection,
    combine,
    complex_to_json,
    embedded_distance,
    euler_characteristic,
    glue,
    glue_with_identifications,
    mapping_cylinder,
    measure_cylinder_constant,
    measure_uniformization_constant,
    nerve,
    projection_lipschitz_check,
    refinement_map,
    vertex_point,
)

TRIANGLE = SimplicialComplex.from_maximal(["a", "b", "c"], [("a", "b", "c")])


def unit_triangle_space():
    return build_explicit([[0, 1, 1], [1, 0, 1], [1, 1, 0]])


class TestComplex:
    def test_face_closure_enforced(self):
        with pytest.raises(InputError):
            SimplicialComplex(("a", "b"), frozenset({("a", "b")}))

    def test_dimension_and_maximal(self):
        assert TRIANGLE.dimension == 2
        assert TRIANGLE.maximal_simplices() == [("a", "b", "c")]

    def test_embedded_point_support_check(self):
        square = SimplicialComplex.from_maximal("abcd", [("a", "b"), ("c", "d")])
        with pytest.raises(InvariantViolation):
            EmbeddedPoint.of(square, {"a": 0.5, "c": 0.5})

    def test_distance_between_vertices(self):
        p = vertex_point(TRIANGLE, "a")
        q = vertex_point(TRIANGLE, "b")
        assert embedded_distance(p, p) == 0.0
        assert embedded_distance(p, q) == pytest.approx(math.sqrt(2))

    def test_vertex_to_opposite_edge_midpoint(self):
        p = vertex_point(TRIANGLE, "a")
        mid = barycenter_point(TRIANGLE, ("b", "c"))
        assert embedded_distance(p, mid) == pytest.approx(math.sqrt(1.5))

    def test_polyhedron_distance_rejects_mismatch(self):
        from coarsedim.polyhedra import polyhedron_distance

        other = SimplicialComplex.from_maximal(["a", "b"], [("a", "b")])
        p = vertex_point(TRIANGLE, "a")
        q = vertex_point(other, "a")
        assert polyhedron_distance(p, vertex_point(TRIANGLE, "b")) == pytest.approx(math.sqrt(2))
        with pytest.raises(InputError):
            polyhedron_distance(p, q)


class TestNerve:
    def test_disjoint_sets_isolated_vertices(self):
        s = path_space(4)
        nv = nerve(make_cover(s, [[0, 1], [2, 3]]))
        assert nv.dimension == 0
        assert len(nv.vertices) == 2

    def test_triangle_boundary_without_filling(self):
        s = unit_triangle_space()
        nv = nerve(make_cover(s, [[0, 1], [1, 2], [2, 0]]))
        assert (0, 1) in nv.simplices and (1, 2) in nv.simplices and (0, 2) in nv.simplices
        assert (0, 1, 2) not in nv.simplices

    def test_single_edge(self):
        s = path_space(4)
        nv = nerve(make_cover(s, [[0, 1, 2], [1, 2, 3]]))
        assert nv.maximal_simplices() == [(0, 1)]


class TestCanonicalProjection:
    def test_point_in_one_set_goes_to_vertex(self):
        s = path_space(4)
        cover = make_cover(s, [[0, 1], [2, 3]])
        p = canonical_projection(cover, 0)
        assert p.as_dict() == {0: 1.0}

    def test_midpoint_of_overlap(self):
        s = path_space(3)
        cover = make_cover(s, [[0, 1], [1, 2]])
        p = canonical_projection(cover, 1)
        assert p.as_dict() == pytest.approx({0: 0.5, 1: 0.5})

    def test_endpoint_goes_to_vertex(self):
        s = path_space(3)
        cover = make_cover(s, [[0, 1], [1, 2]])
        p = canonical_projection(cover, 0)
        assert p.as_dict() == pytest.approx({0: 1.0})

    def test_coordinates_sum_to_one_and_support_contains_point(self):
        s = grid_space(4, 4)
        cover = make_cover(s, [range(0, 8), range(4, 12), range(8, 16), [0, 15]])
        for x in range(s.n):
            p = canonical_projection(cover, x)
            assert sum(p.as_dict().values()) == pytest.approx(1.0)
            for v, w in p.coords:
                assert x in cover.sets[v]

    def test_whole_space_set_dominates(self):
        s = path_space(4)
        cover = make_cover(s, [range(4), [0, 1]])
        p = canonical_projection(cover, 0)
        assert p.as_dict() == {0: 1.0}


class TestProjectionBound:
    def test_constant_map_whole_space(self):
        s = path_space(6)
        rep = projection_lipschitz_check(make_cover(s, [range(6)]))
        assert rep["measured"] == 0.0
        assert rep["ok"]

    def test_two_half_cover(self):
        s = path_space(10)
        rep = projection_lipschitz_check(make_cover(s, [range(0, 6), range(4, 10)]))
        assert rep["k"] == 1
        assert rep["lebesgue"] == 2.0
        assert rep["measured"] <= 25.0 / 2.0
        assert rep["ok"]

    def test_disjoint_two_point_cover(self):
        s = path_space(2)
        rep = projection_lipschitz_check(make_cover(s, [[0], [1]]))
        assert rep["k"] == 0
        assert rep["measured"] == pytest.approx(math.sqrt(2))
        assert rep["ok"]  # sqrt(2) <= 9 / 1

    def test_generated_covers_on_paths_and_grids(self):
        spaces = [path_space(12), path_space(20), grid_space(4, 5)]
        for s in spaces:
            n = s.n
            width = max(2, n // 3)
            sets = []
            start = 0
            while start < n:
                sets.append(range(start, min(n, start + width + 2)))
                start += width
            rep = projection_lipschitz_check(make_cover(s, sets))
            assert rep["ok"]


class TestSubdivision:
    def test_single_vertex(self):
        c = SimplicialComplex.from_maximal(["a"], [("a",)])
        sub, bary = barycentric_subdivision(c)
        assert len(sub.vertices) == 1

    def test_edge(self):
        c = SimplicialComplex.from_maximal(["a", "b"], [("a", "b")])
        sub, bary = barycentric_subdivision(c)
        assert len(sub.vertices) == 3
        assert sub.dimension == 1
        assert len([s for s in sub.simplices if len(s) == 2]) == 2

    def test_triangle_counts(self):
        sub, bary = barycentric_subdivision(TRIANGLE)
        assert len(sub.vertices) == 7
        assert len([s for s in sub.simplices if len(s) == 3]) == 6

    def test_barycenters_are_points_of_original(self):
        sub, bary = barycentric_subdivision(TRIANGLE)
        for simplex, point in bary.items():
            assert point.complex is TRIANGLE
            assert point.support() == simplex


class TestRefinement:
    def test_self_refinement(self):
        # Lebesgue is infinite (one set is everything), so fine = coarse is
        # legal; each set prefers itself over mere containment
        s = path_space(10)
        cover = make_cover(s, [range(0, 10), range(0, 6)])
        rm = refinement_map(cover, cover)
        assert rm.assignment == {0: 0, 1: 1}

    def test_singletons_point_location(self):
        s = path_space(6)
        fine = make_cover(s, [[i] for i in range(6)])
        coarse = make_cover(s, [range(0, 4), range(2, 6)])
        rm = refinement_map(fine, coarse)
        assert rm.assignment[0] == 0
        assert rm.assignment[5] == 1
        assert rm.assignment[2] == 0  # lowest index wins in the overlap

    def test_bricks_into_halves(self):
        s = path_space(10)
        fine = make_cover(s, [[0, 1, 2], [3, 4, 5], [6, 7], [8, 9]])
        coarse = make_cover(s, [range(0, 6), range(4, 10)])
        # Lebesgue(coarse) = 2 is not > mesh(fine) = 2, so widen the halves
        coarse = make_cover(s, [range(0, 7), range(3, 10)])
        rm = refinement_map(fine, coarse)
        assert rm.assignment == {0: 0, 1: 0, 2: 1, 3: 1}

    def test_precondition_enforced(self):
        s = path_space(10)
        fine = make_cover(s, [range(0, 6), range(4, 10)])
        coarse = make_cover(s, [range(0, 6), range(4, 10)])
        with pytest.raises(InputError):
            refinement_map(fine, coarse)


class TestMappingCylinder:
    def test_vertex_to_vertex_is_edge(self):
        src = SimplicialComplex.from_maximal([("s", 0)], [(("s", 0),)])
        dst = SimplicialComplex.from_maximal([("t", 0)], [(("t", 0),)])
        cyl = mapping_cylinder(SimplicialMap(src, dst, {("s", 0): ("t", 0)}))
        assert cyl.complex.dimension == 1
        p = cyl.point(vertex_point(src, ("s", 0)), 0.25)
        assert p.as_dict() == pytest.approx({("s", 0): 0.75, ("t", 0): 0.25})

    def test_edge_to_vertex_is_triangle(self):
        src = SimplicialComplex.from_maximal([("s", 0), ("s", 1)], [(("s", 0), ("s", 1))])
        dst = SimplicialComplex.from_maximal([("t", 0)], [(("t", 0),)])
        cyl = mapping_cylinder(SimplicialMap(src, dst, {("s", 0): ("t", 0), ("s", 1): ("t", 0)}))
        assert cyl.complex.dimension == 2
        assert len(cyl.complex.vertices) == 3

    def test_identity_on_edge_is_square(self):
        src = SimplicialComplex.from_maximal([("s", 0), ("s", 1)], [(("s", 0), ("s", 1))])
        dst = SimplicialComplex.from_maximal([("t", 0), ("t", 1)], [(("t", 0), ("t", 1))])
        cyl = mapping_cylinder(SimplicialMap(src, dst, {("s", 0): ("t", 0), ("s", 1): ("t", 1)}))
        triangles = [s for s in cyl.complex.simplices if len(s) == 3]
        assert len(triangles) == 2
        assert len(cyl.complex.vertices) == 4

    def test_bottom_is_isometric_copy(self):
        src = SimplicialComplex.from_maximal([("s", 0), ("s", 1), ("s", 2)], [(("s", 0), ("s", 1), ("s", 2))])
        dst = SimplicialComplex.from_maximal([("t", 0)], [(("t", 0),)])
        cyl = mapping_cylinder(SimplicialMap(src, dst, {v: ("t", 0) for v in src.vertices}))
        pts = [
            vertex_point(src, ("s", 0)),
            barycenter_point(src, (("s", 0), ("s", 1))),
            barycenter_point(src, src.vertices),
        ]
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                assert embedded_distance(
                    cyl.point(pts[i], 0.0), cyl.point(pts[j], 0.0)
                ) == pytest.approx(embedded_distance(pts[i], pts[j]))
            # t=0 keeps the exact source coordinates
            assert cyl.point(pts[i], 0.0).as_dict() == pts[i].as_dict()

    def test_top_collapses_via_map(self):
        src = SimplicialComplex.from_maximal([("s", 0), ("s", 1)], [(("s", 0), ("s", 1))])
        dst = SimplicialComplex.from_maximal([("t", 0)], [(("t", 0),)])
        cyl = mapping_cylinder(SimplicialMap(src, dst, {("s", 0): ("t", 0), ("s", 1): ("t", 0)}))
        mid = barycenter_point(src, src.vertices)
        assert cyl.point(mid, 1.0).as_dict() == {("t", 0): 1.0}

    def test_quotient_continuity_across_prism_cells(self):
        src = SimplicialComplex.from_maximal([("s", 0), ("s", 1)], [(("s", 0), ("s", 1))])
        dst = SimplicialComplex.from_maximal([("t", 0), ("t", 1)], [(("t", 0), ("t", 1))])
        cyl = mapping_cylinder(SimplicialMap(src, dst, {("s", 0): ("t", 0), ("s", 1): ("t", 1)}))
        z = EmbeddedPoint.of(src, {("s", 0): 0.3, ("s", 1): 0.7})
        # boundary between prism cells sits at t = 0.7 for this point
        lo = cyl.point(z, 0.7 - 1e-9)
        hi = cyl.point(z, 0.7 + 1e-9)
        assert embedded_distance(lo, hi) < 1e-7


class TestUniformization:
    def test_vertex_cylinder_constant(self):
        c = measure_uniformization_constant(0)
        assert c == pytest.approx(math.sqrt(2))

    def test_dimension_one_recorded(self):
        c = measure_uniformization_constant(1)
        assert c >= 1.0
        assert c >= measure_uniformization_constant(0) - 1e-9

    def test_explicit_sample(self):
        src = SimplicialComplex.from_maximal([("s", 0), ("s", 1)], [(("s", 0), ("s", 1))])
        dst = SimplicialComplex.from_maximal([("t", 0)], [(("t", 0),)])
        g = SimplicialMap(src, dst, {v: ("t", 0) for v in src.vertices})
        c = measure_cylinder_constant(mapping_cylinder(g))
        assert c >= 1.0


class TestGlue:
    def test_disjoint_union(self):
        a = SimplicialComplex.from_maximal(["a"], [("a",)])
        b = SimplicialComplex.from_maximal(["b"], [("b",)])
        g = glue([a, b])
        assert len(g.vertices) == 2
        assert g.dimension == 0

    def test_two_triangles_share_edge(self):
        t1 = SimplicialComplex.from_maximal(["a", "b", "c"], [("a", "b", "c")])
        t2 = SimplicialComplex.from_maximal(["b", "c", "d"], [("b", "c", "d")])
        g = glue([t1, t2])
        assert len(g.vertices) == 4
        assert len([s for s in g.simplices if len(s) == 3]) == 2

    def test_explicit_identification(self):
        t1 = SimplicialComplex.from_maximal(["a", "b", "c"], [("a", "b", "c")])
        t2 = SimplicialComplex.from_maximal(["x", "y", "z"], [("x", "y", "z")])
        g = glue_with_identifications(t1, t2, {"x": "b", "y": "c"})
        assert len(g.vertices) == 4

    def test_bad_identification_rejected(self):
        t1 = SimplicialComplex.from_maximal(["a", "b", "c"], [("a", "b"), ("b", "c")])
        t2 = SimplicialComplex.from_maximal(["x", "y", "z"], [("x", "y", "z")])
        with pytest.raises(InvariantViolation):
            glue_with_identifications(t1, t2, {"x": "a", "y": "c"})

    def test_chain_euler_characteristic(self):
        # three squares glued along shared edges: chi = V - E + F by
        # inclusion-exclusion = chi(sq)*3 - chi(edge)*2 = 3 - 2 = 1
        def square(tag):
            v = [(tag, i) for i in range(2)] + [(tag + "'", i) for i in range(2)]
            return SimplicialComplex.from_maximal(
                v, [(v[0], v[1], v[2]), (v[1], v[2], v[3])]
            )

        s1 = square("p")
        s2 = glue_with_identifications(s1, square("q"), {("q", 0): ("p'", 0), ("q", 1): ("p'", 1)})
        s3 = glue_with_identifications(s2, square("r"), {("r", 0): ("q'", 0), ("r", 1): ("q'", 1)})
        assert euler_characteristic(s3) == 1
        assert s3.dimension == 2

    def test_json_shape(self):
        doc = complex_to_json(TRIANGLE)
        assert set(doc) == {"vertices", "simplices"}

    def test_embedded_point_json(self):
        from coarsedim.polyhedra import embedded_point_to_json

        doc = embedded_point_to_json(barycenter_point(TRIANGLE, ("a", "b")))
        assert doc == {"coords": {"a": 0.5, "b": 0.5}}


class TestCombine:
    def test_combination_in_simplex(self):
        p = vertex_point(TRIANGLE, "a")
        q = vertex_point(TRIANGLE, "b")
        mid = combine([p, q], [0.5, 0.5])
        assert mid.as_dict() == pytest.approx({"a": 0.5, "b": 0.5})

    def test_combination_outside_simplex_rejected(self):
        square = SimplicialComplex.from_maximal("abcd", [("a", "b"), ("c", "d")])
        p = vertex_point(square, "a")
        q = vertex_point(square, "c")
        with pytest.raises(InvariantViolation):
            combine([p, q], [0.5, 0.5])
