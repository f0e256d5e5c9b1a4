import unittest

import numpy as np

from glocal.errors import InvalidArgumentError
from glocal.fem.mesh import (
    Material,
    MeshModel,
    apply_inclusion,
    build_structured_mesh,
    extract_submesh,
    nodes_on_plane,
    punch_hole,
)


class TestStructuredMesh(unittest.TestCase):
    """Unit tests for the structured mesh generator"""

    def test_smallest_chain(self):
        """1D mesh with two divisions has three nodes at 0, 1, 2"""
        mesh = build_structured_mesh(1, (2,), (2.0,))
        self.assertEqual(mesh.node_count, 3)
        self.assertEqual(mesh.element_count, 2)
        np.testing.assert_allclose(mesh.nodes[:, 0], [0.0, 1.0, 2.0])

    def test_triangle_counts(self):
        """2D grid gives (n+1)^2 nodes and 2 n^2 triangles"""
        mesh = build_structured_mesh(2, (2, 2), (1.0, 1.0))
        self.assertEqual(mesh.node_count, 9)
        self.assertEqual(mesh.element_count, 8)

    def test_hexahedra_counts(self):
        """3D grid gives (n+1)^3 nodes"""
        mesh = build_structured_mesh(3, (2, 2, 2), (1.0, 1.0, 1.0))
        self.assertEqual(mesh.node_count, 27)
        self.assertEqual(mesh.element_count, 8)
        self.assertEqual(mesh.elements.shape[1], 8)

    def test_lexicographic_order(self):
        """x varies fastest in the node numbering"""
        mesh = build_structured_mesh(2, (2, 1), (2.0, 1.0))
        np.testing.assert_allclose(mesh.nodes[:3], [[0, 0], [1, 0], [2, 0]])
        np.testing.assert_allclose(mesh.nodes[3], [0, 1])

    def test_origin_shift(self):
        """Origin translates every node"""
        mesh = build_structured_mesh(2, (1, 1), (1.0, 1.0), origin=(2.0, 3.0))
        np.testing.assert_allclose(mesh.bounding_box()[0], [2.0, 3.0])

    def test_zero_division_rejected(self):
        """Zero divisions are an invalid argument"""
        with self.assertRaises(InvalidArgumentError):
            build_structured_mesh(2, (0, 2), (1.0, 1.0))

    def test_non_positive_extent_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            build_structured_mesh(1, (2,), (0.0,))


class TestMeshModel(unittest.TestCase):
    """Unit tests for MeshModel invariants and edits"""

    def setUp(self):
        self.mesh = build_structured_mesh(2, (4, 4), (1.0, 1.0))

    def test_negative_coefficient_rejected(self):
        """Material coefficients must be strictly positive"""
        with self.assertRaises(InvalidArgumentError):
            Material.uniform(3, diffusivity=-1.0)

    def test_poisson_ratio_half_rejected(self):
        with self.assertRaises(InvalidArgumentError):
            Material.uniform(3, poisson_ratio=0.5)

    def test_element_index_out_of_range(self):
        """Element indices must stay below node_count"""
        with self.assertRaises(InvalidArgumentError):
            MeshModel(
                dimension=1,
                nodes=np.array([[0.0], [1.0]]),
                elements=np.array([[0, 2]]),
                material=Material.uniform(1),
            )

    def test_duplicate_node_in_element(self):
        with self.assertRaises(InvalidArgumentError):
            MeshModel(
                dimension=1,
                nodes=np.array([[0.0], [1.0]]),
                elements=np.array([[1, 1]]),
                material=Material.uniform(1),
            )

    def test_with_dirichlet_sorts_and_keeps_values(self):
        """Constrained nodes are stored sorted with their own values"""
        mesh = self.mesh.with_dirichlet([4, 0, 2], values=np.array([3.0, 1.0, 2.0]))
        np.testing.assert_array_equal(mesh.dirichlet_nodes, [0, 2, 4])
        np.testing.assert_allclose(mesh.dirichlet_values, [1.0, 2.0, 3.0])

    def test_nodes_on_plane(self):
        left = nodes_on_plane(self.mesh, 0, 0.0)
        self.assertEqual(len(left), 5)
        np.testing.assert_allclose(self.mesh.nodes[left, 0], 0.0)

    def test_extract_submesh_maps_parents(self):
        """Submesh keeps parent coordinates and inherited Dirichlet data"""
        mesh = self.mesh.with_dirichlet(nodes_on_plane(self.mesh, 0, 0.0))
        mask = mesh.centroids[:, 0] < 0.5
        sub, parents = extract_submesh(mesh, mask)
        np.testing.assert_allclose(sub.nodes, mesh.nodes[parents])
        self.assertEqual(sub.element_count, int(mask.sum()))
        self.assertEqual(len(sub.dirichlet_nodes), 5)

    def test_punch_hole_removes_centre(self):
        """A hole drops the elements around its centre"""
        holed = punch_hole(self.mesh, (0.5, 0.5), 0.2)
        self.assertLess(holed.element_count, self.mesh.element_count)
        self.assertTrue(np.all(np.linalg.norm(holed.centroids - 0.5, axis=1) >= 0.2))

    def test_inclusion_scales_coefficients(self):
        """Inclusion multiplies diffusivity and modulus inside the ball only"""
        mesh = apply_inclusion(self.mesh, (0.5, 0.5), 0.3, 0.1)
        inside = np.linalg.norm(mesh.centroids - 0.5, axis=1) < 0.3
        np.testing.assert_allclose(mesh.material.diffusivity[inside], 0.1)
        np.testing.assert_allclose(mesh.material.diffusivity[~inside], 1.0)
        np.testing.assert_allclose(mesh.material.poisson_ratio, 0.3)


if __name__ == "__main__":
    unittest.main()
