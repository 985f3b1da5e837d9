import unittest

import numpy as np

from covshrink.exceptions import DimensionError, NotPositiveSemidefiniteError, SymmetryError
from covshrink.linalg import (
    as_matrix,
    psd_sqrt,
    quadratic_forms,
    reconstruct,
    sample_covariance,
    sym_eig,
)


class TestLinalg(unittest.TestCase):
    """
    test the dense symmetric matrix primitives
    """

    def setUp(self):
        """
        setup test case
        """
        generator = np.random.default_rng(7)
        x = generator.standard_normal((6, 20))
        self.matrix = x @ x.T / 20

    def test_sym_eig(self):
        """
        test ascending eigenvalues and orthonormal eigenvectors
        """
        eig = sym_eig(self.matrix)
        self.assertEqual(eig.size, 6)
        self.assertTrue(np.all(np.diff(eig.values) >= 0))
        np.testing.assert_allclose(eig.vectors.T @ eig.vectors, np.eye(6), atol=1e-12)
        np.testing.assert_allclose(reconstruct(eig.vectors, eig.values), self.matrix, atol=1e-12)

    def test_sym_eig_rejects_asymmetric(self):
        """
        test that asymmetric matrices are rejected
        """
        matrix = self.matrix.copy()
        matrix[0, 1] += 1e-3
        with self.assertRaises(SymmetryError):
            sym_eig(matrix)

    def test_as_matrix(self):
        """
        test shape and finiteness checks
        """
        with self.assertRaises(DimensionError):
            as_matrix(np.ones((2, 3)))
        with self.assertRaises(DimensionError):
            as_matrix(np.ones(3))
        with self.assertRaises(DimensionError):
            as_matrix([[1.0, np.nan], [np.nan, 1.0]])
        self.assertEqual(as_matrix(np.ones((2, 3)), square=False).shape, (2, 3))

    def test_reconstruct_dimension_mismatch(self):
        """
        test reconstruct with the wrong number of values
        """
        eig = sym_eig(self.matrix)
        with self.assertRaises(DimensionError):
            reconstruct(eig.vectors, np.ones(5))

    def test_psd_sqrt(self):
        """
        test the symmetric square root
        """
        root = psd_sqrt(self.matrix)
        np.testing.assert_allclose(root @ root, self.matrix, atol=1e-12)
        np.testing.assert_allclose(root, root.T)

    def test_psd_sqrt_rejects_indefinite(self):
        """
        test that clearly negative eigenvalues are rejected
        """
        with self.assertRaises(NotPositiveSemidefiniteError):
            psd_sqrt(np.diag([1.0, -0.5]))

    def test_psd_sqrt_clips_roundoff(self):
        """
        test that roundoff-level negative eigenvalues are clipped
        """
        root = psd_sqrt(np.diag([1.0, -1e-14]))
        np.testing.assert_allclose(root, np.diag([1.0, 0.0]))

    def test_quadratic_forms(self):
        """
        test v^T C v with C = diag(1, 3) and v = (1, 1)/sqrt(2)
        """
        vectors = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
        np.testing.assert_allclose(quadratic_forms(vectors, np.diag([1.0, 3.0])), [2.0, 2.0])

    def test_sample_covariance(self):
        """
        test E = (1/T) Y Y^T
        """
        e = sample_covariance([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_allclose(e, [[2.5, 5.5], [5.5, 12.5]])


if __name__ == "__main__":
    unittest.main()
