import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict

from covshrink.model.processes import AutoModel, CrossModel, NoiseDist


class ArrayModel(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)


class SymEig(ArrayModel):
    """
    eigendecomposition of a real symmetric matrix
    values ascending, vectors[:, i] is the eigenvector of values[i]
    """

    values: np.ndarray
    vectors: np.ndarray

    @property
    def size(self) -> int:
        return int(self.values.shape[0])


class SpectralEstimate(ArrayModel):
    """
    kernel estimates of the density and Hilbert transform of the sample spectrum,
    evaluated at the sample eigenvalues
    """

    lambdas: np.ndarray
    rho: np.ndarray
    hilb: np.ndarray
    bandwidth: float
    n_samples: int

    @property
    def size(self) -> int:
        return int(self.lambdas.shape[0])


class SandwichSample(ArrayModel):
    """
    synthetic data matrix drawn from the sandwich model together with its population matrices
    """

    y: np.ndarray
    c_true: np.ndarray
    cross: CrossModel
    auto: AutoModel
    noise: NoiseDist
    n: int
    t: int
    t_total: int
    seed: int

    @property
    def y_window(self) -> NDArray[np.float64]:
        """
        analysis window, columns 1..T
        """
        return self.y[:, : self.t]

    def sample_covariance(self) -> NDArray[np.float64]:
        """
        E = (1/T) Y Y^T over the analysis window
        """
        window = self.y_window
        e = window @ window.T / self.t
        return 0.5 * (e + e.T)
