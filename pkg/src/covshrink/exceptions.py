class CovShrinkError(Exception):
    """
    Base class of all covshrink errors.
    """


class NumericalError(CovShrinkError):
    """
    A numerical stage could not produce a valid result.
    """


class DimensionError(CovShrinkError, ValueError):
    """
    Shapes of the given arrays do not match.
    """

    def __init__(self, message: str, expected: tuple | int | None = None, actual: tuple | int | None = None):
        self.expected = expected
        self.actual = actual
        details = f" (expected {expected}, got {actual})" if expected is not None else ""
        super().__init__(f"{message}{details}")


class SymmetryError(CovShrinkError, ValueError):
    """
    Matrix is not symmetric within tolerance.
    """

    def __init__(self, asymmetry: float, tolerance: float):
        self.asymmetry = asymmetry
        self.tolerance = tolerance
        super().__init__(f"Matrix is not symmetric: max|m_ij - m_ji| = {asymmetry:.3e} >= {tolerance:.1e}")


class EigenSolverError(NumericalError):
    """
    The symmetric eigensolver did not converge.
    """

    def __init__(self, iterations: int, details: str = ""):
        self.iterations = iterations
        super().__init__(f"Eigensolver failed to converge ({iterations} off-diagonal elements left) {details}".strip())


class NotPositiveSemidefiniteError(NumericalError):
    """
    Matrix has an eigenvalue below the tolerated negativity.
    """

    def __init__(self, min_eigenvalue: float, threshold: float):
        self.min_eigenvalue = min_eigenvalue
        self.threshold = threshold
        super().__init__(f"Matrix is not positive semi-definite: eigenvalue {min_eigenvalue:.3e} < {threshold:.3e}")


class StationarityError(CovShrinkError, ValueError):
    """
    AR polynomial has a root on or inside the unit circle.
    """

    def __init__(self, ar: list[float], min_root_modulus: float):
        self.ar = ar
        self.min_root_modulus = min_root_modulus
        super().__init__(
            f"AR coefficients {ar} are not stationary: smallest root modulus {min_root_modulus:.6f} <= 1"
        )


class ConstructionError(NumericalError):
    """
    A model matrix could not be constructed.
    """


class SingularWishartError(NumericalError):
    """
    Inverse-Wishart construction produced a singular Wishart matrix in every attempt.
    """

    def __init__(self, attempts: int, seed: int):
        self.attempts = attempts
        self.seed = seed
        super().__init__(f"Wishart matrix singular in {attempts} attempts starting at seed {seed}")


class SpectrumDomainError(NumericalError):
    """
    Kernel estimation needs strictly positive eigenvalues.
    """

    def __init__(self, min_eigenvalue: float):
        self.min_eigenvalue = min_eigenvalue
        super().__init__(f"Kernel estimation requires positive eigenvalues, got {min_eigenvalue:.3e}")


class TransformEvaluationError(NumericalError):
    """
    Transform evaluated too close to a pole of its integrand.
    """

    def __init__(self, z: complex, distance: float):
        self.z = z
        self.distance = distance
        super().__init__(f"psi evaluation at z={z} too close to a pole (|1 - zH| = {distance:.3e})")


class InversionError(NumericalError):
    """
    Functional inversion of psi did not converge.
    """

    def __init__(self, u: complex, residual: float, iterations: int):
        self.u = u
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"chi inversion at u={u} did not converge after {iterations} iterations (residual {residual:.3e})"
        )


class DegenerateSampleSizeError(NumericalError):
    """
    Effective number of samples collapsed.
    """

    def __init__(self, t_eff: float, n: int):
        self.t_eff = t_eff
        self.n = n
        super().__init__(f"Effective sample size T_eff={t_eff:.4g} is degenerate for N={n}")


class WindowError(CovShrinkError, ValueError):
    """
    Cross-validation windows do not fit into the data.
    """

    def __init__(self, t_total: int, required: int):
        self.t_total = t_total
        self.required = required
        super().__init__(f"Cross-validation needs {required} samples but data has {t_total}")


class FitError(NumericalError):
    """
    No grid point produced a finite objective.
    """

    def __init__(self, family: str, evaluations: int):
        self.family = family
        self.evaluations = evaluations
        super().__init__(f"All {evaluations} grid points of the {family} fit failed")


class DegenerateDenominatorError(NumericalError):
    """
    The sample estimator coincides with the population matrix.
    """

    def __init__(self):
        super().__init__("Tr(E - C)^2 is zero; the Frobenius ratio is undefined")


class TestPointError(NumericalError):
    """
    Resolvent test point too close to the spectrum.
    """

    __test__ = False

    def __init__(self, z: complex, distance: float):
        self.z = z
        self.distance = distance
        super().__init__(f"Test point z={z} is {distance:.3e} away from the spectrum")


class SampleSizeError(NumericalError):
    """
    Monte Carlo moment estimates are too noisy.
    """

    def __init__(self, moment: int, relative_error: float):
        self.moment = moment
        self.relative_error = relative_error
        super().__init__(f"Relative standard error of moment {moment} is {relative_error:.1%}; increase draws or size")


class ConfigError(CovShrinkError, ValueError):
    """
    Experiment configuration could not be parsed or validated.
    """

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        location = ""
        if path:
            location += f" at '{path}'"
        if line is not None:
            location += f" (line {line})"
        super().__init__(f"{message}{location}")


class ExperimentFailedError(CovShrinkError):
    """
    No seed of an experiment completed.
    """

    def __init__(self, failures: dict[int, str]):
        self.failures = failures
        super().__init__(f"All {len(failures)} seeds failed: {failures}")
