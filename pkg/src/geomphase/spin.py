"""Spin-j operator matrices and the dense complex linear-algebra kernel.

All matrices are expressed in the ``|j m>`` basis ordered by ascending ``m``
(``m = -j, -j+1, ..., j``). In that ordering ``J+`` is lower-triangular and
``J_y`` carries ``+i`` entries above the diagonal.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
import scipy.linalg

# Relative tolerance used to decide whether an argument can take the
# eigendecomposition route in matrix_exponential.
_ANTI_HERMITIAN_RTOL = 1e-12
_HERMITIAN_ATOL = 1e-10


@dataclass(frozen=True)
class SpinJ:
    """Spin quantum number, stored as the integer ``2j``."""

    two_j: int

    def __post_init__(self):
        if isinstance(self.two_j, bool) or int(self.two_j) != self.two_j:
            raise ValueError(f"two_j must be an integer, got {self.two_j!r}")
        if self.two_j < 1:
            raise ValueError(f"two_j must be >= 1, got {self.two_j}")
        object.__setattr__(self, "two_j", int(self.two_j))

    @classmethod
    def from_j(cls, j: float) -> SpinJ:
        two_j = 2 * j
        if abs(two_j - round(two_j)) > 1e-12:
            raise ValueError(f"j must be an integer or half-integer, got {j}")
        return cls(int(round(two_j)))

    @property
    def j(self) -> float:
        return self.two_j / 2

    @property
    def dim(self) -> int:
        return self.two_j + 1

    @property
    def m_values(self) -> np.ndarray:
        """Magnetic quantum numbers in basis order, ``-j`` first."""
        return np.arange(self.dim) - self.j

    def __str__(self):
        return f"{self.two_j}/2" if self.two_j % 2 else str(self.two_j // 2)


@dataclass(frozen=True, eq=False)
class SpinOperatorSet:
    j: SpinJ
    jx: np.ndarray
    jy: np.ndarray
    jz: np.ndarray
    jplus: np.ndarray
    jminus: np.ndarray


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@functools.lru_cache(maxsize=None)
def build_spin_operators(j: SpinJ) -> SpinOperatorSet:
    """Return ``J_x, J_y, J_z, J+, J-`` for spin ``j``.

    Uses ``J+|j m> = sqrt((j - m)(j + m + 1)) |j m+1>``. The returned arrays
    are read-only and shared between calls.
    """
    m = j.m_values
    jplus = np.zeros((j.dim, j.dim), dtype=complex)
    # |m> is column k, |m+1> is row k+1
    jplus[np.arange(1, j.dim), np.arange(j.dim - 1)] = np.sqrt(
        (j.j - m[:-1]) * (j.j + m[:-1] + 1)
    )
    jminus = jplus.conj().T.copy()
    jx = (jplus + jminus) / 2
    jy = (jplus - jminus) / 2j
    jz = np.diag(m).astype(complex)
    return SpinOperatorSet(
        j=j,
        jx=_frozen(jx),
        jy=_frozen(jy),
        jz=_frozen(jz),
        jplus=_frozen(jplus),
        jminus=_frozen(jminus),
    )


def dagger(a: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(a, -1, -2))


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def hermiticity_defect(a: np.ndarray) -> float:
    """Max-norm of ``a - a^dagger`` (over a whole stack if given one)."""
    return float(np.max(np.abs(a - dagger(a)), initial=0.0))


def anti_hermiticity_defect(a: np.ndarray) -> float:
    return float(np.max(np.abs(a + dagger(a)), initial=0.0))


def unitarity_defect(u: np.ndarray) -> float:
    """Max-norm of ``U^dagger U - I``."""
    eye = np.eye(u.shape[-1])
    return float(np.max(np.abs(dagger(u) @ u - eye), initial=0.0))


def _check_square(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ValueError(f"expected square matrices, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def _exp_i_hermitian(h: np.ndarray) -> np.ndarray:
    """``exp(i h)`` for Hermitian ``h`` (or a stack of them)."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(1j * w)[..., None, :]) @ dagger(v)


def matrix_exponential(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a square matrix or a stack of square matrices.

    Anti-Hermitian arguments are exponentiated through the eigendecomposition
    of the Hermitian matrix ``-i a``, which makes the result unitary to machine
    precision. Anything else goes through scaling and squaring with a Pade
    approximant (``scipy.linalg.expm``).
    """
    a = _check_square(a)
    scale = max(1.0, float(np.max(np.abs(a), initial=0.0)))
    if anti_hermiticity_defect(a) <= _ANTI_HERMITIAN_RTOL * scale:
        h = -1j * a
        return _exp_i_hermitian((h + dagger(h)) / 2)
    return scipy.linalg.expm(a)


def hermitian_eigendecomposition(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvector matrix of Hermitian ``h``.

    Raises:
        ValueError: if ``h`` is not Hermitian to 1e-10 in max-norm.
    """
    h = _check_square(h)
    if hermiticity_defect(h) >= _HERMITIAN_ATOL:
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigh((h + dagger(h)) / 2)
