"""Nullspace projections for the shrinking-rank subspace.

The basis ``J`` holds orthonormal columns; crumbs and proposals are drawn in
the orthogonal complement of its span.
"""
import numpy as np

from ._validation import check_vector

ORTHO_TOL = 1e-10


class OrthoBasis:
    """Ordered set of orthonormal columns in ``R^p``, at most ``p - 1`` of them.

    Instances are treated as values: :func:`extend` returns a new basis.
    """

    __slots__ = ("dim_ambient", "_cols")

    def __init__(self, dim_ambient, columns=None):
        if int(dim_ambient) < 1:
            raise ValueError(f"dim_ambient must be >= 1, got {dim_ambient}")
        self.dim_ambient = int(dim_ambient)
        if columns is None:
            cols = np.empty((self.dim_ambient, 0))
        else:
            cols = np.array(columns, dtype=np.float64, ndmin=2)
            if cols.size == 0:
                cols = np.empty((self.dim_ambient, 0))
            elif cols.shape[0] != self.dim_ambient:
                raise ValueError(
                    f"columns have length {cols.shape[0]}, expected {self.dim_ambient}"
                )
        if cols.shape[1] > max(self.dim_ambient - 1, 0):
            raise ValueError(
                f"an OrthoBasis in R^{self.dim_ambient} holds at most "
                f"{self.dim_ambient - 1} columns, got {cols.shape[1]}"
            )
        gram = cols.T @ cols
        if not np.allclose(gram, np.eye(cols.shape[1]), rtol=0.0, atol=ORTHO_TOL):
            raise ValueError("columns are not orthonormal")
        self._cols = cols

    @property
    def matrix(self):
        """The ``p x m`` column matrix (read-only view)."""
        view = self._cols.view()
        view.flags.writeable = False
        return view

    @property
    def columns(self):
        return [c.copy() for c in self._cols.T]

    @property
    def n_columns(self):
        return self._cols.shape[1]

    @property
    def can_grow(self):
        return self._cols.shape[1] < self.dim_ambient - 1

    def __len__(self):
        return self._cols.shape[1]

    def __repr__(self):
        return f"OrthoBasis(dim_ambient={self.dim_ambient}, n_columns={self.n_columns})"


def project(J, v):
    """Project ``v`` into the nullspace of the columns of ``J``.

    Returns ``v - J J^T v``, or ``v`` itself (as a copy) when ``J`` is empty.
    """
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (J.dim_ambient,):
        raise ValueError(f"vector has shape {v.shape}, expected ({J.dim_ambient},)")
    cols = J._cols
    if cols.shape[1] == 0:
        return v.copy()
    return v - cols @ (cols.T @ v)


def angle_accepts(J, g, cos_threshold=0.5):
    """Whether the gradient ``g`` should be used to extend ``J``.

    True when the projected gradient still makes an angle with ``g`` whose
    cosine exceeds ``cos_threshold`` and ``J`` has room for another column.
    Zero or non-finite gradients never qualify.
    """
    if not 0.0 < cos_threshold < 1.0:
        raise ValueError(f"cos_threshold must lie in (0, 1), got {cos_threshold}")
    if not J.can_grow:
        return False
    g = np.asarray(g, dtype=np.float64)
    if g.shape != (J.dim_ambient,):
        raise ValueError(f"gradient has shape {g.shape}, expected ({J.dim_ambient},)")
    if not np.all(np.isfinite(g)):
        return False
    scale = np.max(np.abs(g))
    if scale == 0.0:
        return False
    # the cosine is scale-free; rescaling keeps huge gradients from overflowing
    g = g / scale
    g_star = project(J, g)
    norm_g = np.linalg.norm(g)
    norm_star = np.linalg.norm(g_star)
    if norm_g == 0.0 or norm_star == 0.0:
        return False
    return bool(g_star @ g > cos_threshold * norm_star * norm_g)


def extend(J, g_star):
    """Append ``g_star / ||g_star||`` to ``J`` after one Gram-Schmidt pass."""
    if not J.can_grow:
        raise ValueError(
            f"cannot extend a basis with {J.n_columns} columns in R^{J.dim_ambient}: "
            "the nullspace would become one-dimensional or empty"
        )
    g_star = check_vector(g_star, "g_star", dim=J.dim_ambient)
    norm = np.linalg.norm(g_star)
    if norm == 0.0:
        raise ValueError("g_star must be non-zero")
    cols = J._cols
    # re-orthogonalize: floating-point drift accumulates over many extensions
    u = g_star / norm
    if cols.shape[1]:
        u = u - cols @ (cols.T @ u)
    norm_u = np.linalg.norm(u)
    if norm_u < 1e-8:
        raise ValueError("g_star lies in the span of the existing columns")
    new = OrthoBasis.__new__(OrthoBasis)
    new.dim_ambient = J.dim_ambient
    new._cols = np.column_stack([cols, u / norm_u])
    return new
