"""Small vector/rotation helpers shared by the renderer and rig transforms."""

from __future__ import annotations

import numpy as np


def vec3(x, y=None, z=None) -> np.ndarray:
    if y is None:
        a = np.asarray(x, dtype=np.float64)
        if a.shape != (3,):
            raise ValueError(f"expected 3-vector, got shape {a.shape}")
        return a
    return np.array([x, y, z], dtype=np.float64)


def normalize(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0.0:
        raise ValueError("cannot normalize zero vector")
    return v / n


def rotation_about_axis(axis, angle_deg: float) -> np.ndarray:
    """Rodrigues rotation matrix for an axis (not necessarily unit) and angle in degrees."""
    a = normalize(vec3(axis))
    t = np.deg2rad(angle_deg)
    k = np.array([[0.0, -a[2], a[1]], [a[2], 0.0, -a[0]], [-a[1], a[0], 0.0]])
    return np.eye(3) + np.sin(t) * k + (1.0 - np.cos(t)) * (k @ k)


def orthonormal_basis(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Tangent/bitangent for unit normal n (branchless ONB, Duff et al. 2017)."""
    s = np.copysign(1.0, n[2])
    a = -1.0 / (s + n[2])
    b = n[0] * n[1] * a
    t = np.array([1.0 + s * n[0] * n[0] * a, s * b, -s * n[0]])
    u = np.array([b, s + n[1] * n[1] * a, -n[1]])
    return t, u


def orthonormal_basis_batch(n: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ONB for an (N,3) array of unit normals."""
    s = np.copysign(1.0, n[:, 2])
    a = -1.0 / (s + n[:, 2])
    b = n[:, 0] * n[:, 1] * a
    t = np.stack([1.0 + s * n[:, 0] * n[:, 0] * a, s * b, -s * n[:, 0]], axis=1)
    u = np.stack([b, s + n[:, 1] * n[:, 1] * a, -n[:, 1]], axis=1)
    return t, u


def is_rotation(r: np.ndarray, tol: float = 1e-9) -> bool:
    r = np.asarray(r, dtype=np.float64)
    if r.shape != (3, 3):
        return False
    return bool(
        np.allclose(r.T @ r, np.eye(3), atol=tol) and abs(np.linalg.det(r) - 1.0) <= tol
    )


def is_axis_aligned_rotation(r: np.ndarray, tol: float = 1e-9) -> bool:
    """True when R maps coordinate axes onto signed coordinate axes."""
    return bool(np.all(np.isclose(np.abs(r), np.rint(np.abs(r)), atol=tol)))
