"""Joint-hierarchy skeleton and the bundled 21-joint quadruped template."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from habitmotion.errors import InvariantError


@dataclass(frozen=True)
class Skeleton:
    """Topologically ordered joint tree; offsets are in the parent frame
    (meters). parents[0] == -1 marks the single root."""

    joint_names: tuple
    parents: np.ndarray
    offsets: np.ndarray
    _children: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        names = tuple(self.joint_names)
        parents = np.asarray(self.parents, dtype=np.int64)
        offsets = np.asarray(self.offsets, dtype=np.float64)
        object.__setattr__(self, "joint_names", names)
        object.__setattr__(self, "parents", parents)
        object.__setattr__(self, "offsets", offsets)
        n = len(names)
        if parents.shape != (n,) or offsets.shape != (n, 3):
            raise InvariantError(
                f"skeleton arrays inconsistent: {n} names, parents {parents.shape}, "
                f"offsets {offsets.shape}"
            )
        if len(set(names)) != n:
            raise InvariantError("duplicate joint names")
        roots = np.nonzero(parents == -1)[0]
        if len(roots) != 1 or roots[0] != 0:
            raise InvariantError("skeleton must have exactly one root at index 0")
        for i in range(1, n):
            if not (0 <= parents[i] < i):
                raise InvariantError(f"non-topological parent: parents[{i}]={parents[i]}")
            if np.linalg.norm(offsets[i]) <= 0.0:
                raise InvariantError(f"joint {i} ({names[i]}) has a zero-length offset")
        children: dict = {j: [] for j in range(n)}
        for i in range(1, n):
            children[int(parents[i])].append(i)
        object.__setattr__(self, "_children", children)

    @property
    def n_joints(self) -> int:
        return len(self.joint_names)

    def children(self, j: int):
        return self._children[j]

    def bone_lengths(self) -> np.ndarray:
        return np.linalg.norm(self.offsets, axis=-1)


# Reference quadruped, 21 joints: spine chain, three tail links, a jaw,
# and four three-joint legs. Axes: +x forward, +y up, +z left.
_QUADRUPED = [
    # name, parent, offset
    ("root", -1, (0.0, 0.0, 0.0)),
    ("spine", 0, (0.25, 0.0, 0.0)),
    ("chest", 1, (0.25, 0.0, 0.0)),
    ("neck", 2, (0.20, 0.05, 0.0)),
    ("head", 3, (0.15, 0.08, 0.0)),
    ("tail_a", 0, (-0.25, 0.02, 0.0)),
    ("tail_b", 5, (-0.20, 0.0, 0.0)),
    ("tail_c", 6, (-0.15, 0.0, 0.0)),
    ("hip_lf", 2, (0.05, -0.05, 0.12)),
    ("knee_lf", 8, (0.0, -0.22, 0.0)),
    ("foot_lf", 9, (0.0, -0.20, 0.0)),
    ("hip_rf", 2, (0.05, -0.05, -0.12)),
    ("knee_rf", 11, (0.0, -0.22, 0.0)),
    ("foot_rf", 12, (0.0, -0.20, 0.0)),
    ("hip_lh", 0, (-0.05, -0.05, 0.12)),
    ("knee_lh", 14, (0.0, -0.22, 0.0)),
    ("foot_lh", 15, (0.0, -0.20, 0.0)),
    ("hip_rh", 0, (-0.05, -0.05, -0.12)),
    ("knee_rh", 17, (0.0, -0.22, 0.0)),
    ("foot_rh", 18, (0.0, -0.20, 0.0)),
    ("jaw", 4, (0.08, -0.03, 0.0)),
]

# Joint indices of the four legs, proximal to distal.
LIMBS = {
    "lf": (8, 9, 10),
    "rf": (11, 12, 13),
    "lh": (14, 15, 16),
    "rh": (17, 18, 19),
}


def reference_skeleton() -> Skeleton:
    names = tuple(e[0] for e in _QUADRUPED)
    parents = np.array([e[1] for e in _QUADRUPED], dtype=np.int64)
    offsets = np.array([e[2] for e in _QUADRUPED], dtype=np.float64)
    return Skeleton(names, parents, offsets)
