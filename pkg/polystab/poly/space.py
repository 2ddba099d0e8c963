"""Ordered variable spaces with group tags.

Variables are laid out as ``[x1 | x2 | y | z]``. The x-groups hold the plant
state, ``y`` the auxiliary vector of the data-driven condition and ``z`` the
scalarization block used to certify matrix SOS constraints.
"""
from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

from polystab.models.types import VariableGroup
from polystab.utils.exceptions import SpaceMismatchError, UnknownVariableError


@dataclass(frozen=True)
class VariableSpace:
    x1: Tuple[str, ...]
    x2: Tuple[str, ...]
    y: Tuple[str, ...] = ()
    z: Tuple[str, ...] = ()

    def __post_init__(self):
        for group in ('x1', 'x2', 'y', 'z'):
            object.__setattr__(self, group, tuple(getattr(self, group)))
        if not self.x2:
            raise ValueError('a variable space needs at least one x2 variable')
        names = self.names
        if len(set(names)) != len(names):
            raise ValueError(f'duplicate variable names in {names}')

    @classmethod
    def of(cls, names: Sequence[str], n1: int = 0) -> 'VariableSpace':
        """Space whose first ``n1`` names form the x1 group and the rest x2."""
        names = tuple(names)
        return cls(x1=names[:n1], x2=names[n1:])

    @property
    def names(self) -> Tuple[str, ...]:
        return self.x1 + self.x2 + self.y + self.z

    @property
    def dim(self) -> int:
        return len(self.x1) + len(self.x2) + len(self.y) + len(self.z)

    @property
    def n1(self) -> int:
        return len(self.x1)

    @property
    def n2(self) -> int:
        return len(self.x2)

    @property
    def n(self) -> int:
        return len(self.x1) + len(self.x2)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise UnknownVariableError(name) from None

    def group_indices(self, group: VariableGroup) -> Tuple[int, ...]:
        n1, n2, p, q = len(self.x1), len(self.x2), len(self.y), len(self.z)
        ranges = {
            VariableGroup.X1: range(0, n1),
            VariableGroup.X2: range(n1, n1 + n2),
            VariableGroup.Y: range(n1 + n2, n1 + n2 + p),
            VariableGroup.Z: range(n1 + n2 + p, n1 + n2 + p + q),
            VariableGroup.ALL: range(0, n1 + n2),
        }
        return tuple(ranges[group])

    def indices(self, names: Iterable[str]) -> Tuple[int, ...]:
        return tuple(self.index(name) for name in names)

    def group_of(self, k: int) -> VariableGroup:
        for group in (VariableGroup.X1, VariableGroup.X2, VariableGroup.Y, VariableGroup.Z):
            if k in self.group_indices(group):
                return group
        raise IndexError(k)

    @property
    def state(self) -> 'VariableSpace':
        """The x-only space this space extends."""
        return VariableSpace(x1=self.x1, x2=self.x2)

    def with_y(self, p: int) -> 'VariableSpace':
        return self._extend(y=tuple(f'y_{k + 1}' for k in range(p)), z=self.z)

    def with_z(self, q: int) -> 'VariableSpace':
        return self._extend(y=self.y, z=tuple(f'z_{k + 1}' for k in range(q)))

    def _extend(self, y: Tuple[str, ...], z: Tuple[str, ...]) -> 'VariableSpace':
        clash = set(y + z) & set(self.x1 + self.x2)
        if clash:
            raise ValueError(f'state variables clash with auxiliary names: {sorted(clash)}')
        return VariableSpace(x1=self.x1, x2=self.x2, y=y, z=z)

    def is_prefix_of(self, other: 'VariableSpace') -> bool:
        return other.names[:self.dim] == self.names

    def require_same(self, other: 'VariableSpace'):
        if self is not other and self != other:
            raise SpaceMismatchError(f'variable spaces differ: {self.names} vs {other.names}')
