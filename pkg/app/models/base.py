"""Variable table shared by every formula of a solve."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, Iterator, List, Optional

from app.utils.exceptions import ContractViolation

if TYPE_CHECKING:
    from app.models.polynomial import Monomial


class VarSort(enum.Enum):
    INT = 'Int'
    REAL = 'Real'
    BOOL = 'Bool'


class OriginKind(enum.Enum):
    ORIGINAL = 'original'
    MONOMIAL = 'monomial'
    MULTIPLIER = 'multiplier'
    LOWER_SLACK = 'lower_slack'
    UPPER_SLACK = 'upper_slack'
    COST_TOTAL = 'cost_total'
    SOFT_INDICATOR = 'soft_indicator'
    TSEITIN = 'tseitin'


@dataclass(frozen=True)
class VarOrigin:
    """Why a variable exists; only the field matching ``kind`` is set."""

    kind: OriginKind = OriginKind.ORIGINAL
    monomial: Optional["Monomial"] = None
    of: Optional[int] = None
    clause_id: Optional[int] = None


ORIGINAL = VarOrigin()


@dataclass(frozen=True)
class VarInfo:
    id: int
    name: str
    sort: VarSort
    origin: VarOrigin = ORIGINAL

    @property
    def is_original(self) -> bool:
        return self.origin.kind == OriginKind.ORIGINAL

    def to_dict(self) -> Dict[str, Any]:
        return {
            'id': self.id,
            'name': self.name,
            'sort': self.sort.value,
            'origin': self.origin.kind.value,
        }


@dataclass
class VarTable:
    """
    Dense id -> VarInfo registry.

    Ids are assigned in creation order. Names are unique; fresh names get a
    numeric suffix when they collide.
    """

    infos: List[VarInfo] = field(default_factory=list)
    _by_name: Dict[str, int] = field(default_factory=dict, repr=False)

    def add(self, name: str, sort: VarSort, origin: VarOrigin = ORIGINAL) -> int:
        if name in self._by_name:
            if origin.kind == OriginKind.ORIGINAL:
                raise ContractViolation(f"variable '{name}' declared twice")
            base, n = name, 1
            while f"{base}!{n}" in self._by_name:
                n += 1
            name = f"{base}!{n}"
        var_id = len(self.infos)
        self.infos.append(VarInfo(var_id, name, sort, origin))
        self._by_name[name] = var_id
        return var_id

    def __len__(self) -> int:
        return len(self.infos)

    def __iter__(self) -> Iterator[VarInfo]:
        return iter(self.infos)

    def __getitem__(self, var_id: int) -> VarInfo:
        return self.infos[var_id]

    def lookup(self, name: str) -> Optional[int]:
        return self._by_name.get(name)

    def sort(self, var_id: int) -> VarSort:
        return self.infos[var_id].sort

    def name(self, var_id: int) -> str:
        return self.infos[var_id].name

    def is_int(self, var_id: int) -> bool:
        return self.infos[var_id].sort == VarSort.INT

    def originals(self) -> List[int]:
        return [i.id for i in self.infos if i.is_original]

    def copy(self) -> "VarTable":
        return VarTable(list(self.infos), dict(self._by_name))

    def to_dict(self) -> Dict[str, Any]:
        return {'variables': [i.to_dict() for i in self.infos]}
