"""Exact sigma-field algebra over finite ground sets.

On a finite ground set, sigma-fields and partitions into atoms are in
bijection, so every field here is stored canonically as a partition:
atoms are frozensets of element indices, sorted by least element.  All
values are immutable and all operations are pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .errors import BadPrefix, GroundMismatch, MissingEntry, NotAFactor, ValidationError


@dataclass(frozen=True)
class GroundSet:
    """A named finite product space whose elements are symbol tuples.

    ``coords`` pairs each coordinate name with its ordered alphabet; the
    elements are the full cartesian product in lexicographic order over
    coordinate indices, which fixes the canonical element order used by
    every partition over this ground.
    """

    coords: tuple[tuple[str, tuple[str, ...]], ...]
    elements: tuple[tuple[str, ...], ...] = field(init=False, repr=False, compare=False)
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        alphabets = [symbols for _, symbols in self.coords]
        elements = tuple(itertools.product(*alphabets))
        if len(set(elements)) != len(elements):
            raise ValidationError("ground set elements are not distinct")
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "index", {e: i for i, e in enumerate(elements)})

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.coords)

    def __len__(self):
        return len(self.elements)

    def coord_pos(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise MissingEntry(f"no coordinate named {name!r}") from None


def _canonical(atoms) -> tuple[frozenset, ...]:
    return tuple(sorted((frozenset(a) for a in atoms), key=min))


@dataclass(frozen=True)
class PartitionField:
    """A sigma-field over a finite ground, as its partition into atoms."""

    ground: GroundSet
    atoms: tuple[frozenset, ...]

    def __post_init__(self):
        atoms = _canonical(self.atoms)
        covered = set()
        for a in atoms:
            if not a:
                raise ValidationError("empty atom in partition")
            if covered & a:
                raise ValidationError("atoms are not pairwise disjoint")
            covered |= a
        if covered != set(range(len(self.ground))):
            raise ValidationError("atoms do not cover the ground set")
        object.__setattr__(self, "atoms", atoms)

    def atom_of(self, element_index: int) -> frozenset:
        for a in self.atoms:
            if element_index in a:
                return a
        raise MissingEntry(f"element index {element_index} outside ground")

    def __len__(self):
        return len(self.atoms)


def trivial_field(ground: GroundSet) -> PartitionField:
    """The coarsest field: a single atom equal to the whole ground."""
    return PartitionField(ground, (frozenset(range(len(ground))),))


def discrete_field(ground: GroundSet) -> PartitionField:
    """The finest field: singleton atoms."""
    return PartitionField(ground, tuple(frozenset([i]) for i in range(len(ground))))


def field_from_map(ground: GroundSet, f) -> PartitionField:
    """Coarsest field making ``f`` measurable: atoms are the level sets.

    ``f`` is either a callable on element tuples or a mapping keyed by
    them; it must be total on the ground set.
    """
    getter = f if callable(f) else None
    levels: dict = {}
    for i, elem in enumerate(ground.elements):
        if getter is not None:
            value = getter(elem)
        else:
            if elem not in f:
                raise MissingEntry(f"map undefined on outcome {elem}")
            value = f[elem]
        levels.setdefault(value, set()).add(i)
    return PartitionField(ground, tuple(frozenset(s) for s in levels.values()))


def field_from_sets(ground: GroundSet, family, claimed_atoms=None) -> PartitionField:
    """Convert a set-of-sets representation into its atom partition.

    ``family`` is an iterable of event sets (iterables of element tuples);
    the result is the field they generate, with atoms extracted from the
    per-element membership signatures.  When ``claimed_atoms`` is given the
    generated atoms must match it exactly, otherwise the representation is
    rejected as inconsistent.
    """
    events = []
    for ev in family:
        idx = set()
        for elem in ev:
            if elem not in ground.index:
                raise ValidationError(f"event element {elem} outside ground")
            idx.add(ground.index[elem])
        events.append(frozenset(idx))
    signature = {}
    for i in range(len(ground)):
        signature.setdefault(tuple(i in ev for ev in events), set()).add(i)
    fld = PartitionField(ground, tuple(frozenset(s) for s in signature.values()))
    if claimed_atoms is not None:
        claimed = _canonical(
            frozenset(ground.index[elem] for elem in atom) for atom in claimed_atoms
        )
        if claimed != fld.atoms:
            raise ValidationError(
                "family does not generate the claimed atoms: "
                f"generated {len(fld.atoms)} atoms, claimed {len(claimed)}"
            )
    return fld


def is_coarser(a: PartitionField, b: PartitionField) -> bool:
    """True iff sigma(a) is contained in sigma(b).

    Equivalently every atom of ``b`` lies inside a single atom of ``a``.
    """
    if a.ground != b.ground:
        raise GroundMismatch("fields live on different grounds")
    owner = {}
    for k, atom in enumerate(a.atoms):
        for i in atom:
            owner[i] = k
    for atom in b.atoms:
        owners = {owner[i] for i in atom}
        if len(owners) > 1:
            return False
    return True


def join(a: PartitionField, b: PartitionField) -> PartitionField:
    """Coarsest field containing both: the common refinement of atoms."""
    if a.ground != b.ground:
        raise GroundMismatch("fields live on different grounds")
    atoms = []
    for x in a.atoms:
        for y in b.atoms:
            z = x & y
            if z:
                atoms.append(z)
    return PartitionField(a.ground, tuple(atoms))


def cylindrical_extension(f: PartitionField, target: GroundSet) -> PartitionField:
    """Lift a field to a larger ground by taking projection preimages.

    ``target`` must factor as the source ground times extra coordinates:
    every source coordinate name must appear in the target with the same
    alphabet.
    """
    src = f.ground
    try:
        positions = [target.coord_pos(name) for name in src.names]
    except MissingEntry as exc:
        raise NotAFactor(str(exc)) from None
    for (name, symbols), pos in zip(src.coords, positions):
        if target.coords[pos][1] != symbols:
            raise NotAFactor(f"coordinate {name!r} has a different alphabet in target")
    src_atom_of = {}
    for k, atom in enumerate(f.atoms):
        for i in atom:
            src_atom_of[src.elements[i]] = k
    lifted: dict[int, set] = {}
    for j, elem in enumerate(target.elements):
        projected = tuple(elem[p] for p in positions)
        if projected not in src_atom_of:
            raise NotAFactor(f"target element projects outside source ground: {projected}")
    for j, elem in enumerate(target.elements):
        projected = tuple(elem[p] for p in positions)
        lifted.setdefault(src_atom_of[projected], set()).add(j)
    return PartitionField(target, tuple(frozenset(s) for s in lifted.values()))


def project(prefix: tuple[int, ...], outcome: tuple, n_dms: int):
    """Project an intrinsic outcome onto its signal part plus a DM prefix.

    ``outcome`` is a tuple whose last ``n_dms`` entries are the action
    coordinates u^1..u^N; ``prefix`` lists 1-based DM indices.  The empty
    prefix returns the signal part alone.
    """
    if len(set(prefix)) != len(prefix):
        raise BadPrefix(f"prefix {prefix} repeats an index")
    for i in prefix:
        if not 1 <= i <= n_dms:
            raise BadPrefix(f"index {i} outside 1..{n_dms}")
    signal_part = outcome[: len(outcome) - n_dms]
    actions = outcome[len(outcome) - n_dms :]
    return signal_part + tuple(actions[i - 1] for i in prefix)
