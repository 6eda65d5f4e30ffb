"""Stable identities for assumption and guarantee terms."""

from dataclasses import dataclass

ASSUMPTION = "assumption"
GUARANTEE = "guarantee"
SECTIONS = (ASSUMPTION, GUARANTEE)


@dataclass(frozen=True, order=True)
class TermId:
    """Identity of one term: which contract owns it, which section, which slot.

    Ordering is (owner, section, index), which is the tie-break order used
    wherever the library has to choose between equally good terms.
    """

    owner: str
    section: str
    index: int

    def __post_init__(self):
        if self.section not in SECTIONS:
            raise ValueError(f"section must be one of {SECTIONS}, got {self.section!r}")

    @property
    def is_guarantee(self):
        return self.section == GUARANTEE

    @property
    def is_assumption(self):
        return self.section == ASSUMPTION

    @property
    def short(self):
        """Owner-local label such as ``g0`` or ``a3``."""
        return f"{self.section[0]}{self.index}"

    def __str__(self):
        return f"{self.owner}.{self.short}"

    @classmethod
    def parse(cls, text):
        """Inverse of ``str``: ``"C1.g0"`` -> TermId("C1", "guarantee", 0)."""
        owner, sep, local = text.rpartition(".")
        if not sep or len(local) < 2 or local[0] not in "ag" or not local[1:].isdigit():
            raise ValueError(f"not a term id: {text!r}")
        section = ASSUMPTION if local[0] == "a" else GUARANTEE
        return cls(owner, section, int(local[1:]))
