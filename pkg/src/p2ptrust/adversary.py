"""Malicious peer behavior and churn.

Threat model A peers serve an authentic file with probability ``deception``
and a fake otherwise.  Threat model B peers behave until their connectivity
reaches the edge limit, then serve fakes for good.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass
from typing import Sequence

from .content import FileId, PeerLibrary
from .errors import ParameterError
from .overlay import OverlayGraph
from .reputation import Outcome


class PeerKind(str, enum.Enum):
    HONEST = "honest"
    MALICIOUS_A = "malicious_A"
    MALICIOUS_B = "malicious_B"


class Phase(str, enum.Enum):
    ACCUMULATING = "accumulating"
    ATTACKING = "attacking"


@dataclass
class PeerDisposition:
    kind: PeerKind = PeerKind.HONEST
    deception: float = 0.1
    phase: Phase = Phase.ACCUMULATING

    @property
    def malicious(self) -> bool:
        return self.kind is not PeerKind.HONEST


def mark_malicious(
    n: int, fraction: float, model: str, rng: random.Random, deception: float = 0.1
) -> list[PeerDisposition]:
    if not 0.0 <= fraction <= 1.0:
        raise ParameterError(f"malicious fraction must be in [0, 1], got {fraction}")
    kind = {"A": PeerKind.MALICIOUS_A, "B": PeerKind.MALICIOUS_B}.get(model)
    if kind is None:
        raise ParameterError(f"unknown threat model {model!r}")
    bad = set(rng.sample(range(n), int(fraction * n + 1e-9)))
    return [
        PeerDisposition(kind if x in bad else PeerKind.HONEST, deception) for x in range(n)
    ]


def will_respond(disp: PeerDisposition, library: PeerLibrary, target: FileId) -> bool:
    """Honest peers answer for files they hold; malicious ones for any category they carry."""
    if disp.malicious:
        return library.shares(target.category)
    return target in library.files


def serve_decision(
    disp: PeerDisposition, graph: OverlayGraph, peer: int, rng: random.Random
) -> Outcome:
    if disp.kind is PeerKind.HONEST:
        return Outcome.AUTHENTIC
    if disp.kind is PeerKind.MALICIOUS_A:
        return Outcome.AUTHENTIC if rng.random() < disp.deception else Outcome.FAKE
    if disp.phase is Phase.ACCUMULATING and not graph.has_capacity(peer):
        disp.phase = Phase.ATTACKING
    return Outcome.AUTHENTIC if disp.phase is Phase.ACCUMULATING else Outcome.FAKE


def apply_churn(n: int, fraction: float, rng: random.Random) -> frozenset[int]:
    """Pick the peers that sit out this generation."""
    if not 0.0 <= fraction < 1.0:
        raise ParameterError(f"churn fraction must be in [0, 1), got {fraction}")
    return frozenset(rng.sample(range(n), int(fraction * n + 1e-9)))


def count_malicious(dispositions: Sequence[PeerDisposition]) -> int:
    return sum(d.malicious for d in dispositions)
