from __future__ import annotations

import json
from dataclasses import dataclass, field

from .mdp import LabelledMc, model_doc

GFM = "GFM"
NOT_GFM = "NOT_GFM"


@dataclass
class GfmVerdict:
    decision: str
    route: str
    witness: LabelledMc | None = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.decision == GFM

    def to_doc(self) -> dict:
        return {
            "decision": self.decision,
            "route": self.route,
            "witness": model_doc(self.witness) if self.witness is not None else None,
            "diagnostics": self.diagnostics,
        }

    def dump(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True, indent=1, ensure_ascii=False) + "\n"
