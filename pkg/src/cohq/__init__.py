"""Coherent states and group averaging for quadratic-constraint toy models.

Submodules:

* :mod:`cohq.fock`      truncated two-mode Fock space, operators and kets
* :mod:`cohq.models`    constraints, generator triples, Casimirs, representation selection
* :mod:`cohq.coherent`  SU(2), SU(1,1) and product coherent states; resolution of identity
* :mod:`cohq.rigging`   group-averaging projector and the kinematical/physical comparison
* :mod:`cohq.classical` constraint surfaces, gauge flow, reduced coordinates
* :mod:`cohq.suites`    named verification suites; :mod:`cohq.cli` the runner
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CohqError,
    ConfigError,
    DomainError,
    NoPhysicalStates,
    NotPhysical,
    SpaceMismatchError,
    TruncationTooSmall,
    UnsupportedModel,
    UnsupportedRepresentation,
    UsageError,
)
from .fock import FockSpace, Ket, LinOp, Scheme, make_space  # noqa: E402
from .models import GeneratorTriple, Model, ModelSpec, RepIndex, build_constraint, build_generators  # noqa: E402
from .report import CheckRecord, CheckReport  # noqa: E402

__all__ = [
    "CheckRecord", "CheckReport", "CohqError", "ConfigError", "DomainError", "FockSpace", "GeneratorTriple",
    "Ket", "LinOp", "Model", "ModelSpec", "NoPhysicalStates", "NotPhysical", "RepIndex", "Scheme",
    "SpaceMismatchError", "TruncationTooSmall", "UnsupportedModel", "UnsupportedRepresentation", "UsageError",
    "build_constraint", "build_generators", "make_space",
]
