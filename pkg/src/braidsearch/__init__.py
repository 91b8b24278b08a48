"""Length-based conjugacy search in braid groups."""

__version__ = "0.1.0"

from .braid import (  # noqa: E402
    BraidParseError,
    BraidWord,
    Garside,
    NormalForm,
    Permutation,
    PermutationBraid,
    StrandMismatch,
    braid_equal,
    left_normal_form,
    nf_to_word,
    parse_word,
)
from .gcsp import (  # noqa: E402
    AttackConfig,
    AttackResult,
    GcspInstance,
    InstanceParams,
    build_instance,
    run_attack,
)
from .lengths import LengthFunction, garside_length, mixed_form, reduced_garside_length  # noqa: E402
from .orderings import Ordering, rank_candidates  # noqa: E402

__all__ = [
    "AttackConfig", "AttackResult", "BraidParseError", "BraidWord", "Garside", "GcspInstance",
    "InstanceParams", "LengthFunction", "NormalForm", "Ordering", "Permutation", "PermutationBraid",
    "StrandMismatch", "braid_equal", "build_instance", "garside_length", "left_normal_form", "mixed_form",
    "nf_to_word", "parse_word", "rank_candidates", "reduced_garside_length", "run_attack",
]
