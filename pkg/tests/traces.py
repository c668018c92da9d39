"""Random linear traces and two-norm sets for the replay checks."""
import random

from normlog.norms import NormSpec

TRACE_AGENTS = ("a", "b")
TRACE_ATOMS = ("p", "q", "r", "due")

_FORMULAS = ("p", "q", "r", "!p", "p & q", "p | r", "q & !r")


def random_specs(rng: random.Random) -> tuple[NormSpec, ...]:
    """Two norms for agent ``a``: one of each kind, or two of one kind."""
    specs = []
    for name in ("n1", "n2"):
        kind = rng.choice(("prohibition", "obligation"))
        doc = {
            "id": name, "kind": kind, "agent": "a",
            "activation": rng.choice(("true", "p", "q", "r")),
            "deactivation": rng.choice(("false", "false", "r", "!q")),
            "condition": rng.choice(_FORMULAS),
            "repair": rng.choice(_FORMULAS),
            "punishment": rng.choice(_FORMULAS + ("false",)),
        }
        if kind == "obligation":
            doc["deadline"] = rng.choice(("due", "due & !p"))
        specs.append(NormSpec.from_dict(doc))
    return tuple(specs)


def random_trace(rng: random.Random, max_length: int = 40) -> list:
    steps = []
    for _ in range(rng.randint(1, max_length)):
        atoms = frozenset(x for x in TRACE_ATOMS if rng.random() < 0.4)
        acting = frozenset(x for x in TRACE_AGENTS if rng.random() < 0.6)
        steps.append((atoms, acting))
    return steps
