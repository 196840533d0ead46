"""Bundled example graphs.

``two_node``: the minimal directed graph 0 -> 1 (node 1 dangling); small
enough that every quantity has a hand-checkable value.

``six_node``: a six-node directed graph whose thermodynamic scan shows
the full crossover phenomenology: an interior peak of the global index
of dispersion separating distinct active- and inactive-side plateaus of
the normalized activity.  Chosen by numerical search over small
digraphs for robustness of that shape; see the file header.
"""

from __future__ import annotations

from importlib import resources

from ..graph import DirectedGraph, parse_edge_list

BUNDLED = ("two_node", "six_node")


def load_bundled(name: str) -> DirectedGraph:
    """Load a bundled graph by name (see :data:`BUNDLED`)."""
    if name not in BUNDLED:
        raise ValueError(f"unknown bundled graph {name!r}; available: {BUNDLED}")
    text = resources.files(__package__).joinpath(f"{name}.edges").read_text()
    return parse_edge_list(text)
