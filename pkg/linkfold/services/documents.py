"""Reading and writing linkage, configuration, layout and diagram documents."""
import json
import logging
import os
from typing import Optional, Type, TypeVar, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from linkfold.errors import MalformedInput
from linkfold.models import (
    ConfigurationDoc,
    DiagramDoc,
    DimensionDoc,
    GadgetDoc,
    LayoutDoc,
    LinkageDoc,
)
from linkfold.services.foldgen import CounterexampleLayout, GadgetSpec, LayoutMargins
from linkfold.services.homology import PersistenceDiagram
from linkfold.services.linkage import Configuration, Linkage, make_configuration, make_linkage

logger = logging.getLogger(__name__)

Doc = TypeVar("Doc", bound=BaseModel)


def read_json(path: str) -> dict:
    if not os.path.exists(path):
        raise MalformedInput(f"No such file: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise MalformedInput(f"Failed to read {path}: {e}")
    if not isinstance(data, dict):
        raise MalformedInput(f"{path}: expected a JSON object")
    return data


def parse_doc(data: dict, model: Type[Doc], source: str = "document") -> Doc:
    try:
        return model.model_validate(data)
    except ValidationError as e:
        raise MalformedInput(f"{source}: {e.error_count()} validation error(s): {e.errors()[0]['msg']}")


def write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(text)
    logger.debug(f"Wrote {path}")


def write_doc(path: str, doc: BaseModel) -> None:
    write_text(path, doc.model_dump_json(indent=2) + "\n")


def document_kind(data: dict) -> str:
    if "gadgets" in data:
        return "layout"
    if "vertices" in data:
        return "configuration"
    if "lengths" in data:
        return "linkage"
    raise MalformedInput("Unrecognized document: expected lengths, vertices or gadgets")


# --- linkage ---

def linkage_from_doc(doc: LinkageDoc) -> Linkage:
    return make_linkage(doc.lengths)


def linkage_to_doc(linkage: Linkage) -> LinkageDoc:
    return LinkageDoc(lengths=list(linkage.lengths))


# --- configuration ---

def configuration_from_doc(doc: ConfigurationDoc) -> Configuration:
    return make_configuration(doc.vertices, make_linkage(doc.lengths))


def configuration_to_doc(config: Configuration) -> ConfigurationDoc:
    return ConfigurationDoc(lengths=list(config.linkage.lengths), vertices=config.points())


# --- layout ---

def layout_from_doc(doc: LayoutDoc) -> CounterexampleLayout:
    linkage = make_linkage(doc.lengths)
    gadgets = []
    for g in doc.gadgets:
        if min(g.edge_indices) < 1:
            raise MalformedInput("Edge indices are 1-based")
        gadgets.append(GadgetSpec(
            fold_lengths=tuple(g.fold_lengths),
            anchor_start=np.array(g.anchors[0], dtype=float),
            anchor_end=np.array(g.anchors[1], dtype=float),
            side=g.side,
            edge_indices=tuple(e - 1 for e in g.edge_indices),
        ))
    base = np.array(doc.base_vertices, dtype=float).reshape(-1, 2)
    base.setflags(write=False)
    layout = CounterexampleLayout(linkage=linkage, gadgets=tuple(gadgets), base_vertices=base)

    if doc.angle_triples:
        declared = [tuple(v - 1 for v in t) for t in doc.angle_triples]
        if declared != list(layout.angle_triples):
            raise MalformedInput("angle_triples do not match the gadgets' vertices")
    return layout


def layout_to_doc(layout: CounterexampleLayout, margins: Optional[LayoutMargins] = None) -> LayoutDoc:
    gadgets = [
        GadgetDoc(
            edge_indices=tuple(e + 1 for e in g.edge_indices),
            anchors=(tuple(g.anchor_start.tolist()), tuple(g.anchor_end.tolist())),
            side=g.side,
            fold_lengths=g.fold_lengths,
        )
        for g in layout.gadgets
    ]
    return LayoutDoc(
        lengths=list(layout.linkage.lengths),
        gadgets=gadgets,
        base_vertices=[tuple(p) for p in layout.base_vertices.tolist()],
        angle_triples=[tuple(v + 1 for v in t) for t in layout.angle_triples],
        margins=None if margins is None else {
            "region_gap": _finite(margins.region_gap),
            "base_gap": _finite(margins.base_gap),
        },
    )


def _finite(x: float) -> Optional[float]:
    return None if x == float("inf") else x


# --- diagrams ---

def diagram_to_doc(diagram: PersistenceDiagram) -> DiagramDoc:
    return DiagramDoc(dims=[
        DimensionDoc(
            k=k,
            pairs=list(g.pairs),
            infinite=list(g.infinite),
            zero_persistence=g.zero_persistence,
        )
        for k, g in sorted(diagram.dims.items())
    ])


def load_input(path: str) -> Union[Linkage, Configuration, CounterexampleLayout]:
    """Loads whichever document the file holds."""
    data = read_json(path)
    kind = document_kind(data)
    if kind == "layout":
        return layout_from_doc(parse_doc(data, LayoutDoc, path))
    if kind == "configuration":
        return configuration_from_doc(parse_doc(data, ConfigurationDoc, path))
    return linkage_from_doc(parse_doc(data, LinkageDoc, path))


def load_layout(path: str) -> CounterexampleLayout:
    data = read_json(path)
    if document_kind(data) != "layout":
        raise MalformedInput(f"{path} does not hold a layout")
    return layout_from_doc(parse_doc(data, LayoutDoc, path))
