import json

import numpy as np
import pytest

from linkfold.errors import ConstraintViolation, MalformedInput, NonPositiveLength
from linkfold.models import LayoutDoc
from linkfold.services.documents import (
    configuration_to_doc,
    document_kind,
    layout_from_doc,
    layout_to_doc,
    linkage_to_doc,
    load_input,
    load_layout,
    read_json,
    write_doc,
    write_text,
)
from linkfold.services.foldgen import CounterexampleLayout, gamma_at, layout_margins
from linkfold.services.linkage import Configuration, Linkage


def _write(path, data):
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_layout_document_keeps_one_based_indices(layout_m2, tmp_path):
    doc = layout_to_doc(layout_m2, layout_margins(layout_m2))
    assert doc.gadgets[0].edge_indices == (2, 3, 4)
    assert doc.gadgets[1].edge_indices == (7, 8, 9)
    assert doc.angle_triples == [(2, 3, 4), (7, 8, 9)]
    assert doc.margins["region_gap"] > 0

    path = str(tmp_path / "layout.json")
    write_doc(path, doc)
    loaded = load_layout(path)
    assert isinstance(loaded, CounterexampleLayout)
    assert loaded.angle_triples == layout_m2.angle_triples
    assert loaded.fixed_indices == layout_m2.fixed_indices
    assert np.array_equal(loaded.base_vertices, layout_m2.base_vertices)
    assert np.array_equal(gamma_at(loaded, [0.3, 0.8]).vertices, gamma_at(layout_m2, [0.3, 0.8]).vertices)


def test_load_input_dispatches_on_content(layout_m1, unit_square, tmp_path):
    linkage_path = str(tmp_path / "linkage.json")
    write_doc(linkage_path, linkage_to_doc(unit_square.linkage))
    config_path = str(tmp_path / "config.json")
    write_doc(config_path, configuration_to_doc(unit_square))
    layout_path = str(tmp_path / "layout.json")
    write_doc(layout_path, layout_to_doc(layout_m1))

    assert isinstance(load_input(linkage_path), Linkage)
    config = load_input(config_path)
    assert isinstance(config, Configuration)
    assert np.array_equal(config.vertices, unit_square.vertices)
    assert isinstance(load_input(layout_path), CounterexampleLayout)


def test_document_kind():
    assert document_kind({"lengths": [1, 1, 1]}) == "linkage"
    assert document_kind({"lengths": [1, 1, 1], "vertices": []}) == "configuration"
    assert document_kind({"lengths": [], "gadgets": [], "base_vertices": []}) == "layout"
    with pytest.raises(MalformedInput):
        document_kind({"points": []})


def test_malformed_files(tmp_path):
    with pytest.raises(MalformedInput):
        read_json(str(tmp_path / "missing.json"))

    broken = tmp_path / "broken.json"
    broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(MalformedInput):
        read_json(str(broken))

    with pytest.raises(MalformedInput):
        read_json(_write(tmp_path / "list.json", [1, 2, 3]))

    with pytest.raises(MalformedInput):
        load_input(_write(tmp_path / "typed.json", {"lengths": ["a", 1, 1]}))


def test_invalid_contents_keep_their_own_errors(tmp_path):
    with pytest.raises(NonPositiveLength):
        load_input(_write(tmp_path / "zero.json", {"lengths": [1, 0, 1]}))
    with pytest.raises(ConstraintViolation):
        load_input(_write(tmp_path / "bad.json", {"lengths": [1, 1, 1, 1], "vertices": [[0, 0], [2, 0], [2, 1], [0, 1]]}))


def test_layout_document_errors(layout_m1, tmp_path):
    data = layout_to_doc(layout_m1).model_dump(mode="json")

    with pytest.raises(MalformedInput):
        load_layout(_write(tmp_path / "linkage.json", {"lengths": [1, 1, 1]}))

    shifted = json.loads(json.dumps(data))
    shifted["angle_triples"] = [[1, 2, 3]]
    with pytest.raises(MalformedInput):
        load_layout(_write(tmp_path / "triples.json", shifted))

    zero_based = json.loads(json.dumps(data))
    zero_based["gadgets"][0]["edge_indices"] = [0, 1, 2]
    with pytest.raises(MalformedInput):
        layout_from_doc(LayoutDoc.model_validate(zero_based))

    sideways = json.loads(json.dumps(data))
    sideways["gadgets"][0]["side"] = 0
    with pytest.raises(MalformedInput):
        load_layout(_write(tmp_path / "side.json", sideways))


def test_write_text_creates_directories(tmp_path):
    path = tmp_path / "a" / "b" / "out.txt"
    write_text(str(path), "hello\n")
    assert path.read_text(encoding="utf-8") == "hello\n"
