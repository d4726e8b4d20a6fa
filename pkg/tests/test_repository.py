#!/usr/bin/env python3
"""
Tests for codebook files and JSON result persistence.
"""

import json
import os
import sys
import tempfile

import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from src.domain.errors import CodebookFormatError, ParameterError
from src.domain.models import Codebook, NormKind
from src.infrastructure.codebook_repository import CodebookRepository, format_header, parse_header
from src.infrastructure.gaussian_generators import gen_nonneg_l1wsc, gen_wesc
from src.infrastructure.json_repository import JsonResultRepository, dumps
from src.infrastructure.rng import RngSpec


class TestCodebookRepository:
    """Codebook v1 text format."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.repository = CodebookRepository()
        self.path = os.path.join(self.temp_dir, "cb.txt")

    def write(self, text):
        with open(self.path, "w") as f:
            f.write(text)

    def test_header(self):
        codebook = gen_wesc(3, 2, RngSpec(7))
        assert format_header(codebook) == f"#wsc-codebook v1 m=3 n=2 norm=l2 nonneg=0 seed={RngSpec(7).seed}"
        assert parse_header(format_header(codebook))["norm"] == "l2"

    def test_exact_round_trip(self):
        for codebook in (gen_wesc(5, 4, RngSpec(1)), gen_nonneg_l1wsc(6, 3, RngSpec(2))):
            self.repository.save(codebook, self.path)
            loaded = self.repository.load(self.path)
            assert np.array_equal(loaded.values, codebook.values)
            assert loaded.norm is codebook.norm
            assert loaded.nonneg == codebook.nonneg
            assert loaded.seed == codebook.seed

    def test_explicit_codebook_without_seed(self):
        self.repository.save(Codebook(np.eye(2), NormKind.L2), self.path)
        with open(self.path) as f:
            assert f.readline().strip().endswith("seed=none")
        assert self.repository.load(self.path).seed is None

    def test_creates_directory(self):
        path = os.path.join(self.temp_dir, "nested", "cb.txt")
        self.repository.save(Codebook(np.eye(2), NormKind.L1), path)
        assert os.path.exists(path)
        assert not os.path.exists(path + ".tmp")

    def test_missing_header(self):
        self.write("1.0,0.0\n0.0,1.0\n")
        with pytest.raises(CodebookFormatError, match="header"):
            self.repository.load(self.path)

    def test_wrong_version(self):
        self.write("#wsc-codebook v2 m=1 n=1 norm=l2 nonneg=0 seed=none\n1.0\n")
        with pytest.raises(CodebookFormatError, match="version"):
            self.repository.load(self.path)

    def test_row_count_mismatch(self):
        self.write("#wsc-codebook v1 m=2 n=1 norm=l2 nonneg=0 seed=none\n1.0\n")
        with pytest.raises(CodebookFormatError, match="rows"):
            self.repository.load(self.path)

    def test_column_not_normalized(self):
        self.write("#wsc-codebook v1 m=2 n=1 norm=l2 nonneg=0 seed=none\n1.0\n1.0\n")
        with pytest.raises(CodebookFormatError, match="norm"):
            self.repository.load(self.path)

    def test_format_error_is_a_parameter_error(self):
        self.write("")
        with pytest.raises(ParameterError):
            self.repository.load(self.path)

    def test_missing_file(self):
        with pytest.raises(CodebookFormatError):
            self.repository.load(os.path.join(self.temp_dir, "absent.txt"))


class TestJsonResultRepository:
    """Sorted JSON results with a metadata sidecar."""

    def setup_method(self):
        self.temp_dir = tempfile.mkdtemp()
        self.repository = JsonResultRepository(self.temp_dir)

    def test_save_and_load(self):
        payload = {"value": 1.0, "examined": "6", "witness": {"n": 2, "entries": [[0, 1]]}}
        target = self.repository.save("cert.json", payload, ["verify", "--k", "1"])
        assert target == os.path.join(self.temp_dir, "cert.json")
        assert self.repository.load("cert.json") == payload

    def test_sorted_keys_byte_identical(self):
        self.repository.save("a.json", {"b": 1, "a": 2})
        self.repository.save("b.json", {"a": 2, "b": 1})
        with open(os.path.join(self.temp_dir, "a.json")) as f, open(os.path.join(self.temp_dir, "b.json")) as g:
            assert f.read() == g.read()

    def test_metadata_sidecar(self):
        self.repository.save("out.json", {"x": 1}, ["bounds"])
        metadata = self.repository.get_metadata("out.json")
        assert metadata["command"] == ["bounds"]
        assert "created_at" in metadata
        with open(os.path.join(self.temp_dir, "out.json")) as f:
            assert "created_at" not in json.load(f)

    def test_missing_metadata(self):
        assert self.repository.get_metadata("nothing.json") == {}

    def test_invalid_json(self):
        with open(os.path.join(self.temp_dir, "bad.json"), "w") as f:
            f.write("{not json")
        with pytest.raises(ParameterError, match="not valid JSON"):
            self.repository.load("bad.json")

    def test_non_object(self):
        with open(os.path.join(self.temp_dir, "list.json"), "w") as f:
            f.write("[1, 2]")
        with pytest.raises(ParameterError, match="JSON object"):
            self.repository.load("list.json")

    def test_dumps_trailing_newline(self):
        assert dumps({"a": 1}).endswith("}\n")


if __name__ == '__main__':
    pytest.main([__file__])
