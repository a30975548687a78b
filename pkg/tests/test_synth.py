import json

import pytest

from refclass.corpus import load_corpus
from refclass.scheme import load_scheme
from refclass.synth import RNG_ALGORITHM, SynthParams, generate


def read_all(out_dir):
    return {p.name: p.read_bytes() for p in sorted(out_dir.iterdir())}


class TestGenerate:
    def test_same_seed_same_files(self, tmp_path):
        params = SynthParams(n_papers=50, n_categories=5, seed=3,
                             journal_noise=0.2, misc_fraction=0.1,
                             multidisciplinary_fraction=0.1)
        generate(params).write(tmp_path / "a")
        generate(params).write(tmp_path / "b")
        assert read_all(tmp_path / "a") == read_all(tmp_path / "b")

    def test_different_seed_differs(self, tmp_path):
        base = dict(n_papers=50, n_categories=5, journal_noise=0.2)
        generate(SynthParams(seed=1, **base)).write(tmp_path / "a")
        generate(SynthParams(seed=2, **base)).write(tmp_path / "b")
        assert read_all(tmp_path / "a") != read_all(tmp_path / "b")

    def test_output_loads_as_corpus(self, tmp_path):
        paths = generate(SynthParams(
            n_papers=40, n_categories=4, seed=9, misc_fraction=0.2,
            multidisciplinary_fraction=0.1)).write(tmp_path)
        scheme = load_scheme(paths["scheme"])
        corpus = load_corpus(paths["papers"], paths["journals"],
                             paths["references"], scheme)
        assert len(corpus) == 40
        assert scheme.size == 4

    def test_planted_labels_are_regular_codes(self, tmp_path):
        sc = generate(SynthParams(n_papers=30, n_categories=6, seed=4))
        paths = sc.write(tmp_path)
        scheme = load_scheme(paths["scheme"])
        assert all(scheme.is_regular(code) for code in sc.labels.values())

    def test_metadata_records_rng(self, tmp_path):
        paths = generate(SynthParams(n_papers=10, n_categories=2, seed=1)).write(tmp_path)
        meta = json.loads(paths["metadata"].read_text())
        assert meta["rng"] == RNG_ALGORITHM
        assert meta["params"]["seed"] == 1

    def test_short_ref_fraction_plants_ineligible_papers(self, tmp_path):
        sc = generate(SynthParams(n_papers=200, n_categories=4, seed=8,
                                  short_ref_fraction=0.3))
        counts = {}
        for pid, _ in sc.ref_rows:
            counts[pid] = counts.get(pid, 0) + 1
        short = sum(1 for pid, _ in sc.paper_rows if counts.get(pid, 0) < 3)
        assert short > 0

    def test_seed_mandatory(self):
        with pytest.raises(TypeError):
            SynthParams(n_papers=10, n_categories=2)
