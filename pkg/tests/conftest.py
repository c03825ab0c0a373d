import warnings

import pytest

from prime import pipeline
from prime.synthetic import generate_synthetic


@pytest.fixture(scope="session")
def synth_paths(tmp_path_factory):
    outdir = tmp_path_factory.mktemp("synth")
    return generate_synthetic(outdir)


@pytest.fixture(scope="session")
def loaded(synth_paths):
    return pipeline.load_inputs(synth_paths["hazards"], synth_paths["population"],
                                synth_paths["socio"],
                                geometry=synth_paths["geometry"])


@pytest.fixture(scope="session")
def scored(loaded):
    return pipeline.run_scoring(loaded, pipeline.FilterParams(years=(2000, 2020)))


@pytest.fixture(scope="session")
def aligned(loaded, scored):
    return pipeline.build_aligned(loaded, scored)


@pytest.fixture(scope="session")
def pruned_dataset(aligned):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        pruned, rep = pipeline.run_pruning(aligned, mode="threshold", threshold=0.7)
    return pruned, rep
