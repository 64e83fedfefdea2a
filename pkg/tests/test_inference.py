import pytest

from app.core.errors import ParameterFileError
from app.models.run import ModelKind, TrialArtifact
from app.services.data import compute_stats, images_to_array, save_csv
from app.services.inference import ShowerService
from app.storage.repo import save_params

service = ShowerService()


@pytest.fixture
def params_file(tmp_path, train_set):
    artifact = TrialArtifact(
        model=ModelKind.FULL, trial=0, seed=0, gen=(0.0,) * 20, disc=(0.0,) * 20, stats=compute_stats(train_set)
    )
    return save_params(tmp_path / "params.json", artifact)


def test_generate_is_seeded(params_file):
    a = images_to_array(service.generate(params_file, 5, 1024, False, 3))
    b = images_to_array(service.generate(params_file, 5, 1024, False, 3))
    assert a.shape == (5, 8)
    assert (a == b).all()


def test_generate_rejects_missing_file(tmp_path):
    with pytest.raises(ParameterFileError):
        service.generate(tmp_path / "nope.json", 5, 1024, True, 0)


def test_evaluate_identical_samples(tmp_path, train_set):
    path = save_csv(train_set, tmp_path / "images.csv")
    generated, reference = service.load_pair(path, path)
    report = service.evaluate(generated, reference)
    assert report.mse.mse == 0.0
    assert report.squared_errors == [0.0] * 8
    assert report.n_generated == report.n_reference == len(train_set)
