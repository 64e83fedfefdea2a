import numpy as np
import pytest

from app.core.errors import DataFormatError, InvalidInputError
from app.models.shower import DEFAULT_PROFILE_MEANS, ShowerImage, ShowerProfile
from app.services import data

# pixels whose spread stays clear of both clamps under the default profile
UNCLAMPED = [1, 2, 5, 6]
SCALE_VAR = (50.0 / 250.0) ** 2 / 12.0


def write(tmp_path, text, name="images.csv"):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


def test_synth_dataset_respects_range():
    images = data.synth_dataset(1000, seed=7)
    arr = data.images_to_array(images)
    assert arr.shape == (1000, 8)
    assert arr.min() >= 0.0 and arr.max() <= 0.6
    assert all(225 <= img.primary_energy <= 275 for img in images)


def test_synth_dataset_degenerate_profile():
    profile = ShowerProfile(stds=(0.0,) * 8, primary_range=(250.0, 250.0))
    arr = data.images_to_array(data.synth_dataset(5, seed=1, profile=profile))
    np.testing.assert_allclose(arr, np.tile(DEFAULT_PROFILE_MEANS, (5, 1)))


def test_synth_dataset_is_deterministic():
    a = data.images_to_array(data.synth_dataset(100, seed=5))
    b = data.images_to_array(data.synth_dataset(100, seed=5))
    np.testing.assert_array_equal(a, b)


def test_train_and_test_seeds_share_no_images():
    train = {img.pixels for img in data.synth_dataset(1000, seed=0)}
    test = {img.pixels for img in data.synth_dataset(1000, seed=10_000)}
    assert not train & test


def test_synth_dataset_rejects_empty():
    with pytest.raises(InvalidInputError):
        data.synth_dataset(0, seed=0)


def test_synth_statistics_follow_profile():
    arr = data.images_to_array(data.synth_dataset(10_000, seed=8))
    profile = ShowerProfile()
    mu = np.asarray(profile.means)[UNCLAMPED]
    sigma = np.asarray(profile.stds)[UNCLAMPED]
    np.testing.assert_allclose(arr.mean(axis=0)[UNCLAMPED], mu, rtol=0.02)
    # spread combines pixel noise with the primary-energy scale factor
    expected_std = np.sqrt(sigma ** 2 + mu ** 2 * SCALE_VAR)
    np.testing.assert_allclose(arr.std(axis=0, ddof=1)[UNCLAMPED], expected_std, rtol=0.05)


def test_load_csv_plain_row(tmp_path):
    images = data.load_csv(write(tmp_path, "0.1,0.2,0.3,0.4,0.4,0.3,0.2,0.1\n"))
    assert images == [ShowerImage(pixels=(0.1, 0.2, 0.3, 0.4, 0.4, 0.3, 0.2, 0.1))]


def test_load_csv_primary_energy_and_header(tmp_path):
    text = "e0,e1,e2,e3,e4,e5,e6,e7,primary_gev\n" "0.1,0.2,0.3,0.4,0.4,0.3,0.2,0.1,250.0\n"
    (image,) = data.load_csv(write(tmp_path, text))
    assert image.primary_energy == 250.0


def test_load_csv_reports_line_of_short_row(tmp_path):
    text = "0.1,0.2,0.3,0.4,0.4,0.3,0.2,0.1\n0.1,0.2,0.3,0.4,0.4,0.3,0.2\n"
    with pytest.raises(DataFormatError) as exc:
        data.load_csv(write(tmp_path, text))
    assert exc.value.line == 2
    assert ":2:" in str(exc.value)


def test_load_csv_line_numbers_count_header_and_blanks(tmp_path):
    text = "e0,e1,e2,e3,e4,e5,e6,e7\n0.1,0.1,0.1,0.1,0.1,0.1,0.1,0.1\n\n0.1,x,0.1,0.1,0.1,0.1,0.1,0.1\n"
    with pytest.raises(DataFormatError) as exc:
        data.load_csv(write(tmp_path, text))
    assert exc.value.line == 4


def test_load_csv_rejects_blank_cell_inside_row(tmp_path):
    text = "0.1,0.2,0.3,0.4,0.4,0.3,0.2,0.1\n0.1,,0.2,0.3,0.4,0.4,0.3,0.2,0.1\n"
    with pytest.raises(DataFormatError) as exc:
        data.load_csv(write(tmp_path, text))
    assert exc.value.line == 2
    assert "column 2" in str(exc.value)


def test_load_csv_accepts_trailing_comma(tmp_path):
    (image,) = data.load_csv(write(tmp_path, "0.1,0.2,0.3,0.4,0.4,0.3,0.2,0.1,\n"))
    assert image.pixels == (0.1, 0.2, 0.3, 0.4, 0.4, 0.3, 0.2, 0.1)
    assert image.primary_energy is None


def test_load_csv_clamps_out_of_range_pixels(tmp_path):
    (image,) = data.load_csv(write(tmp_path, "0.7,-0.1,0.3,0.4,0.4,0.3,0.2,0.1\n"))
    assert image.pixels[:2] == (0.6, 0.0)


def test_load_csv_rejects_primary_out_of_range(tmp_path):
    with pytest.raises(DataFormatError):
        data.load_csv(write(tmp_path, "0.1,0.2,0.3,0.4,0.4,0.3,0.2,0.1,300\n"))


def test_load_csv_rejects_empty_file(tmp_path):
    with pytest.raises(DataFormatError):
        data.load_csv(write(tmp_path, ""))


def test_save_then_load_preserves_images(tmp_path):
    images = data.synth_dataset(20, seed=2)
    loaded = data.load_csv(data.save_csv(images, tmp_path / "out" / "synth.csv"))
    np.testing.assert_allclose(data.images_to_array(loaded), data.images_to_array(images))
    assert [i.primary_energy for i in loaded] == pytest.approx([i.primary_energy for i in images])


def test_compute_stats_two_point():
    stats = data.compute_stats([ShowerImage(pixels=(0.0,) * 8), ShowerImage(pixels=(0.6,) * 8)])
    np.testing.assert_allclose(stats.means, 0.3)
    np.testing.assert_allclose(stats.stds, 0.6 / np.sqrt(2))
    assert stats.n == 2


def test_compute_stats_identical_images(flat_image):
    stats = data.compute_stats([flat_image] * 3)
    np.testing.assert_array_equal(stats.stds, 0.0)


def test_compute_stats_needs_two_images(flat_image):
    with pytest.raises(InvalidInputError):
        data.compute_stats([flat_image])


def test_load_profile(tmp_path):
    rows = "\n".join(f"{0.05 * (i + 1)},0.01" for i in range(8))
    profile = data.load_profile(write(tmp_path, "mean,std\n" + rows + "\n", "profile.csv"))
    assert profile.means[0] == pytest.approx(0.05)
    assert profile.stds == (0.01,) * 8


def test_load_profile_rejects_bad_shape(tmp_path):
    with pytest.raises(DataFormatError):
        data.load_profile(write(tmp_path, "mean,std\n0.1,0.01\n", "profile.csv"))
