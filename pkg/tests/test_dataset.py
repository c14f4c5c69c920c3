import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from rfadv import dataset as ds
from rfadv.errors import FileFormatError, ValidationError


def test_measure_power_trivials():
    assert ds.measure_power(np.zeros((2, 128))) == 0.0
    frame = np.zeros((2, 128))
    frame[0, :] = 1.0
    assert ds.measure_power(frame) == pytest.approx(1.0)
    frame[0, :] = 3.0
    frame[1, :] = 4.0
    assert ds.measure_power(frame) == pytest.approx(25.0)


@given(st.floats(-10, 10, allow_nan=False), st.integers(0, 100))
def test_measure_power_scales_quadratically(scale, seed):
    frame = np.random.default_rng(seed).standard_normal((2, 128))
    base = ds.measure_power(frame)
    assert ds.measure_power(scale * frame) == pytest.approx(
        scale * scale * base, rel=1e-9, abs=1e-12)


def test_bpsk_symbols_are_antipodal():
    rng = np.random.default_rng(0)
    syms = ds.random_symbols(ds.Modulation.BPSK, 500, rng)
    assert set(np.round(syms.real, 12)) <= {1.0, -1.0}
    assert np.all(syms.imag == 0.0)


def test_constellations_have_unit_average_power():
    for mod in ds.DIGITAL_LINEAR:
        points = ds.constellation(mod)
        assert np.mean(np.abs(points) ** 2) == pytest.approx(1.0, abs=1e-12)


def test_modulation_enum_matches_declared_order():
    names = ["BPSK", "QPSK", "PSK8", "QAM16", "QAM64", "CPFSK", "GFSK",
             "PAM4", "WBFM", "AMSSB", "AMDSB"]
    assert [m.name for m in ds.Modulation] == names
    assert [int(m) for m in ds.Modulation] == list(range(11))


def test_synthesize_is_deterministic_under_seed():
    a = ds.synthesize_example(ds.Modulation.QAM16, 10, 1234)
    b = ds.synthesize_example(ds.Modulation.QAM16, 10, 1234)
    np.testing.assert_array_equal(a.frame, b.frame)
    c = ds.synthesize_example(ds.Modulation.QAM16, 10, 1235)
    assert not np.array_equal(a.frame, c.frame)


def test_synthesize_rejects_off_grid_snr():
    with pytest.raises(ValidationError, match="snr"):
        ds.synthesize_example(ds.Modulation.BPSK, 7, 0)


def test_clean_baseband_has_unit_power():
    for mod in ds.Modulation:
        for seed in range(5):
            sig = ds.clean_baseband(mod, np.random.default_rng(seed))
            power = float(np.mean(np.abs(sig) ** 2))
            assert power == pytest.approx(1.0, abs=1e-9), mod.name


def test_frame_power_at_snr18_matches_power_accounting():
    # received power ~ clean (1.0) + noise (10^-1.8), averaged over frames
    expected = 1.0 + 10.0 ** (-1.8)
    for mod in ds.Modulation:
        powers = [ds.measure_power(
            ds.synthesize_example(mod, 18, (9, int(mod), i)).frame)
            for i in range(100)]
        ratio = np.mean(powers) / expected
        assert 0.9 <= ratio <= 1.2, mod.name


@pytest.mark.parametrize("snr_db", [-10, 0, 10, 18])
def test_empirical_snr_within_1db_of_tag(snr_db):
    # replay the per-frame rng to separate the clean signal from the noise
    for mod in (ds.Modulation.QPSK, ds.Modulation.WBFM, ds.Modulation.GFSK):
        clean_powers, noise_powers = [], []
        for i in range(100):
            seed = (17, int(mod), snr_db + 20, i)
            ex = ds.synthesize_example(mod, snr_db, seed)
            rng = np.random.default_rng(seed)
            clean = ds.clean_baseband(mod, rng)
            rx = ex.frame[0] + 1j * ex.frame[1]
            noise = rx - clean.astype(np.complex64)
            clean_powers.append(float(np.mean(np.abs(clean) ** 2)))
            noise_powers.append(float(np.mean(np.abs(noise) ** 2)))
        snr_emp = 10 * np.log10(np.mean(clean_powers) / np.mean(noise_powers))
        assert abs(snr_emp - snr_db) <= 1.0, mod.name


def test_full_scale_count_arithmetic():
    # generator emits len(Modulation) * len(SNR_GRID_DB) * n examples, so
    # the published full scale n=1000 gives 220000
    assert len(ds.Modulation) == 11
    assert len(ds.SNR_GRID_DB) == 20
    for n in (1, 3):
        assert len(ds.generate_dataset(n, seed=0).examples) == 11 * 20 * n
    assert 11 * 20 * 1000 == 220_000


def test_generate_dataset_counts_and_balance():
    data = ds.generate_dataset(10, seed=3)
    assert len(data.examples) == 2200
    assert len(data.train_indices) == 1100
    assert len(data.test_indices) == 1100
    assert not set(data.train_indices) & set(data.test_indices)
    per_pair = {}
    for ex in data.examples:
        per_pair[(ex.mod_id, ex.snr_db)] = per_pair.get(
            (ex.mod_id, ex.snr_db), 0) + 1
    assert set(per_pair.values()) == {10}
    assert len(per_pair) == 220


def test_generate_dataset_is_pure_function_of_seed():
    a = ds.generate_dataset(2, seed=5)
    b = ds.generate_dataset(2, seed=5)
    for ea, eb in zip(a.examples, b.examples):
        np.testing.assert_array_equal(ea.frame, eb.frame)
    np.testing.assert_array_equal(a.train_indices, b.train_indices)


def test_dataset_file_size_arithmetic(tmp_path):
    data = ds.generate_dataset(10, seed=1)  # 2200 examples
    path = tmp_path / "d.rmld"
    ds.write_dataset(data, path)
    assert path.stat().st_size == 17 + 2200 * 1026 == 2_257_217


def test_empty_dataset_round_trip(tmp_path):
    empty = ds.Dataset(examples=[], split_seed=0,
                       train_indices=np.array([], dtype=int),
                       test_indices=np.array([], dtype=int))
    path = tmp_path / "empty.rmld"
    ds.write_dataset(empty, path)
    assert path.stat().st_size == 17
    back = ds.read_dataset(path)
    assert back.examples == []


def test_round_trip_bit_exact(tmp_path):
    data = ds.generate_dataset(2, seed=9)
    path = tmp_path / "d.rmld"
    ds.write_dataset(data, path)
    back = ds.read_dataset(path, split_seed=9)
    assert len(back.examples) == len(data.examples)
    for a, b in zip(data.examples, back.examples):
        np.testing.assert_array_equal(a.frame, b.frame)
        assert (a.mod_id, a.snr_db) == (b.mod_id, b.snr_db)
    np.testing.assert_array_equal(back.train_indices, data.train_indices)


def test_read_rejects_bad_magic(tmp_path):
    path = tmp_path / "d.rmld"
    ds.write_dataset(ds.generate_dataset(1, 0), path)
    data = bytearray(path.read_bytes())
    data[:4] = b"XXXX"
    path.write_bytes(data)
    with pytest.raises(FileFormatError, match="magic"):
        ds.read_dataset(path)


def test_read_rejects_wrong_version(tmp_path):
    path = tmp_path / "d.rmld"
    ds.write_dataset(ds.generate_dataset(1, 0), path)
    data = bytearray(path.read_bytes())
    data[4] = 99
    path.write_bytes(data)
    with pytest.raises(FileFormatError, match="version"):
        ds.read_dataset(path)


def test_read_rejects_wrong_frame_len(tmp_path):
    path = tmp_path / "d.rmld"
    ds.write_dataset(ds.generate_dataset(1, 0), path)
    data = bytearray(path.read_bytes())
    data[16] = 64
    path.write_bytes(data)
    with pytest.raises(FileFormatError, match="frame_len"):
        ds.read_dataset(path)


def test_read_rejects_truncation(tmp_path):
    path = tmp_path / "d.rmld"
    ds.write_dataset(ds.generate_dataset(1, 0), path)
    path.write_bytes(path.read_bytes()[:-10])
    with pytest.raises(FileFormatError, match="size"):
        ds.read_dataset(path)


def test_generate_rejects_zero_n():
    with pytest.raises(ValidationError):
        ds.generate_dataset(0, seed=0)
