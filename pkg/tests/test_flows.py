import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dostriage.errors import EmptyFile, InvalidSpec, MissingColumn, MixedDomain, UnknownLabel
from dostriage.flows import (
    CANONICAL_HEADER,
    FEATURES,
    Dataset,
    Label,
    Schema,
    SynthSpec,
    ingest_csv,
    synth_generate,
    train_test_split,
    write_canonical,
)
from dostriage.stats import kuiper_two_sample


def _write(path, lines):
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def test_canonical_row(tmp_path):
    p = _write(tmp_path / "a.csv", [",".join(CANONICAL_HEADER), "1.5,10,8,2048,12,3.1,4.0,DoS,unsw"])
    ds = ingest_csv(p)
    rec = next(ds.records())
    assert rec.dur == 1.5 and rec.label is Label.DOS and rec.domain == "unsw"
    assert ds.features.shape == (1, 7)


def test_canonical_header_order_and_case_free(tmp_path):
    header = ["Domain", "LABEL"] + [f.upper() for f in reversed(FEATURES)]
    row = ["x", "Normal"] + [str(v) for v in reversed(range(1, 8))]
    ds = ingest_csv(_write(tmp_path / "a.csv", [",".join(header), ",".join(row)]))
    np.testing.assert_array_equal(ds.features[0], np.arange(1, 8))


def test_unsw_pools_other_attacks(tmp_path):
    header = "dur,spkts,dpkts,sload,dload,rate,sinpkt,dinpkt,attack_cat,label"
    rows = [
        "1,2,3,100,50,5,6,7,DoS,1",
        "1,2,3,100,50,5,6,7,Exploits,1",
        "1,2,3,100,50,5,6,7,Fuzzers ,1",
        "1,2,3,100,50,5,6,7,,0",
        "1,2,3,100,50,5,6,7,Normal,0",
    ]
    ds = ingest_csv(_write(tmp_path / "u.csv", [header] + rows), Schema.UNSW_NB15)
    assert ds.labels.tolist() == [1, 0, 0, 0, 0]
    # load is source + destination bits per second
    assert ds.features[0, FEATURES.index("load")] == 150.0
    assert ds.domain == "unsw"


def test_cicids_units(tmp_path):
    header = (
        " Flow Duration, Total Fwd Packets, Total Backward Packets,Flow Bytes/s,"
        " Flow Packets/s, Fwd IAT Mean, Bwd IAT Mean, Label"
    )
    rows = ["1500000,10,8,1000,20,3000,4000,DoS Hulk", "10,1,1,1,1,1,1,BENIGN", "10,1,1,1,1,1,1,PortScan"]
    ds = ingest_csv(_write(tmp_path / "c.csv", [header] + rows), "cicids", domain="wed")
    np.testing.assert_allclose(ds.features[0], [1.5, 10, 8, 8000, 20, 3.0, 4.0])
    assert ds.labels.tolist() == [1, 0, 0]
    assert ds.domain == "wed"


def test_cicids_web_attack_dash_variants(tmp_path):
    header = "Flow Duration,Total Fwd Packets,Total Backward Packets,Flow Bytes/s,Flow Packets/s,Fwd IAT Mean,Bwd IAT Mean,Label"
    rows = ["1,1,1,1,1,1,1,Web Attack – XSS", "1,1,1,1,1,1,1,Web Attack - Brute Force"]
    ds = ingest_csv(_write(tmp_path / "c.csv", [header] + rows), "cicids")
    assert ds.labels.tolist() == [0, 0]


def test_drops_bad_rows(tmp_path):
    lines = [",".join(CANONICAL_HEADER)]
    lines += ["1,1,1,1,1,1,1,DoS,a", "x,1,1,1,1,1,1,DoS,a", "-1,1,1,1,1,1,1,DoS,a", "inf,1,1,1,1,1,1,Normal,a"]
    lines += ["2,1,1,1,1,1,1,Normal,a"]
    ds = ingest_csv(_write(tmp_path / "a.csv", lines))
    assert len(ds) == 2 and ds.dropped == 3
    assert len(ds) + ds.dropped == len(lines) - 1
    assert ds.seq.tolist() == [0, 4]


def test_errors(tmp_path):
    with pytest.raises(EmptyFile):
        ingest_csv(_write(tmp_path / "e.csv", [""]))
    with pytest.raises(EmptyFile):
        ingest_csv(_write(tmp_path / "h.csv", [",".join(CANONICAL_HEADER)]))
    with pytest.raises(MissingColumn):
        ingest_csv(_write(tmp_path / "m.csv", ["dur,label", "1,DoS"]))
    bad = _write(tmp_path / "b.csv", [",".join(CANONICAL_HEADER), "1,1,1,1,1,1,1,Attack,a"])
    with pytest.raises(UnknownLabel):
        ingest_csv(bad)
    mixed = _write(
        tmp_path / "x.csv",
        [",".join(CANONICAL_HEADER), "1,1,1,1,1,1,1,DoS,a", "1,1,1,1,1,1,1,DoS,b"],
    )
    with pytest.raises(MixedDomain):
        ingest_csv(mixed)
    with pytest.raises(UnknownLabel):
        ingest_csv(
            _write(
                tmp_path / "u.csv",
                ["dur,spkts,dpkts,sload,dload,rate,sinpkt,dinpkt,attack_cat", "1,1,1,1,1,1,1,1,Botnet"],
            ),
            "unsw",
        )


_finite = st.floats(min_value=0, max_value=1e12, allow_nan=False, allow_infinity=False)


@given(
    st.lists(st.tuples(st.lists(_finite, min_size=7, max_size=7), st.booleans()), min_size=1, max_size=30)
)
def test_round_trip(tmp_path_factory, rows):
    # values already representable in 9 significant digits round-trip exactly
    feats = np.array([[float(f"{v:.9g}") for v in r] for r, _ in rows])
    ds = Dataset(feats, [int(b) for _, b in rows], "dom")
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_canonical(ds, path)
    assert ingest_csv(path) == ds


def test_split_examples():
    ds = Dataset(np.zeros((100000, 7)), np.zeros(100000), "d")
    tr, te = train_test_split(ds)
    assert (len(tr), len(te)) == (80000, 20000)
    small = Dataset(np.zeros((50, 7)), np.zeros(50), "d")
    assert [len(p) for p in train_test_split(small)] == [50, 0]
    ten = Dataset(np.arange(70.0).reshape(10, 7), np.zeros(10), "d", seq=np.arange(10) * 3)
    tr, te = train_test_split(ten, 5)
    assert tr.seq.tolist() == [0, 3, 6, 9, 12] and te.seq.tolist() == [15, 18, 21, 24, 27]


def test_synth_counts_and_determinism(tmp_path):
    ds = synth_generate(SynthSpec(1000, 0.05, rng_seed=3))
    assert ds.n_dos == 50
    assert np.all(ds.features >= 0)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    write_canonical(ds, p1)
    write_canonical(synth_generate(SynthSpec(1000, 0.05, rng_seed=3)), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_synth_same_seed_no_shift_is_same_domain():
    a = synth_generate(SynthSpec(2000, 0.1, rng_seed=9))
    b = synth_generate(SynthSpec(2000, 0.1, rng_seed=9, domain="other"))
    assert all(kuiper_two_sample(a.features[:, j], b.features[:, j]).v_statistic == 0 for j in range(7))


def test_synth_shift_is_detected():
    base = synth_generate(SynthSpec(5000, 0.2, rng_seed=1))
    shifted = synth_generate(SynthSpec(5000, 0.2, scale=(1.3,) * 7, offset=(0.1,) * 7, rng_seed=2))
    for j in range(7):
        assert kuiper_two_sample(base.features[:, j], shifted.features[:, j]).p_value < 0.05


@pytest.mark.parametrize(
    "kwargs",
    [
        {"n_records": 0},
        {"n_records": 10, "dos_fraction": 0.0},
        {"n_records": 10, "dos_fraction": 1.0},
        {"n_records": 10, "scale": (1.0,) * 6},
        {"n_records": 10, "scale": (0.0,) * 7},
        {"n_records": 10, "dos_profile": (np.nan,) * 7},
        {"n_records": 10, "class_separation": -1.0},
    ],
)
def test_synth_invalid(kwargs):
    with pytest.raises(InvalidSpec):
        synth_generate(SynthSpec(**kwargs))


def test_dataset_is_read_only():
    ds = Dataset(np.ones((2, 7)), [0, 1], "d")
    with pytest.raises(ValueError):
        ds.features[0, 0] = 5.0
    with pytest.raises(ValueError):
        Dataset(np.ones((2, 7)), [0, 1], "d", seq=[1, 1])
