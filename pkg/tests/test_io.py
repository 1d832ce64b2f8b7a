import numpy as np
import pytest

from hdcagg.aggregation import Encoder, Fingerprint, HolisticDescriptor, IncompatibleDescriptors
from hdcagg.evaluation import GroundTruth, SimilarityMatrix
from hdcagg.features import FeatureSet
from hdcagg.io import (
    FormatError,
    read_feature_dir,
    read_feature_file,
    read_ground_truth,
    read_holistic,
    read_records,
    read_similarity,
    write_feature_file,
    write_ground_truth,
    write_holistic,
    write_records,
    write_similarity,
)


def random_fs(rng, n=7, dim=12, image_id="place_001"):
    return FeatureSet(
        image_id, 640, 480, rng.normal(size=(n, dim)), rng.uniform(1, 480, (n, 2)), rng.uniform(0, 3, n)
    )


def f32(a):
    return np.asarray(a, dtype=np.float32).astype(np.float64)


TWO_FEATURES = """FEAT v1
image img_a
size 640 480
count 2 dim 3
10 20 0.5 1 0 0
30.5 40 1.5 0 1 0
"""


def test_read_well_formed(tmp_path):
    p = tmp_path / "a.feat"
    p.write_text(TWO_FEATURES)
    fs = read_feature_file(p)
    assert len(fs) == 2 and fs.dim == 3 and fs.image_id == "img_a"
    np.testing.assert_array_equal(fs.xy, [[10, 20], [30.5, 40]])
    np.testing.assert_array_equal(fs.scores, [0.5, 1.5])


@pytest.mark.parametrize("binary", [False, True])
def test_feature_roundtrip_bit_identical_at_f32(tmp_path, binary):
    fs = random_fs(np.random.default_rng(0))
    p = tmp_path / ("x.featb" if binary else "x.feat")
    write_feature_file(p, fs)
    got = read_feature_file(p)
    assert got.image_id == fs.image_id and (got.width, got.height) == (640, 480)
    np.testing.assert_array_equal(got.descriptors, f32(fs.descriptors))
    np.testing.assert_array_equal(got.xy, f32(fs.xy))
    np.testing.assert_array_equal(got.scores, f32(fs.scores))
    # a second round trip is the identity
    write_feature_file(tmp_path / "y", got, binary)
    np.testing.assert_array_equal(read_feature_file(tmp_path / "y").descriptors, got.descriptors)


@pytest.mark.parametrize("binary", [False, True])
def test_empty_feature_file(tmp_path, binary):
    fs = FeatureSet("e", 10, 10, np.zeros((0, 4)), np.zeros((0, 2)), np.zeros(0))
    write_feature_file(tmp_path / "e", fs, binary)
    got = read_feature_file(tmp_path / "e")
    assert len(got) == 0 and got.dim == 4


def test_count_mismatch_names_discrepancy(tmp_path):
    p = tmp_path / "bad.feat"
    p.write_text(TWO_FEATURES.replace("count 2", "count 3"))
    with pytest.raises(FormatError, match="count=3.*2 feature rows"):
        read_feature_file(p)


@pytest.mark.parametrize(
    "broken, lineno",
    [
        (TWO_FEATURES.replace("FEAT v1", "FEAT v9"), 1),
        (TWO_FEATURES.replace("size 640 480", "size 640"), 3),
        (TWO_FEATURES.replace("30.5 40 1.5 0 1 0", "30.5 40 1.5 0 1"), 6),
        (TWO_FEATURES.replace("10 20 0.5 1 0 0", "10 20 0.5 1 nan 0"), 5),
        (TWO_FEATURES.replace("10 20 0.5 1 0 0", "10 20 0.5 1 zz 0"), 5),
    ],
)
def test_parse_errors_carry_line_number(tmp_path, broken, lineno):
    p = tmp_path / "bad.feat"
    p.write_text(broken)
    with pytest.raises(FormatError, match=f"bad.feat:{lineno}:"):
        read_feature_file(p)


def test_text_format_rejects_whitespace_in_id(tmp_path):
    fs = random_fs(np.random.default_rng(5), image_id="two words")
    with pytest.raises(FormatError):
        write_feature_file(tmp_path / "x.feat", fs)
    write_feature_file(tmp_path / "x.featb", fs)
    assert read_feature_file(tmp_path / "x.featb").image_id == "two words"


def test_truncated_binary(tmp_path):
    fs = random_fs(np.random.default_rng(1))
    write_feature_file(tmp_path / "x.featb", fs)
    data = (tmp_path / "x.featb").read_bytes()
    (tmp_path / "t.featb").write_bytes(data[:-5])
    with pytest.raises(FormatError):
        read_feature_file(tmp_path / "t.featb")


def test_read_feature_dir_is_sorted(tmp_path):
    rng = np.random.default_rng(2)
    for name in ["b.feat", "a.featb", "c.feat"]:
        write_feature_file(tmp_path / name, random_fs(rng, image_id=name))
    (tmp_path / "notes.txt").write_text("ignored")
    assert [fs.image_id for fs in read_feature_dir(tmp_path)] == ["a.featb", "b.feat", "c.feat"]
    with pytest.raises(FileNotFoundError):
        read_feature_dir(tmp_path / "missing")


def encoded(n=5, d=256, seed=0):
    rng = np.random.default_rng(seed)
    enc = Encoder(d=d, seed=seed)
    return enc.encode_many([random_fs(rng, image_id=f"img{k}") for k in range(n)])


def test_holistic_roundtrip(tmp_path):
    hs = encoded()
    write_holistic(tmp_path / "h.bin", hs)
    got = read_holistic(tmp_path / "h.bin", expect=hs[0].meta)
    assert [h.image_id for h in got] == [h.image_id for h in hs]
    assert all(g.meta == h.meta and g.kind == h.kind for g, h in zip(got, hs))
    for g, h in zip(got, hs):
        np.testing.assert_array_equal(g.vector, f32(h.vector))


def test_holistic_dimension_mismatch(tmp_path):
    hs = encoded(n=2, d=2048)
    write_holistic(tmp_path / "h.bin", hs)
    with pytest.raises(IncompatibleDescriptors):
        read_holistic(tmp_path / "h.bin", expect=Fingerprint(4096, 0))


def test_holistic_rejects_mixed_on_write(tmp_path):
    with pytest.raises(IncompatibleDescriptors):
        write_holistic(tmp_path / "h.bin", encoded(1, seed=0) + encoded(1, seed=1))


def test_holistic_1000_cosines_preserved(tmp_path):
    rng = np.random.default_rng(3)
    meta = Fingerprint(4096, 0)
    V = rng.normal(size=(1000, 4096))
    hs = [HolisticDescriptor(v, "local_pose", meta, f"i{k}") for k, v in enumerate(V)]
    write_holistic(tmp_path / "h.bin", hs)
    W = np.stack([h.vector for h in read_holistic(tmp_path / "h.bin")])

    def cos(M):
        M = M / np.linalg.norm(M, axis=1, keepdims=True)
        return M @ M.T

    assert np.max(np.abs(cos(V) - cos(W))) < 1e-6


@pytest.mark.parametrize("cut", [3, 20, 100, -1])
def test_holistic_truncation(tmp_path, cut):
    write_holistic(tmp_path / "h.bin", encoded(2))
    data = (tmp_path / "h.bin").read_bytes()
    (tmp_path / "t.bin").write_bytes(data[:cut])
    with pytest.raises(FormatError):
        read_holistic(tmp_path / "t.bin")


def test_holistic_version_mismatch(tmp_path):
    write_holistic(tmp_path / "h.bin", encoded(1))
    data = bytearray((tmp_path / "h.bin").read_bytes())
    data[8] = 7
    (tmp_path / "v.bin").write_bytes(bytes(data))
    with pytest.raises(FormatError, match="version"):
        read_holistic(tmp_path / "v.bin")


def test_holistic_trailing_bytes(tmp_path):
    write_holistic(tmp_path / "h.bin", encoded(1))
    (tmp_path / "x.bin").write_bytes((tmp_path / "h.bin").read_bytes() + b"\0")
    with pytest.raises(FormatError, match="trailing"):
        read_holistic(tmp_path / "x.bin")


def test_ground_truth_roundtrip(tmp_path):
    gt = GroundTruth({(0, 1), (2, 2), (3, 0)}, (5, 4))
    write_ground_truth(tmp_path / "gt.csv", gt)
    got = read_ground_truth(tmp_path / "gt.csv")
    assert got.positives == gt.positives and got.shape == (5, 4)
    assert (tmp_path / "gt.csv").read_text().splitlines()[1] == "db_index,query_index"


def test_ground_truth_bad_row(tmp_path):
    (tmp_path / "gt.csv").write_text("0,1\n1,x\n")
    with pytest.raises(FormatError):
        read_ground_truth(tmp_path / "gt.csv")


def test_similarity_roundtrip_exact(tmp_path):
    rng = np.random.default_rng(4)
    m = SimilarityMatrix(rng.uniform(-1, 1, (4, 3)), ["a", "b", "c", "d"], ["x", "y", "z"], "hdc", Fingerprint(512, 9))
    write_similarity(tmp_path / "s.csv", m)
    got = read_similarity(tmp_path / "s.csv")
    np.testing.assert_array_equal(got.values, m.values)
    assert (got.db_ids, got.q_ids, got.method, got.meta) == (m.db_ids, m.q_ids, m.method, m.meta)


def test_similarity_ragged_row(tmp_path):
    (tmp_path / "s.csv").write_text("db_id,x,y\na,0.1,0.2\nb,0.3\n")
    with pytest.raises(FormatError, match="row 3"):
        read_similarity(tmp_path / "s.csv")


def test_records_roundtrip(tmp_path):
    recs = [{"d": 64, "seed": 0, "ap": 0.123456789012345}, {"d": 512, "seed": 1, "ap": 1.0}]
    write_records(tmp_path / "r.csv", recs, {"benchmark": {"n_places": 10}})
    got, meta = read_records(tmp_path / "r.csv")
    assert got == recs and meta == {"benchmark": {"n_places": 10}}


def test_atomic_write_leaves_no_temp_files(tmp_path):
    write_records(tmp_path / "r.csv", [{"a": 1}])
    assert [p.name for p in tmp_path.iterdir()] == ["r.csv"]
