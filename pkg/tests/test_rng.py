import numpy as np
import pytest
from scipy import stats

from optstop.rng import PathStream, normal_pair, philox4x32, uniform_pair

U32 = np.uint64


# Published Philox4x32-10 known-answer vectors.
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


@pytest.mark.parametrize("ctr, key, expected", KAT)
def test_philox_known_answers(ctr, key, expected):
    out = philox4x32(*(U32(c) for c in ctr), *(U32(k) for k in key))
    assert tuple(int(w) for w in out) == expected


def test_streams_are_pure_functions_of_indices():
    a = PathStream(7, 3).normals(1000)
    b = PathStream(7, 3).normals(1000)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_array_equal(PathStream(7, 3).normals(10, start=500), a[500:510])
    assert not np.array_equal(a, PathStream(7, 4).normals(1000))
    assert not np.array_equal(a, PathStream(8, 3).normals(1000))


def test_normal_pair_matches_stream():
    z0, z1 = normal_pair(U32(5), U32(9), 4)
    np.testing.assert_array_equal(PathStream(5, 9).normals(2, start=8), [z0, z1])


def test_uniforms_in_open_unit_interval():
    u = PathStream(1, 0).uniforms(200_000)
    assert u.min() > 0.0 and u.max() < 1.0
    assert stats.kstest(u, "uniform").pvalue > 1e-3
    a, b = uniform_pair(U32(1), U32(0), 0, 1)
    assert 0 < a < 1 and 0 < b < 1


def test_normals_distribution():
    z = np.concatenate([PathStream(11, i).normals(20_000) for i in range(10)])
    assert abs(z.mean()) < 4 / np.sqrt(z.size)
    assert abs(z.var() - 1) < 4 * np.sqrt(2 / z.size)
    assert stats.kstest(z, "norm").pvalue > 1e-3
    # ziggurat tail beyond the base strip
    tail = np.mean(np.abs(z) > 3.442619855899)
    assert abs(tail - 2 * stats.norm.sf(3.442619855899)) < 5 * np.sqrt(tail / z.size) + 1e-5


def test_stream_independence_lag_correlation():
    z = PathStream(3, 0).normals(100_000)
    r = np.corrcoef(z[:-1], z[1:])[0, 1]
    assert abs(r) < 4 / np.sqrt(z.size)
    other = PathStream(3, 1).normals(100_000)
    assert abs(np.corrcoef(z, other)[0, 1]) < 4 / np.sqrt(z.size)
