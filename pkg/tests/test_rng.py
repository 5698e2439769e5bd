import numpy as np
import pytest

from inmafield.rng import INNOVATION, THINNING, CounterStreams, Stream, philox4x32

# Known-answer vectors of the Philox4x32-10 reference implementation.
KAT = [
    ((0, 0, 0, 0), (0, 0), (0x6627E8D5, 0xE169C58D, 0xBC57AC4C, 0x9B00DBD8)),
    ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, (0x408F276D, 0x41C83B0E, 0xA20BC7C6, 0x6D5451FD)),
    ((0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344), (0xA4093822, 0x299F31D0),
     (0xD16CFE09, 0x94FDCCEB, 0x5001E420, 0x24126EA1)),
]


@pytest.mark.parametrize("ctr,key,expected", KAT)
def test_philox_known_answers(ctr, key, expected):
    out = philox4x32(np.array(ctr, dtype=np.uint32).reshape(4, 1), np.array(key, dtype=np.uint32))
    assert tuple(int(v) for v in out[:, 0]) == expected


def test_uniforms_in_unit_interval_and_keyed_by_site():
    s = np.arange(-5, 5)[:, None] * np.ones((1, 7), dtype=np.int64)
    t = np.arange(7)[None, :] * np.ones((10, 1), dtype=np.int64)
    a = CounterStreams.for_sites(42, s, t, INNOVATION).uniform()
    assert a.shape == (70,)
    assert np.all((a >= 0) & (a < 1))
    # the same site gives the same number whatever batch it is drawn in
    b = CounterStreams.for_sites(42, s[3:5, 2:4], t[3:5, 2:4], INNOVATION).uniform()
    assert np.array_equal(b, a.reshape(10, 7)[3:5, 2:4].ravel())


def test_purposes_components_and_seeds_are_distinct():
    s, t = np.zeros(1000, dtype=np.int64), np.arange(1000)
    base = CounterStreams.for_sites(1, s, t, INNOVATION)
    draws = [base.uniform(), base.uniform(component=1), base.uniform(rnd=1),
             base.with_purpose(THINNING).uniform(), CounterStreams.for_sites(2, s, t, INNOVATION).uniform()]
    for i in range(len(draws)):
        for j in range(i + 1, len(draws)):
            assert not np.array_equal(draws[i], draws[j])


def test_uniform_moments():
    u = Stream(5).random(200_000)
    assert abs(u.mean() - 0.5) < 4 * np.sqrt(1 / 12 / u.size)
    assert abs(u.var() - 1 / 12) < 0.002


def test_stream_is_reproducible_and_advances():
    a, b = Stream(9), Stream(9)
    assert np.array_equal(a.random(5), b.random(5))
    assert not np.array_equal(a.random(5), Stream(9).random(5))
    assert isinstance(Stream(9).random(), float)


def test_bad_seed_rejected():
    with pytest.raises(ValueError):
        Stream(-1)
    with pytest.raises(ValueError):
        Stream(2**64)
