import math

import flint
import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_with_norm
from tolexpm.reference import reference_expm


def test_zero_and_empty():
    assert np.array_equal(reference_expm(np.zeros((3, 3))), np.eye(3))
    assert reference_expm(np.zeros((0, 0))).shape == (0, 0)


def test_scalar():
    assert reference_expm(np.array([[1.0]]))[0, 0] == pytest.approx(math.e, rel=1e-16)
    assert reference_expm(np.array([[-30.0]]))[0, 0] == pytest.approx(math.exp(-30), rel=1e-15)


def test_nilpotent():
    a = np.array([[0.0, 3.0, 0.0], [0.0, 0.0, 2.0], [0.0, 0.0, 0.0]])
    expected = np.eye(3) + a + a @ a / 2
    assert np.allclose(reference_expm(a), expected, rtol=0, atol=1e-15)


def test_rotation():
    t = 2.5
    x = reference_expm(np.array([[0.0, t], [-t, 0.0]]))
    assert np.allclose(x, [[math.cos(t), math.sin(t)], [-math.sin(t), math.cos(t)]], rtol=0, atol=1e-15)


def test_complex_diagonal():
    z = np.array([1j * math.pi, 0.5 - 2j])
    x = reference_expm(np.diag(z))
    assert np.allclose(np.diag(x), np.exp(z), rtol=1e-15, atol=1e-15)


@given(st.integers(0, 2 ** 32 - 1), st.floats(0.01, 2.0))
def test_inverse_pair(seed, norm):
    a = random_with_norm(np.random.default_rng(seed), 5, norm)
    prod = reference_expm(a) @ reference_expm(-a)
    assert np.abs(prod - np.eye(5)).max() <= 1e-13


def test_precision_restored(rng):
    before = flint.ctx.prec
    reference_expm(random_with_norm(rng, 4, 3.0))
    assert flint.ctx.prec == before
