import math
import os
import subprocess
import sys
from array import array

import pytest
from hypothesis import given, settings, strategies as st

from kptrop import _kernels_py, kernels

try:
    from kptrop import _kernels as compiled
except ImportError:  # extension not built
    compiled = None

needs_compiled = pytest.mark.skipif(compiled is None, reason="compiled kernels not built")

coef = st.floats(min_value=-5, max_value=5, allow_nan=False)


def run_argmax(mod, ax, ay, const, nx=9, ny=7):
    idx = array("i", bytes(4 * nx * ny))
    gap = array("d", bytes(8 * nx * ny))
    mod.argmax_grid(array("d", ax), array("d", ay), array("d", const), -3.0, 6.0 / nx, -2.0, 4.0 / ny,
                    nx, ny, idx, gap)
    return list(idx), list(gap)


def run_exact(mod, ax, ay, const, signs, nx=9, ny=7):
    out = array("d", bytes(8 * nx * ny))
    mod.exact_u_grid(array("d", ax), array("d", ay), array("d", const), array("d", signs),
                     -3.0, 6.0 / nx, -2.0, 4.0 / ny, nx, ny, 1.0, out)
    return list(out)


def test_reference_argmax_by_hand():
    # phases x and -x: left half picks index 1, right half index 0
    idx, gap = run_argmax(_kernels_py, [1.0, -1.0], [0.0, 0.0], [0.0, 0.0], nx=4, ny=1)
    assert idx == [1, 1, 0, 0]
    assert gap == pytest.approx([4.5, 1.5, 1.5, 4.5])


def test_reference_exact_two_phases():
    # two phases with slopes 0 and 1 meeting at x = 0: u = 2 w0 w1 / (w0 + w1)^2 = 1/2 there
    out = run_exact(_kernels_py, [0.0, 1.0], [0.0, 0.0], [0.0, 0.0], [1.0, 1.0], nx=2, ny=1)
    expect = [2 * math.exp(-1.5) / (1 + math.exp(-1.5)) ** 2] * 2
    assert out == pytest.approx(expect, rel=1e-12)


def test_reference_nan_when_not_positive():
    out = run_exact(_kernels_py, [0.0, 1.0], [0.0, 0.0], [0.0, 0.0], [1.0, -1.0], nx=2, ny=1)
    assert math.isnan(out[1])


@needs_compiled
@settings(max_examples=40)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(*[st.lists(coef, min_size=n, max_size=n)] * 3)))
def test_backends_agree_on_argmax(data):
    ax, ay, const = data
    i_py, g_py = run_argmax(_kernels_py, ax, ay, const)
    i_c, g_c = run_argmax(compiled, ax, ay, const)
    assert g_py == pytest.approx(g_c, abs=1e-12)
    for a, b, g in zip(i_py, i_c, g_py):
        if g > 1e-9:
            assert a == b


@needs_compiled
@settings(max_examples=40)
@given(st.integers(2, 6).flatmap(lambda n: st.tuples(*[st.lists(coef, min_size=n, max_size=n)] * 3)))
def test_backends_agree_on_exact_u(data):
    ax, ay, const = data
    a = run_exact(_kernels_py, ax, ay, const, [1.0] * len(ax))
    b = run_exact(compiled, ax, ay, const, [1.0] * len(ax))
    assert a == pytest.approx(b, rel=1e-10, abs=1e-14)


def _backend_with(env_value):
    env = dict(os.environ)
    env.pop("KPTROP_PURE_PYTHON", None)
    if env_value is not None:
        env["KPTROP_PURE_PYTHON"] = env_value
    out = subprocess.run([sys.executable, "-c", "from kptrop import kernels; print(kernels.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    return out.stdout.strip()


def test_env_forces_pure_python():
    assert _backend_with("1") == "python"


@needs_compiled
def test_compiled_is_default():
    assert _backend_with(None) == "cython"
    assert kernels.BACKEND == ("python" if os.environ.get("KPTROP_PURE_PYTHON") == "1" else "cython")


def test_render_same_under_both_backends():
    script = ("from kptrop.model import validate_config\n"
              "from kptrop.render import tropical_field, render_svg\n"
              "c = validate_config(3, [-1, 0, '1/2', 2], [1, 0, 0, -1], {})\n"
              "print(render_svg(tropical_field(c, '-6,6,-6,6', '40x40', {3: 1})))\n")
    outs = set()
    for value in ("1", "0"):
        env = {**os.environ, "KPTROP_PURE_PYTHON": value}
        outs.add(subprocess.run([sys.executable, "-c", script], env=env, capture_output=True,
                                text=True, check=True).stdout)
    assert len(outs) == 1
