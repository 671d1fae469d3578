import subprocess
import sys

import numpy as np
import pytest

from visualmetrics._kernels import _delta_scan_numpy, four_point_delta


def _random_metric(rng, n):
    # shortest-path closure of a random weighted graph is a true metric
    w = rng.uniform(0.5, 2.0, size=(n, n))
    w = 0.5 * (w + w.T)
    np.fill_diagonal(w, 0.0)
    for k in range(n):
        w = np.minimum(w, w[:, k, None] + w[None, k, :])
    return w


class TestDeltaScan:
    def test_compiled_and_numpy_paths_agree(self, rng):
        for n in (5, 12, 20):
            dist = _random_metric(rng, n)
            assert four_point_delta(dist) == pytest.approx(
                _delta_scan_numpy(dist), abs=1e-12
            )

    def test_tree_metric_gives_zero(self):
        # path graph 0-1-2-3 with unit edges is 0-hyperbolic
        dist = np.abs(np.subtract.outer(np.arange(4.0), np.arange(4.0)))
        assert four_point_delta(dist) == pytest.approx(0.0, abs=1e-12)

    def test_scaling_is_homogeneous(self, rng):
        dist = _random_metric(rng, 10)
        assert four_point_delta(3.0 * dist) == pytest.approx(
            3.0 * four_point_delta(dist), abs=1e-10
        )

    def test_disable_flag_forces_numpy_path(self):
        code = (
            "import os; os.environ['VISUALMETRICS_DISABLE_NUMBA']='1'; "
            "from visualmetrics import _kernels; "
            "assert not _kernels.HAVE_NUMBA; "
            "import numpy as np; "
            "d = np.abs(np.subtract.outer(np.arange(4.), np.arange(4.))); "
            "assert _kernels.four_point_delta(d) == 0.0"
        )
        subprocess.run([sys.executable, "-c", code], check=True)
