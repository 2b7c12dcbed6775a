import math

import numpy as np

from phdtrack.terrain import TerrainMap
from phdtrack.types import WeightedCloud


class LinearGaussian1D:
    """x' = a x + q e, z = x + r v on a scalar state; reports are plain floats."""

    def __init__(self, a=1.0, q=1.0, r=1.0):
        self.a, self.q, self.r = a, q, r

    @staticmethod
    def _normals(stream, n):
        return stream.normal_rows(0, -(-n // 4)).reshape(-1, 1)[:n]

    def propagate(self, cloud, stream):
        e = self._normals(stream.child("motion"), len(cloud))
        return WeightedCloud(self.a * cloud.states + self.q * e, cloud.weights)

    def log_likelihood(self, report, states):
        z = (report - states[:, 0]) / self.r
        return -0.5 * z * z - math.log(self.r * math.sqrt(2 * math.pi))

    def invert(self, report, n, stream):
        return report - self.r * self._normals(stream.child("invert"), n)

    def birth(self, report, n, mass, stream):
        start = WeightedCloud(self.invert(report, n, stream), np.full(n, mass / n))
        return self.propagate(start, stream.child("birth-motion"))


def uniform_map(cls, width=4, height=4, cell=100.0):
    return TerrainMap(np.full((height, width), int(cls), dtype=np.int8), cell, 0.0, 0.0)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        ok, detail = results[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {detail}")
