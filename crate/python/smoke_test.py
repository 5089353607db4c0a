"""Smoke test for the Python bindings.

Builds the extension module with cargo, copies it next to this script as
rieszcube.so and exercises the main entry points.

    python3 python/smoke_test.py
"""

import cmath
import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

HERE = Path(__file__).resolve().parent
ROOT = HERE.parent


def build_module():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "rieszcube-python", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    lib = ROOT / "target" / "release" / "librieszcube_py.so"
    dest = HERE / "rieszcube.so"
    shutil.copyfile(lib, dest)
    sys.path.insert(0, str(HERE))


def check(cond, what):
    if not cond:
        raise AssertionError(what)
    print(f"ok  {what}")


def main():
    if "--no-build" not in sys.argv:
        build_module()
    else:
        sys.path.insert(0, str(HERE))
    import rieszcube as rc

    union = rc.CubeUnion(1.0, [[0.0], [2.5]])
    check(len(union) == 2 and union.dim == 1, "CubeUnion shape")
    check(abs(union.measure() - 2.0) < 1e-15, "union measure")
    check(union.cube_of([2.7]) == 1 and union.cube_of([1.7]) is None, "cube_of")
    check(rc.CubeUnion.from_json(union.to_json()) == union, "geometry JSON round trip")

    basis = rc.Basis.build(union, seed=0)
    check(basis.certificate > 1e-3, f"certificate {basis.certificate:.3e}")
    check(basis.max_residual <= 1e-10, "system residual")
    check(basis.check_interpolation(4) <= 1e-8, "biorthogonality")
    check(basis.poisson_residual(50, 1) <= 1e-9, "Poisson residual")

    again = rc.Basis.from_json(basis.to_json())
    check(again.to_json() == basis.to_json(), "basis JSON round trip")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "basis.json"
        basis.save(path)
        check(rc.Basis.load(path).shifts == basis.shifts, "save and load")

    k1 = basis.shifts[1][0]
    t = 0.83
    delta = basis.reconstruct([(1, [0], 1.0)], [[t]])[0]
    check(delta == basis.eval_kernel(1, [t - k1]), "delta samples reproduce S_1")

    points = basis.lattice_points(2)
    check(len(points) == 2 * 5, "lattice size")
    samples = [(l, n, complex(math.cos(i), math.sin(2 * i))) for i, (l, n, _) in enumerate(points)]
    at_lattice = basis.reconstruct(samples, [p for _, _, p in points])
    err = max(abs(a - s[2]) for a, s in zip(at_lattice, samples))
    check(err <= 1e-8, f"interpolation of lattice samples {err:.1e}")

    bounds = basis.frame_bounds(4)
    check(0 < bounds["lambda_min"] <= bounds["lambda_max"], "frame bounds")
    dens = basis.density()
    check(abs(dens["upper"] - dens["nyquist"]) / dens["nyquist"] < 0.05, "density")
    report = basis.verify([2, 4])
    check(report["passed"] and not report["failed"], "verify report")
    json.dumps(report)

    shannon = rc.Basis.with_shifts(rc.CubeUnion(2 * math.pi, [[0.0]]), [[0.0]])
    v = shannon.eval_kernel(0, [0.3])
    check(abs(v - cmath.exp(1j * math.pi * 0.3) * math.sin(math.pi * 0.3) / (math.pi * 0.3)) < 1e-12, "Shannon kernel")

    cover = rc.approximate_cover([([0.0, 0.0], [1.0, 1.0]), ([2.0, 0.0], [3.3, 1.0])], 0.2)
    check(cover["measure_inner"] <= cover["measure_union"] <= cover["measure_outer"], "cover sandwich")
    check(isinstance(cover["inner"], rc.CubeUnion), "cover returns unions")

    for bad, exc in [
        (lambda: rc.CubeUnion(1.0, [[0.0], [0.5]]), ValueError),
        (lambda: rc.Basis.with_shifts(union, [[1.0], [1.0]]), RuntimeError),
        (lambda: basis.eval_kernel(5, [0.0]), IndexError),
        (lambda: basis.eval_kernel(0, [0.0, 1.0]), ValueError),
        (lambda: rc.approximate_cover([([0.0], [1.0])], 0.0), ValueError),
    ]:
        try:
            bad()
        except exc:
            pass
        else:
            raise AssertionError(f"expected {exc.__name__}")
    check(True, "errors map to Python exceptions")
    print("all smoke checks passed")


if __name__ == "__main__":
    main()
