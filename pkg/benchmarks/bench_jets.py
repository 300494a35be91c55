"""Compiled vs pure-Python jet backends.

Two measurements:
  kernel   - order-2 jet arithmetic on a trigonometric chart map, per backend
  pipeline - a 10x10 DDVV scan of veronese_s4 in a fresh interpreter,
             with and without MWL_PURE_PYTHON=1

    python3 benchmarks/bench_jets.py [--repeat N]
"""
import argparse
import os
import subprocess
import sys
import timeit

from mwlab.jets import _jetcore_py

try:
    from mwlab.jets import _jetcore
except ImportError:
    _jetcore = None


def chart_map(core, x):
    """A Clifford-like torus coordinate block with a rational factor."""
    u = [core.Jet.variable(v, i, len(x)) for i, v in enumerate(x)]
    out = []
    for k in range(3):
        t = u[0] + k * 1.0471975511965976
        s = u[1] * 0.5 + u[2] * 0.25
        out.append((t.cos() * s.sin() + (t * s).exp() / (1.0 + s * s)).sqrt())
        out.append((t - s) ** 3 - t.atan() * (s * s + 1.0).log())
    return out


def kernel(core, repeat):
    x = [0.3, 0.7, 1.1]
    return min(timeit.repeat(lambda: chart_map(core, x), number=200, repeat=repeat)) / 200


PIPELINE = (
    "import time; from mwlab.immersions import gallery_get; from mwlab.probe import grid_scan;"
    "imm = gallery_get('veronese_s4'); t = time.perf_counter();"
    "grid_scan(imm, n=10, moebius=False); print(time.perf_counter() - t)"
)


def pipeline(pure):
    env = dict(os.environ)
    env.pop("MWL_PURE_PYTHON", None)
    if pure:
        env["MWL_PURE_PYTHON"] = "1"
    res = subprocess.run([sys.executable, "-c", PIPELINE], env=env, capture_output=True, text=True, check=True)
    return float(res.stdout.strip())


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rows = [("kernel", "python", kernel(_jetcore_py, args.repeat))]
    if _jetcore is not None:
        rows.append(("kernel", "compiled", kernel(_jetcore, args.repeat)))
    rows.append(("pipeline", "python", min(pipeline(True) for _ in range(args.repeat))))
    if _jetcore is not None:
        rows.append(("pipeline", "compiled", min(pipeline(False) for _ in range(args.repeat))))

    print(f"{'benchmark':<10} {'backend':<9} {'seconds':>12}")
    for name, backend, sec in rows:
        print(f"{name:<10} {backend:<9} {sec:12.3e}")
    if _jetcore is None:
        print("compiled extension not built; only the fallback was timed")
        return
    for name in ("kernel", "pipeline"):
        py, co = (sec for n, _, sec in rows if n == name)
        print(f"{name}: compiled is {py / co:.1f}x faster")


if __name__ == "__main__":
    main()
