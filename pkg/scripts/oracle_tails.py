"""Pre-registered oracle for the joint-tail constant at n = 2^12.

Laplace walk, s = 0, t = 1, 10^7 first cycles.  The printed values are
frozen in tests/oracles.py and set the tolerance used at n = 2^10.
"""
import json
import sys
import time

from persistwalk.estimators import joint_tail

N, REPS, SEED = 1 << 12, 10 ** 7, 20261016


def main(out_path=None):
    t = time.time()
    c = joint_tail("laplace", 0.0, 1.0, [N], REPS, "theta-only", seed=SEED, workers=1)
    p = c.points[0]
    out = dict(n=N, reps=REPS, seed=SEED, value=p.value, stderr=p.stderr, theory=c.theory,
               rel_error=p.value / c.theory - 1, secs=time.time() - t)
    print(json.dumps(out, indent=1))
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(out, fh, indent=1)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
