"""Pre-registered high-mesh oracle for the excursion area moments.

Run once; the printed values are frozen in tests/oracles.py.
"""
import json
import sys
import time

from persistwalk.excursion import E_XI_EX, moment, sample_xi_ex_many

MESH, SAMPLES, SEED = 1 << 14, 100_000, 20261016


def main(out_path=None):
    t = time.time()
    s = sample_xi_ex_many(MESH, SAMPLES, seed=SEED, method="exact", workers=1, stream="oracle")
    m1, e1 = moment(s, 1.0)
    m3, e3 = moment(s, 1 / 3)
    m2, e2 = moment(s, 2.0)
    out = dict(mesh=MESH, samples=SAMPLES, seed=SEED, method="exact", mean=m1, se=e1, cbrt=m3,
               cbrt_se=e3, second=m2, second_se=e2, secs=time.time() - t, closed_form_mean=E_XI_EX)
    print(json.dumps(out, indent=1))
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(out, fh, indent=1)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
