"""Run a few catalog entries and print their reports."""

import numpy as np

from lieclass.catalog import list_cases, verify_case

for cid, cite in list_cases("T1.case1*"):
    rep = verify_case(cid, {"mu": [2.0]}, rng=np.random.default_rng(0))
    print(f"{cid:12s} {'pass' if rep.passed else 'FAIL'}  {rep.max_residual:.1e}  {cite}")

rep = verify_case("Thm-KF.case3", {"b": [3.0], "eps": [1], "epsb": [1]})
print(rep.summary())
