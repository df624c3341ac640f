"""Classification data and the drivers that verify it."""

from __future__ import annotations

import fnmatch
import json
from importlib import resources
from typing import Mapping, Sequence

import numpy as np

from ..jet import DT, UDU
from ..report import VerificationReport
from ..symmetry import ClosureFailure, algebra_closure, is_lie_symmetry
from .cases import CASES, CaseInstance, ClassificationCase
from .groupoid import (verify_commutator, verify_generating_set, verify_invariant_I10,
                       verify_phi4_decomposition)

# groupoid and invariant checks listed next to the symmetry cases
EXTRA_ENTRIES = {
    "GS.generating-set": "generating admissible transformations T1, T2, T3 and the composite T4",
    "GS.T4-decomposition": "T4 as a product of T1^-1, a time shift, T1 and a scaling",
    "INV.I10": "first-order differential invariant of the mu/x^2 symmetry group",
    "INV.commutator": "commutator of the invariant differentiation operators",
}


def manifest() -> dict[str, str]:
    """Case id -> citation as shipped with the package."""
    text = resources.files(__package__).joinpath("manifest.json").read_text()
    return json.loads(text)


def registry() -> dict[str, str]:
    out = {cid: c.citation for cid, c in CASES.items()}
    out.update(EXTRA_ENTRIES)
    return out


def list_cases(pattern: str | None = None) -> list[tuple[str, str]]:
    """Ids and citations matching a glob on the id or a class tag such as "K'"."""
    reg = registry()
    if not pattern:
        return sorted(reg.items())
    out = []
    for cid, cite in reg.items():
        tags = CASES[cid].tags if cid in CASES else ()
        if fnmatch.fnmatchcase(cid, pattern) or pattern.split("^")[0] in tags:
            out.append((cid, cite))
    return sorted(out)


def _verify_instance(inst: CaseInstance, rng: np.random.Generator, trials: int,
                     tol: float | None) -> VerificationReport:
    tol_ = max(inst.tol, tol) if tol is not None else inst.tol
    rep = VerificationReport(inst.label, tol=tol_)
    basis = []
    for name, v in inst.fields:
        r = is_lie_symmetry(inst.eq, v, tol_, trials, rng, inst.rules, inst.oracles,
                            inst.sampler, field_id=name)
        r.name = f"field {name}"
        rep.add(r)
        basis.append(v)
    names = [n for n, _ in inst.fields]
    if "I" not in names:
        rep.fail("kernel field u d_u missing from the basis")
    if inst.time_independent and "Pt" not in names:
        rep.fail("kernel field d_t missing from the basis")
    if inst.closure:
        try:
            sc = algebra_closure(inst.eq, basis, tol_, rng, inst.rules, inst.oracles, inst.sampler)
            rep.add(VerificationReport(f"closure dim {len(basis)}", True, sc.max_residual,
                                       sc.points, tol_))
        except ClosureFailure as err:
            bad = VerificationReport(f"closure dim {len(basis)}", False, err.residual, 0, tol_)
            bad.details.append(str(err))
            rep.add(bad)
    return rep


def case_instances(case_id: str, params: Mapping[str, Sequence] | None = None,
                   rng: np.random.Generator | None = None) -> list[CaseInstance]:
    case = CASES[case_id]
    rng = rng if rng is not None else np.random.default_rng(0)
    out = []
    for p in case.combos(params):
        out.extend(case.build(p, rng))
    return out


def verify_case(case_id: str, params: Mapping[str, Sequence] | None = None,
                tol: float | None = None, trials: int = 200,
                rng: np.random.Generator | None = None) -> VerificationReport:
    """Check every listed field, the bracket closure and the kernel of one case."""
    rng = rng if rng is not None else np.random.default_rng(0)
    if case_id in EXTRA_ENTRIES:
        return _verify_extra(case_id, params or {}, tol, trials, rng)
    if case_id not in CASES:
        raise KeyError(f"unknown case id {case_id!r}")
    case = CASES[case_id]
    rep = VerificationReport(case_id, citation=case.citation, tol=tol or 1e-8)
    for inst in case_instances(case_id, params, rng):
        rep.add(_verify_instance(inst, rng, trials, tol))
    if case_id in ("Thm-KF.case2", "Thm-KF.case3"):
        rep.add(_drift_consistency(case_id))
    return rep


def _drift_consistency(case_id: str) -> VerificationReport:
    """The closed-form drifts arise from the stated W."""
    import sympy as sp

    from ..expr import DomainSampler, x, zero_test
    from ..mapping import drift_from_W

    rep = VerificationReport("drift from W", tol=1e-12)
    dom = DomainSampler({"x": (0.5, 2.0)})
    for e in (-1, 1):
        for eb in (-1, 1):
            if case_id.endswith("2"):
                for av in (sp.Rational(1, 2), sp.Integer(1)):
                    W = sp.sqrt(x) * sp.cos(av * sp.log(x))
                    target = e * eb / x * (1 - 2 * av * sp.tan(av * sp.log(x)))
                    z = zero_test(drift_from_W(W, e, eb) - target, dom, 1e-12, 100)
                    rep.add(VerificationReport(f"a={av},eps={e},epsb={eb}", z.passed, z.max_residual,
                                               z.samples, 1e-12))
            else:
                for bv in (1, 3):
                    W = x ** sp.Rational(bv, 2)
                    z = zero_test(drift_from_W(W, e, eb) - e * eb * bv / x, dom, 1e-12, 100)
                    rep.add(VerificationReport(f"b={bv},eps={e},epsb={eb}", z.passed, z.max_residual,
                                               z.samples, 1e-12))
    return rep


def _verify_extra(case_id, params, tol, trials, rng) -> VerificationReport:
    if case_id == "GS.generating-set":
        rep = verify_generating_set(params.get("mu", (-1, 1, 3)), tol or 1e-10, trials, rng)
    elif case_id == "GS.T4-decomposition":
        rep = verify_phi4_decomposition(tol or 1e-10, 200, rng)
    elif case_id == "INV.I10":
        rep = verify_invariant_I10(50, 100, tol or 1e-8, rng)
    else:
        rep = verify_commutator(tol=tol or 1e-10, rng=rng)
    rep.name = case_id
    rep.citation = EXTRA_ENTRIES[case_id]
    return rep


SUITES = {
    "table1": "T1.*",
    "table2": "T2.*",
    "thm-p": "Thm-P.*",
    "thm-kf": "Thm-KF.*",
    "thm-kf-mapped": "Thm-KF-mapped.*",
    "groupoid": "GS.*",
    "invariant": "INV.*",
}


def suite_ids(target: str) -> list[str]:
    if target == "all":
        return [cid for cid, _ in list_cases()]
    if target not in SUITES:
        raise KeyError(f"unknown suite {target!r}")
    ids = [cid for cid, _ in list_cases(SUITES[target])]
    if target == "thm-kf":
        ids = [i for i in ids if not i.startswith("Thm-KF-mapped")]
    return ids


__all__ = ["CASES", "ClassificationCase", "CaseInstance", "EXTRA_ENTRIES", "SUITES", "manifest",
           "registry", "list_cases", "verify_case", "case_instances", "suite_ids",
           "verify_generating_set", "verify_invariant_I10", "verify_commutator",
           "verify_phi4_decomposition"]
