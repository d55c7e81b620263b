"""Moment and CDF diagnostics comparing normalized traces with catalog groups.

Sums are exactly rounded (``math.fsum``), so every statistic is a function of
the multiset of traces alone and does not depend on record order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .endo_galois import GaloisTwistGroup
from .errors import InsufficientDataError, StlabError
from .haar import GROUPS, CompactGroupId, MomentVector, as_group, coset_trace_cdf, trace_moments_quadrature

GRID_HALF_POINTS = 5000  # grid has 2 * 5000 + 1 points and contains 0 exactly


@dataclass(frozen=True)
class Policy:
    z_threshold: float = 4.0
    # differences below the quadrature accuracy are not evidence
    stderr_floor: float = 1e-9
    chebotarev_sigmas: float = 3.0
    k_max: int = 8

    def to_json(self):
        return {"z_threshold": self.z_threshold, "stderr_floor": self.stderr_floor,
                "chebotarev_sigmas": self.chebotarev_sigmas, "k_max": self.k_max}


def _traces(records) -> np.ndarray:
    if len(records) and hasattr(records[0], "t"):
        return np.array([r.t for r in records], dtype=float)
    return np.asarray(records, dtype=float)


def _filter(records, class_filter):
    if class_filter is None:
        return list(records)
    return [r for r in records if r.class_label == class_filter]


def empirical_moments(records, k_max: int = 8, class_filter: str | None = None) -> MomentVector:
    """Means of t^k over the (filtered) records with standard errors from the sample variance."""
    t = _traces(_filter(records, class_filter))
    n = len(t)
    if n == 0:
        raise InsufficientDataError(f"no records{'' if class_filter is None else f' in class {class_filter}'}")
    vals = np.empty(k_max + 1)
    errs = np.empty(k_max + 1)
    for k in range(k_max + 1):
        tk = t ** k
        mean = math.fsum(tk) / n
        var = math.fsum((tk - mean) ** 2) / (n - 1) if n > 1 else 0.0
        vals[k] = mean
        errs[k] = math.sqrt(var / n)
    return MomentVector(vals, errs, "empirical")


@dataclass
class AnalysisReport:
    candidate: str
    component: str
    n_records: int
    empirical: MomentVector
    reference: MomentVector
    z: np.ndarray
    verdict: str
    discrepancy: float | None = None

    @property
    def k_max(self) -> int:
        return self.empirical.k_max

    def passing_moments(self, policy: Policy) -> int:
        return sum(1 for k in range(2, self.k_max + 1, 2) if abs(self.z[k]) <= policy.z_threshold)

    def to_json(self):
        return {
            "candidate": self.candidate,
            "component": self.component,
            "n_records": self.n_records,
            "moments": {
                "k": list(range(self.k_max + 1)),
                "emp": [float(x) for x in self.empirical.values],
                "stderr": [float(x) for x in self.empirical.stderr],
                "ref": [float(x) for x in self.reference.values],
                "z": [float(x) for x in self.z],
            },
            "discrepancy": self.discrepancy,
            "verdict": self.verdict,
        }


def compare_to_group(emp: MomentVector, group, component: str | None = None,
                     policy: Policy = Policy(), n_records: int | None = None) -> AnalysisReport:
    """z_k = (M_k - M_k^ref) / stderr_k; pass iff |z_k| <= threshold for every even k >= 2."""
    g = as_group(group, component)
    if emp.k_max < 0 or len(emp.values) == 0:
        raise InsufficientDataError("empty moment vector")
    ref = trace_moments_quadrature(g, k_max=emp.k_max)
    se = np.sqrt(emp.stderr ** 2 + ref.stderr ** 2)
    se = np.maximum(se, policy.stderr_floor)
    z = (emp.values - ref.values) / se
    ok = all(abs(z[k]) <= policy.z_threshold for k in range(2, emp.k_max + 1, 2))
    return AnalysisReport(g.name, g.component, n_records or 0, emp, ref, z, "pass" if ok else "fail")


def trace_grid(dim: int) -> np.ndarray:
    return np.arange(-GRID_HALF_POINTS, GRID_HALF_POINTS + 1) * (dim / GRID_HALF_POINTS)


def sup_distance(f_emp: np.ndarray, f_ref: np.ndarray) -> float:
    return float(np.max(np.abs(np.asarray(f_emp) - np.asarray(f_ref))))


def empirical_cdf(t: np.ndarray, grid: np.ndarray) -> np.ndarray:
    return np.searchsorted(np.sort(t), grid, side="right") / len(t)


def discrepancy(records, group, component: str | None = None) -> float:
    """sup over a grid on [-dim, dim] of |F_emp - F_ref|."""
    g = as_group(group, component)
    t = _traces(records)
    if len(t) < 10:
        raise InsufficientDataError(f"discrepancy needs at least 10 records, got {len(t)}")
    grid = trace_grid(g.dim)
    return sup_distance(empirical_cdf(t, grid), coset_trace_cdf(g)(grid))


def analyze(records, group, component: str | None = None, policy: Policy = Policy()) -> AnalysisReport:
    """compare_to_group on the empirical moments, plus the CDF discrepancy."""
    report = compare_to_group(empirical_moments(records, policy.k_max), group, component, policy,
                              n_records=len(records))
    if len(records) >= 10:
        report.discrepancy = discrepancy(records, group, component)
    return report


@dataclass
class ConditionalReport:
    classes: dict
    counts: dict
    chebotarev_ok: bool
    verdict: str
    hypothesis: dict = field(default_factory=dict)

    def to_json(self):
        out = {}
        for lab, rep in self.classes.items():
            out[lab] = rep.to_json() if isinstance(rep, AnalysisReport) else {
                "candidate": self.hypothesis[lab][0], "component": self.hypothesis[lab][1],
                "n_records": 0, "verdict": rep}
        return {"classes": out, "class_counts": self.counts,
                "chebotarev_uniform": self.chebotarev_ok, "verdict": self.verdict}


def chebotarev_uniform(counts: Mapping[str, int], order: int, sigmas: float = 3.0) -> bool:
    """Class counts agree with equal densities 1/order within ``sigmas`` binomial sigmas."""
    n = sum(counts.values())
    q = 1 / order
    sd = math.sqrt(n * q * (1 - q))
    return all(abs(c - n * q) <= sigmas * sd for c in counts.values())


def component_conditional_test(records, group: GaloisTwistGroup,
                               hypothesis: Mapping[str, tuple[str, str]],
                               policy: Policy = Policy()) -> ConditionalReport:
    """Partition records by Frobenius class and test each class against its coset.

    ``hypothesis`` maps every group label to (group name, component). A class
    without records is reported as insufficient data rather than a failure.
    With the trivial group every record falls in the single class.
    """
    hyp = {lab: tuple(hypothesis[lab]) for lab in hypothesis}
    missing = [lab for lab in group.labels if lab not in hyp]
    if missing:
        raise StlabError(f"hypothesis has no entry for class(es) {', '.join(missing)}",
                         code="equidist_analysis.hypothesis")
    if group.order == 1:
        buckets = {group.labels[0]: list(records)}
    else:
        buckets = {lab: [r for r in records if r.class_label == lab] for lab in group.labels}
    counts = {lab: len(b) for lab, b in buckets.items()}
    classes = {}
    all_pass = True
    for lab in group.labels:
        name, comp = hyp[lab]
        if not buckets[lab]:
            classes[lab] = "insufficient data"
            continue
        rep = analyze(buckets[lab], name, comp, policy)
        classes[lab] = rep
        all_pass &= rep.verdict == "pass"
    cheb = chebotarev_uniform(counts, group.order, policy.chebotarev_sigmas)
    verdict = "pass" if all_pass and cheb else "fail"
    return ConditionalReport(classes, counts, cheb, verdict, hyp)


@dataclass
class Candidate:
    name: str
    component: str
    n_pass: int
    discrepancy: float
    report: AnalysisReport

    def to_json(self):
        return {"candidate": self.name, "component": self.component, "passing_moments": self.n_pass,
                "discrepancy": self.discrepancy, "verdict": self.report.verdict}


def identify(records, catalog: Sequence[str], group: GaloisTwistGroup | None = None,
             policy: Policy = Policy()) -> list[Candidate]:
    """Rank catalog groups by (passing even moments desc, discrepancy asc, catalog order).

    Each candidate is compared through its full trace distribution (the
    mixture of components for NU1). If ``group`` labels primes, records that
    carry no class label are dropped first.
    """
    if not catalog:
        raise StlabError("empty catalog", code="equidist_analysis.catalog")
    if group is not None and group.labelable and group.order > 1:
        records = [r for r in records if r.class_label is not None]
    if len(records) < 100:
        raise InsufficientDataError(f"identify needs at least 100 records, got {len(records)}")
    emp = empirical_moments(records, policy.k_max)
    out = []
    for name in sorted(set(catalog), key=GROUPS.index):
        g = CompactGroupId(name)
        rep = compare_to_group(emp, g, policy=policy, n_records=len(records))
        rep.discrepancy = discrepancy(records, g)
        out.append(Candidate(g.name, g.component, rep.passing_moments(policy), rep.discrepancy, rep))
    out.sort(key=lambda c: (-c.n_pass, c.discrepancy))  # stable: ties keep catalog order
    return out
