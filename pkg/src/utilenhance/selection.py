"""Per-image cascade construction from a contribution dictionary.

Each correction is gated by whether its paired feature sits inside the
dictionary's applicability range (omega in {0, 1}), weighted by the
calibrated contribution (gain I = omega * xi), and ranked by benefit per
second (B = I / T). Two selection policies are available:

strict_improving
    The benchmark starts at the contrast correction's benefit; later
    corrections (in contribution-rank order) join the cascade only by
    strictly beating the current benchmark, which then moves up to their
    benefit. With contrast gated off the benchmark starts at zero.

threshold(tau)
    Every gated-on correction whose benefit reaches tau times the best
    gated-on benefit joins the cascade. tau defaults to 0.5.

Either way the resulting plan preserves the fixed contribution-rank order
contrast, color, clarity, brightness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .calibration import ContributionDictionary
from .corrections import PAIRED_FEATURE, RANK_ORDER, CorrectionKind, CorrectionParams
from .errors import InvalidParam
from .features import ApplicabilityRanges, FeatureVector

POLICIES = ("strict_improving", "threshold")


@dataclass(frozen=True)
class CorrectionScore:
    kind: CorrectionKind
    omega: int
    gain: float     # omega * xi
    benefit: float  # gain / time_cost


@dataclass(frozen=True)
class CascadePlan:
    steps: tuple[tuple[CorrectionKind, CorrectionParams], ...]
    policy_id: str
    scores: tuple[CorrectionScore, ...] = field(default=())

    @property
    def kinds(self) -> tuple[CorrectionKind, ...]:
        return tuple(kind for kind, _ in self.steps)

    def describe(self) -> dict:
        return {
            "policy": self.policy_id,
            "plan": [str(k) for k in self.kinds],
            "omega": {str(s.kind): s.omega for s in self.scores},
            "benefit": {str(s.kind): s.benefit for s in self.scores},
        }


def plan_from_kinds(
    kinds: list[CorrectionKind] | tuple[CorrectionKind, ...],
    params: CorrectionParams | None = None,
    policy_id: str = "manual",
    scores: tuple[CorrectionScore, ...] = (),
) -> CascadePlan:
    """Build a plan directly from correction kinds (rank order enforced)."""
    params = params or CorrectionParams()
    chosen = set(kinds)
    ordered = tuple((k, params) for k in RANK_ORDER if k in chosen)
    return CascadePlan(steps=ordered, policy_id=policy_id, scores=scores)


def omega(features: FeatureVector, ranges: ApplicabilityRanges) -> dict[CorrectionKind, int]:
    """1 while the paired feature lies inside its closed range, else 0."""
    return {
        kind: int(ranges.contains(PAIRED_FEATURE[kind], getattr(features, PAIRED_FEATURE[kind])))
        for kind in RANK_ORDER
    }


def score_corrections(
    features: FeatureVector, dictionary: ContributionDictionary
) -> list[CorrectionScore]:
    """Gate, gain and benefit for all four corrections, in rank order."""
    gates = omega(features, dictionary.ranges)
    scores = []
    for kind in RANK_ORDER:
        gain = gates[kind] * dictionary.xi[kind]
        scores.append(
            CorrectionScore(
                kind=kind,
                omega=gates[kind],
                gain=gain,
                benefit=gain / dictionary.time_cost[kind],
            )
        )
    return scores


def select_cascade(
    features: FeatureVector,
    dictionary: ContributionDictionary,
    policy: str = "strict_improving",
    tau: float = 0.5,
    params: CorrectionParams | None = None,
) -> CascadePlan:
    """Choose the per-image correction cascade under the given policy."""
    if policy not in POLICIES:
        raise InvalidParam(f"unknown policy {policy!r}, expected one of {POLICIES}")
    scores = score_corrections(features, dictionary)
    by_kind = {s.kind: s for s in scores}
    chosen: list[CorrectionKind] = []

    if policy == "strict_improving":
        contrast = by_kind[CorrectionKind.CONTRAST]
        benchmark = contrast.benefit  # zero when contrast is gated off
        if contrast.omega == 1:
            chosen.append(contrast.kind)
        for kind in RANK_ORDER[1:]:
            score = by_kind[kind]
            if score.omega == 1 and score.benefit > benchmark:
                chosen.append(kind)
                benchmark = score.benefit
        policy_id = "strict_improving"
    else:
        if not (0.0 < tau <= 1.0):
            raise InvalidParam(f"tau {tau} outside (0, 1]")
        candidates = [s for s in scores if s.omega == 1]
        if candidates:
            benchmark = max(s.benefit for s in candidates)
            chosen = [s.kind for s in candidates if s.benefit >= tau * benchmark]
        policy_id = f"threshold({tau:g})"

    return plan_from_kinds(chosen, params=params, policy_id=policy_id, scores=tuple(scores))
