"""Greedy budgeted selection of communication links.

Each iteration evaluates the marginal gain (drop in alpha_max) of every
remaining candidate link, installs the best one, and repeats until the budget
is spent or no link helps.  An exhaustive planner over all budget-sized
subsets serves as a small-instance oracle.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

from gridlink.dynamics import Link, normalize_link
from gridlink.linearization import alpha_for_links
from gridlink.model import SystemModel

# Gains closer than this are treated as tied and broken lexicographically by
# (min index, max index), which keeps the selection independent of candidate
# evaluation order.
TIE_TOL = 1e-12


class PlannerGuardError(RuntimeError):
    """Exhaustive search would exceed the combinatorial guard."""


@dataclass(frozen=True)
class PlanIteration:
    index: int  # 1-based iteration number
    link: Link
    alpha_max_after: float  # 1/s
    marginal_gain: float  # alpha before minus alpha after; positive = improvement


@dataclass(frozen=True)
class PlanResult:
    baseline_alpha: float  # alpha_max before any planned link
    iterations: tuple[PlanIteration, ...]
    stopped_early: bool
    stop_reason: str | None = None

    @property
    def final_alpha(self) -> float:
        return self.iterations[-1].alpha_max_after if self.iterations else self.baseline_alpha

    @property
    def links(self) -> tuple[Link, ...]:
        return tuple(it.link for it in self.iterations)


def candidate_links(n: int, installed=()) -> list[Link]:
    """All unordered generator pairs over 0..n-1 minus the installed set, sorted."""
    if n < 2:
        raise ValueError("need at least two generators to form links")
    taken = {normalize_link(l) for l in installed}
    return [(i, k) for i in range(n) for k in range(i + 1, n) if (i, k) not in taken]


def marginal_gain(link: Link, installed, model: SystemModel, gain_h: float, deflate: bool = True) -> float:
    """alpha(installed) - alpha(installed + link); positive means improved stability."""
    if gain_h >= 0:
        raise ValueError("gain_h must be negative")
    link = normalize_link(link)
    base = [normalize_link(l) for l in installed]
    if link in base:
        raise ValueError(f"link {link} already installed")
    before = alpha_for_links(model, base, gain_h, deflate=deflate)
    after = alpha_for_links(model, base + [link], gain_h, deflate=deflate)
    return before - after


def _sweep(model: SystemModel, installed: list[Link], remaining: list[Link], gain_h: float, deflate: bool, workers: int):
    """alpha_max after each candidate, in candidate order."""

    def evaluate(link: Link) -> float:
        return alpha_for_links(model, installed + [link], gain_h, deflate=deflate)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(evaluate, remaining))
    return [evaluate(link) for link in remaining]


def greedy_plan(
    model: SystemModel,
    budget: int,
    gain_h: float,
    allow_nonpositive: bool = False,
    deflate: bool = True,
    workers: int = 1,
    preinstalled=(),
) -> PlanResult:
    """Install up to ``budget`` links, each the argmax of marginal gain.

    Stops early (with the reason recorded) when the best remaining gain is
    nonpositive, unless ``allow_nonpositive`` is set.  Ties within TIE_TOL go
    to the lexicographically smallest pair.  A budget larger than the number
    of candidate links is clamped with a warning.  Deterministic, including
    under a parallel candidate sweep (workers > 1).
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if gain_h >= 0:
        raise ValueError("gain_h must be negative")
    installed = sorted(normalize_link(l) for l in preinstalled)
    if len(set(installed)) != len(installed):
        raise ValueError("duplicate links in preinstalled set")

    available = len(candidate_links(model.n, installed))
    if budget > available:
        warnings.warn(f"budget {budget} exceeds the {available} available links; clamped", stacklevel=2)
        budget = available

    alpha_before = alpha_for_links(model, installed, gain_h, deflate=deflate)
    baseline = alpha_before
    iterations: list[PlanIteration] = []
    stopped_early = False
    stop_reason = None

    for it in range(1, budget + 1):
        remaining = candidate_links(model.n, installed)
        alphas = _sweep(model, installed, remaining, gain_h, deflate, workers)
        best_link = None
        best_alpha = math.inf
        best_gain = -math.inf
        for link, alpha in zip(remaining, alphas):
            gain = alpha_before - alpha
            if gain > best_gain + TIE_TOL:
                best_link, best_alpha, best_gain = link, alpha, gain
        if best_gain <= 0 and not allow_nonpositive:
            stopped_early = True
            stop_reason = f"best marginal gain {best_gain:.3e} is nonpositive at iteration {it}"
            break
        installed.append(best_link)
        installed.sort()
        iterations.append(
            PlanIteration(index=it, link=best_link, alpha_max_after=best_alpha, marginal_gain=best_gain)
        )
        alpha_before = best_alpha
    return PlanResult(
        baseline_alpha=baseline,
        iterations=tuple(iterations),
        stopped_early=stopped_early,
        stop_reason=stop_reason,
    )


def exhaustive_plan(
    model: SystemModel,
    budget: int,
    gain_h: float,
    deflate: bool = True,
    guard: int = 10**6,
) -> PlanResult:
    """Global optimum over every link subset within the budget (small instances).

    Scans all subsets of size 0..budget in lexicographic order, so the result
    never exceeds the budget and is always at least as good as any greedy
    outcome.  Strictly better means the final alpha_max drops by more than
    TIE_TOL; ties resolve to the smaller, lexicographically first subset,
    matching the greedy tie-break.  Raises PlannerGuardError when the subset
    count exceeds ``guard``.
    """
    if budget < 0:
        raise ValueError("budget must be nonnegative")
    if gain_h >= 0:
        raise ValueError("gain_h must be negative")
    pool = candidate_links(model.n)
    if budget > len(pool):
        warnings.warn(f"budget {budget} exceeds the {len(pool)} available links; clamped", stacklevel=2)
        budget = len(pool)
    count = sum(math.comb(len(pool), size) for size in range(budget + 1))
    if count > guard:
        raise PlannerGuardError(f"{count} subsets exceed the exhaustive-search guard of {guard}")

    baseline = alpha_for_links(model, [], gain_h, deflate=deflate)
    best_subset: tuple[Link, ...] = ()
    best_final = baseline
    for size in range(1, budget + 1):
        for subset in combinations(pool, size):
            final = alpha_for_links(model, list(subset), gain_h, deflate=deflate)
            if final < best_final - TIE_TOL:
                best_subset, best_final = subset, final

    iterations = []
    prev_alpha = baseline
    for i, link in enumerate(best_subset, start=1):
        alpha = alpha_for_links(model, list(best_subset[:i]), gain_h, deflate=deflate)
        iterations.append(PlanIteration(index=i, link=link, alpha_max_after=alpha, marginal_gain=prev_alpha - alpha))
        prev_alpha = alpha
    return PlanResult(baseline_alpha=baseline, iterations=tuple(iterations), stopped_early=False)
