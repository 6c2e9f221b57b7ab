"""Cutpoint selection over a continuous attribute's observed range.

Three schemes: equal-width, equal-frequency (order statistics), and a
supervised splitter that greedily minimises the normalised entropy distance
between the class variable and the binary partition.  All schemes span the
data: the first cutpoint is the minimum, the last the maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .errors import ContractError, DegenerateInputError


class Method(Enum):
    EQUAL_WIDTH = "ew"
    EQUAL_FREQUENCY = "ef"
    ENTROPY_DISTANCE = "distance"


@dataclass(frozen=True)
class Discretization:
    method: Method
    cutpoints: tuple[float, ...]
    #: set when the supervised splitter ran out of candidate boundaries
    #: before reaching the requested bin count
    auto_stopped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "cutpoints", tuple(float(c) for c in self.cutpoints))
        for a, b in zip(self.cutpoints, self.cutpoints[1:]):
            if not a < b:
                raise ContractError(f"cutpoints must be strictly increasing, got {a} >= {b}")

    @property
    def bins(self) -> int:
        return len(self.cutpoints) - 1

    def intervals(self) -> list[tuple[float, float]]:
        return list(zip(self.cutpoints, self.cutpoints[1:]))


def _check_sorted(data: Sequence[float]) -> None:
    for a, b in zip(data, data[1:]):
        if a > b:
            raise ContractError("input data must be sorted ascending")


def equal_width(data: Sequence[float], l: int) -> Discretization:
    """l equally wide bins over [min(data), max(data)]."""
    if l < 1:
        raise DegenerateInputError(f"bin count must be >= 1, got {l}")
    if len(data) < 2:
        raise DegenerateInputError("need at least two data points")
    _check_sorted(data)
    x_min, x_max = float(data[0]), float(data[-1])
    if x_min == x_max:
        raise DegenerateInputError("all data points are equal; no width to divide")
    width = (x_max - x_min) / l
    cps = [x_min + width * i for i in range(l + 1)]
    cps[0], cps[-1] = x_min, x_max
    return Discretization(Method.EQUAL_WIDTH, tuple(cps))


def equal_frequency(data: Sequence[float], l: int) -> Discretization:
    """Bins holding (nearly) equal element counts; interior cutpoints are
    order statistics.  A cutpoint landing inside a run of duplicates shifts
    to the midpoint after the run; bins merge when no room remains."""
    if l < 1:
        raise DegenerateInputError(f"bin count must be >= 1, got {l}")
    if len(data) < l + 1:
        raise DegenerateInputError(f"{len(data)} points cannot fill {l} bins")
    _check_sorted(data)
    data = [float(x) for x in data]
    x_min, x_max = data[0], data[-1]
    distinct = sorted(set(data))
    if l > len(distinct):
        raise DegenerateInputError(
            f"{len(distinct)} distinct values cannot support {l} bins"
        )
    cps = [x_min]
    for i in range(1, l):
        # m-th order statistic with the remainder spread across bins, so
        # duplicate-free occupancy never differs by more than one
        m = len(data) * i // l
        v = data[m - 1]
        if (m < len(data) and data[m] == v) or v <= cps[-1]:
            # the cut splits a tie, or lands on an already-placed cutpoint:
            # move past the run, to the midpoint with the next distinct
            # value (merge bins if the run reaches the maximum)
            nxt = next((w for w in distinct if w > v), None)
            if nxt is None:
                continue
            cut = (v + nxt) / 2.0
        else:
            cut = v
        if cps[-1] < cut < x_max:
            cps.append(cut)
    cps.append(x_max)
    return Discretization(Method.EQUAL_FREQUENCY, tuple(cps))


def occupancy(disc: Discretization, data: Sequence[float]) -> list[int]:
    """Per-bin element counts; bins are right-closed except the first."""
    counts = [0] * disc.bins
    cps = disc.cutpoints
    for x in data:
        for i in range(disc.bins):
            if (x >= cps[i] if i == 0 else x > cps[i]) and x <= cps[i + 1]:
                counts[i] += 1
                break
    return counts


# --- supervised: normalised entropy distance --------------------------------


def _entropy(counts) -> float:
    n = sum(counts)
    h = 0.0
    for k in counts:
        if k:
            p = k / n
            h -= p * math.log(p)
    return h


def _distance(labels: Sequence, split: int) -> float:
    """Mantaras normalised distance 1 - I(C;P)/H(C,P) for a binary split."""
    left: dict = {}
    right: dict = {}
    for lab in labels[:split]:
        left[lab] = left.get(lab, 0) + 1
    for lab in labels[split:]:
        right[lab] = right.get(lab, 0) + 1
    joint = list(left.values()) + list(right.values())
    classes: dict = {}
    for side in (left, right):
        for lab, k in side.items():
            classes[lab] = classes.get(lab, 0) + k
    h_joint = _entropy(joint)
    mutual = _entropy(classes.values()) + _entropy([split, len(labels) - split]) - h_joint
    return 1.0 - mutual / h_joint


def _boundary_splits(values: Sequence[float], labels: Sequence) -> list[int]:
    """Split indices between distinct values whose adjacent runs carry more
    than one class label (Fayyad-style boundary restriction)."""
    n = len(values)
    runs: list[tuple[int, int]] = []
    start = 0
    for i in range(1, n + 1):
        if i == n or values[i] != values[start]:
            runs.append((start, i))
            start = i
    splits = []
    for (a1, b1), (a2, b2) in zip(runs, runs[1:]):
        if len({*labels[a1:b1], *labels[a2:b2]}) > 1:
            splits.append(b1)
    return splits


def entropy_distance(
    data: Sequence[tuple[float, object]], l: int | None = None
) -> Discretization:
    """Greedy recursive binary splitting by minimal entropy distance.

    Stops at l bins when l is given, or when no candidate boundary remains
    (reported through ``auto_stopped``, also set when l is unreachable).
    """
    if l is not None and l < 1:
        raise DegenerateInputError(f"bin count must be >= 1, got {l}")
    if len(data) < 2:
        raise DegenerateInputError("need at least two labelled points")
    values = [float(v) for v, _ in data]
    labels = [lab for _, lab in data]
    _check_sorted(values)
    if values[0] == values[-1]:
        raise DegenerateInputError("all data points are equal; no width to divide")
    candidates = _boundary_splits(values, labels)

    bins: list[tuple[int, int]] = [(0, len(values))]
    chosen: list[int] = []
    while l is None or len(bins) < l:
        best = None  # (distance, split, bin index)
        for b_idx, (a, b) in enumerate(bins):
            for s in candidates:
                if a < s < b:
                    d = _distance(labels[a:b], s - a)
                    if best is None or d < best[0]:
                        best = (d, s, b_idx)
        if best is None:
            break
        _, s, b_idx = best
        a, b = bins[b_idx]
        bins[b_idx : b_idx + 1] = [(a, s), (s, b)]
        chosen.append(s)

    auto = l is None or len(bins) < l
    cps = [values[0]]
    for s in sorted(chosen):
        cps.append((values[s - 1] + values[s]) / 2.0)
    cps.append(values[-1])
    return Discretization(Method.ENTROPY_DISTANCE, tuple(cps), auto_stopped=auto)
