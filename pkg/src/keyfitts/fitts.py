"""Fitts' law fitting and direction-aware movement time prediction.

Movement time follows the Shannon form MT = a + b * ID with
ID = log2(D/W + 1).  Instead of one (a, b) pair, a model here carries a pair
per 22.5-degree angular bin, fitted independently by ordinary least squares.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

from .hexgeom import NUM_ANGLE_BINS, angle_bin

# Standard cursor-movement constants: 0.127 s delay, 1/4.9 s/bit acceleration.
GENERIC_A = 0.127
GENERIC_B = 1.0 / 4.9


class UnfittedBinWarning(UserWarning):
    """A prediction fell in a bin without a regression; bin means were used."""


@dataclass(frozen=True)
class MovementSample:
    """One completed target selection.

    `angle` may be None only for distance-0 selections (a click in place);
    those samples anchor the intercept of their demanded bin at ID = 0.
    """

    distance: float
    angle: float | None
    movement_time: float
    demanded_bin: int
    distance_class: int

    def __post_init__(self):
        if self.movement_time <= 0:
            raise ValueError("movement time must be positive")
        if self.distance < 0:
            raise ValueError("distance must be nonnegative")
        if self.distance == 0 and self.distance_class != 0:
            raise ValueError("zero distance implies distance class 0")
        if self.angle is None and self.distance > 0:
            raise ValueError("angle required for nonzero distance")


@dataclass(frozen=True)
class FittsBinModel:
    a: float
    b: float
    r_squared: float
    n_samples: int
    outlier_count: int
    fitted: bool = True
    synthetic: bool = False
    # Indices into the fitted sample list; kept for outlier re-presentation.
    outlier_idx: tuple[int, ...] = field(default=(), compare=False)


UNFITTED_BIN = FittsBinModel(
    a=math.nan, b=math.nan, r_squared=math.nan, n_samples=0, outlier_count=0, fitted=False
)


@dataclass(frozen=True)
class DirectionalFittsModel:
    bins: tuple[FittsBinModel, ...]
    key_width: float
    mean_intercept: float

    def __post_init__(self):
        if len(self.bins) != NUM_ANGLE_BINS:
            raise ValueError(f"expected {NUM_ANGLE_BINS} bins, got {len(self.bins)}")
        if self.key_width <= 0:
            raise ValueError("key width must be positive")

    @property
    def all_fitted(self) -> bool:
        return all(b.fitted for b in self.bins)

    def effective_constants(self) -> tuple[list[float], list[float]]:
        """Per-bin (a, b) with unfitted bins replaced by the fitted-bin means."""
        fitted = [b for b in self.bins if b.fitted]
        if not fitted:
            raise ValueError("model has no fitted bins")
        if len(fitted) < NUM_ANGLE_BINS:
            warnings.warn(
                f"{NUM_ANGLE_BINS - len(fitted)} unfitted bins; substituting mean constants",
                UnfittedBinWarning,
                stacklevel=2,
            )
        mean_a = sum(b.a for b in fitted) / len(fitted)
        mean_b = sum(b.b for b in fitted) / len(fitted)
        a = [b.a if b.fitted else mean_a for b in self.bins]
        b_ = [b.b if b.fitted else mean_b for b in self.bins]
        return a, b_


def index_of_difficulty(distance: float, key_width: float) -> float:
    """Shannon index of difficulty log2(distance/key_width + 1) in bits."""
    if key_width <= 0:
        raise ValueError("key width must be positive")
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    return math.log2(distance / key_width + 1.0)


def _ols(xs: list[float], ys: list[float]) -> tuple[float, float, float, list[float]]:
    """Least-squares fit y = a + b*x; returns (a, b, r_squared, residuals)."""
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    sxx = sum((x - mean_x) ** 2 for x in xs)
    sxy = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    b = sxy / sxx
    a = mean_y - b * mean_x
    residuals = [y - (a + b * x) for x, y in zip(xs, ys)]
    ss_res = sum(r * r for r in residuals)
    ss_tot = sum((y - mean_y) ** 2 for y in ys)
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-300 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return a, b, r2, residuals


def fit_bins(samples: list[MovementSample], key_width: float) -> DirectionalFittsModel:
    """Fit per-bin Fitts constants from movement samples.

    Samples with nonzero distance fall in the bin of their realized angle;
    distance-0 samples contribute at ID = 0 to their demanded bin.  A bin
    needs at least two distinct ID values to be fitted; otherwise it carries
    an explicit unfitted marker.  Samples whose residual magnitude exceeds
    three times the bin's residual standard deviation are flagged and counted
    but never removed: the characterization protocol re-presents them instead.
    """
    if key_width <= 0:
        raise ValueError("key width must be positive")
    if not samples:
        raise ValueError("cannot fit a model from an empty sample list")

    by_bin: list[list[tuple[int, float, float]]] = [[] for _ in range(NUM_ANGLE_BINS)]
    for idx, s in enumerate(samples):
        bin_idx = s.demanded_bin if s.distance == 0 else angle_bin(s.angle)
        by_bin[bin_idx].append((idx, index_of_difficulty(s.distance, key_width), s.movement_time))

    bins = []
    for entries in by_bin:
        ids = [e[1] for e in entries]
        if len(set(ids)) < 2:
            bins.append(UNFITTED_BIN)
            continue
        mts = [e[2] for e in entries]
        a, b, r2, residuals = _ols(ids, mts)
        sd = math.sqrt(sum(r * r for r in residuals) / len(residuals))
        outliers = tuple(
            entries[i][0] for i, r in enumerate(residuals) if sd > 0 and abs(r) > 3.0 * sd
        )
        bins.append(
            FittsBinModel(
                a=a,
                b=b,
                r_squared=min(max(r2, 0.0), 1.0),
                n_samples=len(entries),
                outlier_count=len(outliers),
                outlier_idx=outliers,
            )
        )

    fitted = [b for b in bins if b.fitted]
    if not fitted:
        raise ValueError("no angular bin had two distinct difficulty values")
    mean_intercept = sum(b.a for b in fitted) / len(fitted)
    return DirectionalFittsModel(tuple(bins), float(key_width), mean_intercept)


def predict_mt(model: DirectionalFittsModel, angle: float | None, distance: float) -> float:
    """Predicted movement time in seconds, clamped below at zero.

    Distance 0 is a click with no movement and costs the mean intercept.
    """
    if distance < 0:
        raise ValueError("distance must be nonnegative")
    if distance == 0:
        return model.mean_intercept
    if angle is None:
        raise ValueError("angle required for nonzero distance")
    a, b = model.effective_constants()
    k = angle_bin(angle % 360.0)
    mt = a[k] + b[k] * index_of_difficulty(distance, model.key_width)
    return max(mt, 0.0)


def generic_model(key_width: float) -> DirectionalFittsModel:
    """Isotropic model with the standard constants in every bin."""
    if key_width <= 0:
        raise ValueError("key width must be positive")
    bin_model = FittsBinModel(
        a=GENERIC_A, b=GENERIC_B, r_squared=1.0, n_samples=0, outlier_count=0, synthetic=True
    )
    return DirectionalFittsModel((bin_model,) * NUM_ANGLE_BINS, float(key_width), GENERIC_A)


def anisotropic_model(
    key_width: float,
    a: float = 0.83,
    b_vertical: float = 0.5,
    horizontal_ratio: float = 2.0,
) -> DirectionalFittsModel:
    """Synthetic direction-dependent model for simulated users.

    The slope varies smoothly with the bin's center direction: purely
    horizontal bins cost `horizontal_ratio` times the vertical slope,
    vertical bins cost b_vertical, diagonals interpolate by |cos(angle)|.
    """
    if key_width <= 0:
        raise ValueError("key width must be positive")
    bins = []
    for k in range(NUM_ANGLE_BINS):
        center = math.radians(k * (360.0 / NUM_ANGLE_BINS))
        b = b_vertical * (1.0 + (horizontal_ratio - 1.0) * abs(math.cos(center)))
        bins.append(
            FittsBinModel(a=a, b=b, r_squared=1.0, n_samples=0, outlier_count=0, synthetic=True)
        )
    return DirectionalFittsModel(tuple(bins), float(key_width), a)


def model_to_dict(model: DirectionalFittsModel) -> dict:
    return {
        "key_width_px": model.key_width,
        "bins": [
            {
                "index": i,
                "a_s": b.a if b.fitted else None,
                "b_s_per_bit": b.b if b.fitted else None,
                "r2": b.r_squared if b.fitted else None,
                "n": b.n_samples,
                "outliers": b.outlier_count,
                "fitted": b.fitted,
            }
            for i, b in enumerate(model.bins)
        ],
        "mean_intercept_s": model.mean_intercept,
    }


def model_from_dict(doc: dict) -> DirectionalFittsModel:
    bins: list[FittsBinModel] = [UNFITTED_BIN] * NUM_ANGLE_BINS
    for entry in doc["bins"]:
        if entry["fitted"]:
            bins[entry["index"]] = FittsBinModel(
                a=entry["a_s"],
                b=entry["b_s_per_bit"],
                r_squared=entry["r2"],
                n_samples=entry["n"],
                outlier_count=entry["outliers"],
            )
    return DirectionalFittsModel(tuple(bins), doc["key_width_px"], doc["mean_intercept_s"])


def model_to_json(model: DirectionalFittsModel) -> str:
    return json.dumps(model_to_dict(model), sort_keys=True)


def model_from_json(text: str) -> DirectionalFittsModel:
    return model_from_dict(json.loads(text))
