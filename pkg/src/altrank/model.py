"""Random alternating-matrix model for curves ordered by height.

A curve y^2 = x^3 + a4*x + a6 has height max(|4*a4^3|, 27*a6^2).  For a
curve of height H the model draws a uniform alternating integer matrix
whose size n sits near a slowly growing eta(H) and whose entry bound
x(H) keeps x**eta within a constant factor of H**(1/12).  The corank of
the draw stands in for the Mordell-Weil rank and the cokernel torsion
for the Shafarevich-Tate group, so rank and Sha statistics across a
height range reduce to exact integer linear algebra on samples.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from random import Random
from typing import NamedTuple, Optional

from .counting import CapExceededError, Estimate, count_alternating_by_rank
from .fitting import FitResult, exponent_fit
from .groups import AbelianPGroup, group_label
from .linalg import (
    AlternatingMatrix,
    cokernel,
    diag_valuations_mod,
    kernel_rank,
    smith_divisors,
)
from .parallel import CHUNK, chunk_seed, chunk_sizes, map_chunks
from .primes import iroot, primes_up_to

__all__ = [
    "CurveParams",
    "ModelConfig",
    "ModelParams",
    "ModelDraw",
    "EmpiricalDistribution",
    "SurveyRecord",
    "FitResult",
    "curve_height",
    "is_valid_curve",
    "count_curves_exact",
    "sample_curve_in_band",
    "schedule_eta",
    "schedule_x",
    "model_params",
    "sample_alternating",
    "draw_model",
    "torsion_label",
    "is_square_of_cyclic",
    "empirical_corank_prob",
    "empirical_sha_distribution",
    "empirical_square_cyclic_fraction",
    "empirical_cl_distribution",
    "rank_survey",
    "predicted_table",
    "exponent_fit",
]

_LN3 = math.log(3)

MIN_HEIGHT = 100


# ---------------------------------------------------------------------------
# the curve family


def curve_height(a4: int, a6: int) -> int:
    return max(abs(4 * a4 * a4 * a4), 27 * a6 * a6)


_prime_cache: list = []
_prime_cache_limit = 0


def _prime_powers_up_to(bound: int):
    """(p, p^4, p^6) for primes p <= bound, cached and grown on demand."""
    global _prime_cache, _prime_cache_limit
    if bound > _prime_cache_limit:
        limit = max(2 * bound, 64)
        _prime_cache = [(p, p**4, p**6) for p in primes_up_to(limit)]
        _prime_cache_limit = limit
    return _prime_cache


def is_valid_curve(a4: int, a6: int) -> bool:
    """Nonsingular and minimal: 4*a4^3 + 27*a6^2 != 0 and no prime p has
    p^4 | a4 and p^6 | a6.

    Only primes with p^4 <= |a4| can violate minimality (p^6 <= |a6|
    when a4 = 0, since p^4 | 0 always holds), so trial division over a
    short cached prime list suffices.
    """
    if 4 * a4 * a4 * a4 + 27 * a6 * a6 == 0:
        return False
    bound = iroot(abs(a4), 4) if a4 else iroot(abs(a6), 6)
    if bound < 2:
        return True
    for p, p4, p6 in _prime_powers_up_to(bound):
        if p > bound:
            break
        if a4 % p4 == 0 and a6 % p6 == 0:
            return False
    return True


@dataclass(frozen=True)
class CurveParams:
    a4: int
    a6: int

    def __post_init__(self):
        if not is_valid_curve(self.a4, self.a6):
            raise ValueError(
                f"({self.a4}, {self.a6}) is singular or non-minimal"
            )

    @property
    def height(self) -> int:
        return curve_height(self.a4, self.a6)


def _coefficient_box(height_cap: int):
    # |4*a4^3| <= H and 27*a6^2 <= H hold everywhere inside this box
    return iroot(height_cap // 4, 3), math.isqrt(height_cap // 27)


def count_curves_exact(height_cap: int, cap: int = 10**8) -> int:
    """Exhaustive count of valid coefficient pairs with height <= height_cap.

    Grows like 0.4845 * height_cap^(5/6) for large caps.
    """
    if height_cap < 0:
        return 0
    a_max, b_max = _coefficient_box(height_cap)
    cells = (2 * a_max + 1) * (2 * b_max + 1)
    if cells > cap:
        raise CapExceededError(f"{cells} coefficient pairs exceed cap {cap}")
    total = 0
    for a4 in range(-a_max, a_max + 1):
        for a6 in range(-b_max, b_max + 1):
            if is_valid_curve(a4, a6):
                total += 1
    return total


@lru_cache(maxsize=None)
def _band_nonempty(height_cap: int) -> bool:
    # Achievable heights are spaced like 12*a4^2 and 54*a6, so small caps
    # can have an empty (cap/2, cap] band; above 1e4 the (0, a6) ladder
    # alone always lands in the band.
    if height_cap >= 10_000:
        return True
    a_max, b_max = _coefficient_box(height_cap)
    return any(
        2 * curve_height(a4, a6) > height_cap and is_valid_curve(a4, a6)
        for a4 in range(-a_max, a_max + 1)
        for a6 in range(-b_max, b_max + 1)
    )


def sample_curve_in_band(height_cap: int, rng: Random) -> CurveParams:
    """Uniform over valid curves with height in (height_cap/2, height_cap].

    Rejection from the coefficient box; the band condition is the exact
    integer test 2*height > height_cap.
    """
    if height_cap < MIN_HEIGHT:
        raise ValueError(f"band top must be at least {MIN_HEIGHT}")
    if not _band_nonempty(height_cap):
        raise ValueError(
            f"no valid curve has height in ({height_cap}/2, {height_cap}]"
        )
    a_max, b_max = _coefficient_box(height_cap)
    while True:
        a4 = rng.randint(-a_max, a_max)
        a6 = rng.randint(-b_max, b_max)
        if 2 * curve_height(a4, a6) > height_cap and is_valid_curve(a4, a6):
            return CurveParams(a4, a6)


# ---------------------------------------------------------------------------
# configuration and the (eta, x) schedule


@dataclass(frozen=True)
class ModelConfig:
    """Knobs of the sampler.

    eta_schedule "log3" sets eta = max(eta_floor, floor of the base-3 log
    of height**calibration_exponent); "constant" pins eta = eta_floor.
    The entry bound is then x = max(x_min, ceil(height**(ce/eta))), both
    computed in exact integer arithmetic, so that x**eta tracks
    height**ce up to a bounded factor.  With the defaults the ratio
    x**eta / height**(1/12) stays inside [1, 16] for heights between
    1e4 and 1e30.
    """

    eta_schedule: str = "log3"
    eta_floor: int = 2
    x_min: int = 2
    calibration_exponent: Fraction = Fraction(1, 12)
    seed: int = 12345
    samples_per_point: int = 10_000
    chunk: int = CHUNK

    def __post_init__(self):
        ce = self.calibration_exponent
        if isinstance(ce, float):
            raise TypeError(
                "calibration_exponent must be exact; pass a Fraction or a "
                "string like '1/12'"
            )
        if not isinstance(ce, Fraction):
            object.__setattr__(self, "calibration_exponent", Fraction(ce))
        if self.calibration_exponent <= 0:
            raise ValueError("calibration_exponent must be positive")
        if self.eta_schedule not in ("log3", "constant"):
            raise ValueError(f"unknown eta schedule {self.eta_schedule!r}")
        if self.eta_floor < 1:
            raise ValueError("eta_floor must be at least 1")
        if self.x_min < 2:
            raise ValueError("x_min must be at least 2")
        if self.samples_per_point < 1 or self.chunk < 1:
            raise ValueError("samples_per_point and chunk must be positive")


class ModelParams(NamedTuple):
    eta: int
    n: int
    x: int


def schedule_eta(height: int, cfg: ModelConfig) -> int:
    if cfg.eta_schedule == "constant":
        return cfg.eta_floor
    num = cfg.calibration_exponent.numerator
    den = cfg.calibration_exponent.denominator
    target = height**num
    # largest v with 3^(v*den) <= height^num; float guess, exact polish
    v = max(0, int(num * math.log(height) / (den * _LN3)))
    while 3 ** ((v + 1) * den) <= target:
        v += 1
    while v > 0 and 3 ** (v * den) > target:
        v -= 1
    return max(cfg.eta_floor, v)


def schedule_x(height: int, eta: int, cfg: ModelConfig) -> int:
    """Exact ceil(height**(ce/eta)), clamped below by x_min."""
    num = cfg.calibration_exponent.numerator
    den = cfg.calibration_exponent.denominator * eta
    target = height**num
    r = iroot(target, den)
    if r**den != target:
        r += 1
    return max(cfg.x_min, r)


def model_params(height: int, cfg: ModelConfig, rng: Random) -> ModelParams:
    """Matrix size (uniform on {eta, eta+1}) and entry bound for one draw."""
    if height < MIN_HEIGHT:
        raise ValueError(f"height must be at least {MIN_HEIGHT}")
    eta = schedule_eta(height, cfg)
    return ModelParams(eta, eta + rng.randrange(2), schedule_x(height, eta, cfg))


def sample_alternating(n: int, x: int, rng: Random) -> AlternatingMatrix:
    """Entries above the diagonal independent uniform on {-x, ..., x}."""
    span = 2 * x + 1
    return AlternatingMatrix(
        n, tuple(rng.randrange(span) - x for _ in range(n * (n - 1) // 2))
    )


# ---------------------------------------------------------------------------
# single draws


@dataclass(frozen=True)
class ModelDraw:
    height: int
    n: int
    x: int
    rk_prime: int
    sha_label: str
    sha_order: int


def torsion_label(torsion) -> str:
    """Canonical bracket form of an invariant-factor chain, e.g. "[2,2]"."""
    return "[" + ",".join(str(d) for d in torsion) + "]"


def is_square_of_cyclic(torsion) -> bool:
    # invariant factors arrive paired, so 0 or 1 pair means C_d x C_d
    return len(torsion) == 0 or (
        len(torsion) == 2 and torsion[0] == torsion[1]
    )


def draw_model(height: int, cfg: ModelConfig, rng: Random) -> ModelDraw:
    """One model draw: corank plays the rank, cokernel torsion plays Sha."""
    params = model_params(height, cfg, rng)
    structure = cokernel(sample_alternating(params.n, params.x, rng))
    return ModelDraw(
        height=height,
        n=params.n,
        x=params.x,
        rk_prime=structure.free_rank,
        sha_label=torsion_label(structure.torsion),
        sha_order=structure.torsion_order,
    )


# ---------------------------------------------------------------------------
# empirical distributions


@dataclass(frozen=True)
class EmpiricalDistribution:
    counts: dict
    total: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if any(c < 0 for c in self.counts.values()):
            raise ValueError("negative count")
        if sum(self.counts.values()) != self.total:
            raise ValueError("counts do not sum to total")

    def frequency(self, key) -> float:
        return self.counts.get(key, 0) / self.total


def empirical_corank_prob(
    n: int,
    x: int,
    r: int,
    mode: str = "exact",
    samples: int = 0,
    rng: Optional[Random] = None,
) -> Estimate:
    """Prob(corank >= r) for uniform alternating n x n, |entries| <= x.

    Exact mode enumerates the whole box (subject to the enumeration
    cap); monte_carlo mode samples and reports a binomial error bar.
    """
    if r <= 0:
        return Estimate(1.0, 0.0)
    if mode == "exact":
        hist = count_alternating_by_rank(n, x, norm="box")
        return Estimate(hist.at_most(n - r) / hist.total, 0.0)
    if mode != "monte_carlo":
        raise ValueError(f"unknown mode {mode!r}")
    if samples < 1 or rng is None:
        raise ValueError("monte_carlo mode needs samples and rng")
    hits = 0
    for _ in range(samples):
        if kernel_rank(sample_alternating(n, x, rng)) >= r:
            hits += 1
    p = hits / samples
    return Estimate(p, math.sqrt(p * (1 - p) / samples))


def _p_valuation(d: int, p: int) -> int:
    v = 0
    while d % p == 0:
        d //= p
        v += 1
    return v


def _certified_p_exponents(
    a: AlternatingMatrix, p: int, corank: int, start_prec: int = 8
):
    """Invariant-factor p-valuations through the bounded-precision route.

    Certification: runs at prec and prec+2 must agree, show exactly
    `corank` vanished diagonals, and stay at or below prec-2; otherwise
    precision is raised.  Falls back to the exact Smith form if 64 bits
    of precision were not enough (essentially never at sane entry
    sizes).
    """
    base = [list(row) for row in a.to_integer_matrix().to_rows()]
    prec = start_prec
    while prec <= 64:
        va = diag_valuations_mod([row[:] for row in base], a.n, p, prec)
        vb = diag_valuations_mod([row[:] for row in base], a.n, p, prec + 2)
        finite = [v for v in vb if v is not None]
        if (
            vb.count(None) == corank
            and va == vb
            and all(v <= prec - 2 for v in finite)
        ):
            return [v for v in finite if v > 0]
        prec += 2
    divisors = smith_divisors(a)
    return [_p_valuation(d, p) for d in divisors if d > 1]


def empirical_sha_distribution(
    n: int,
    x: int,
    r: int,
    p: int,
    samples: int,
    rng: Random,
    method: str = "exact",
) -> EmpiricalDistribution:
    """Distribution of the p-part label of the cokernel torsion among
    draws conditioned on corank exactly r.  `samples` counts accepted
    draws; rejected ones are discarded.

    method "exact" reads valuations off the integer Smith form; "mod"
    uses the certified bounded-precision path (same answers, faster for
    large entries).
    """
    if r not in (0, 1):
        raise ValueError("conditioned corank must be 0 or 1")
    if n % 2 != r % 2:
        raise ValueError("corank r requires n = r (mod 2)")
    if samples < 1:
        raise ValueError("need at least one sample")
    if method not in ("exact", "mod"):
        raise ValueError(f"unknown method {method!r}")
    counts: Counter = Counter()
    drawn = 0
    kept = 0
    while kept < samples:
        a = sample_alternating(n, x, rng)
        drawn += 1
        if method == "exact":
            divisors = smith_divisors(a)
            if n - sum(1 for d in divisors if d) != r:
                continue
            exponents = [_p_valuation(d, p) for d in divisors if d > 1]
        else:
            if kernel_rank(a) != r:
                continue
            exponents = _certified_p_exponents(a, p, r)
        kept += 1
        counts[group_label(AbelianPGroup.from_valuations(p, exponents))] += 1
    return EmpiricalDistribution(
        dict(sorted(counts.items())),
        samples,
        meta={"n": n, "x": x, "r": r, "p": p, "draws": drawn, "method": method},
    )


def empirical_square_cyclic_fraction(
    n: int, x: int, samples: int, rng: Random
) -> Estimate:
    """Fraction of corank-0 draws whose full torsion (all primes, exact
    Smith form) is the square of a cyclic group."""
    if n % 2:
        raise ValueError("corank 0 requires even n")
    if samples < 1:
        raise ValueError("need at least one sample")
    hits = 0
    kept = 0
    while kept < samples:
        structure = cokernel(sample_alternating(n, x, rng))
        if structure.free_rank != 0:
            continue
        kept += 1
        if is_square_of_cyclic(structure.torsion):
            hits += 1
    p_hat = hits / samples
    return Estimate(p_hat, math.sqrt(p_hat * (1 - p_hat) / samples))


def empirical_cl_distribution(
    n: int, p: int, k: int, samples: int, rng: Random
) -> EmpiricalDistribution:
    """p-part labels of cokernels of uniform square matrices mod p**k.

    Entries are only known to k p-adic digits, so each draw is certified:
    eliminations at prec and prec+2 must agree with no vanished diagonal
    and all valuations at most prec-2.  An uncertified draw gets two more
    uniform digits appended to every entry (which refines the same
    p-adic law) and is retried at higher precision.
    """
    if k < 5:
        raise ValueError("precision k must be at least 5")
    if samples < 1:
        raise ValueError("need at least one sample")
    counts: Counter = Counter()
    refinement_rounds = 0
    q0 = p**k
    for _ in range(samples):
        entries = [[rng.randrange(q0) for _ in range(n)] for _ in range(n)]
        prec = k
        while True:
            step = p**prec
            for row in entries:
                for j in range(n):
                    row[j] += step * rng.randrange(p * p)
            va = diag_valuations_mod([row[:] for row in entries], n, p, prec)
            vb = diag_valuations_mod(
                [row[:] for row in entries], n, p, prec + 2
            )
            if (
                None not in vb
                and va == vb
                and all(v <= prec - 2 for v in vb)
            ):
                break
            refinement_rounds += 1
            prec += 2
            if prec > k + 24:
                raise RuntimeError(
                    "cokernel structure failed to stabilize; this has "
                    "probability around p**-24 and suggests a broken rng"
                )
        counts[group_label(AbelianPGroup.from_valuations(p, vb))] += 1
    return EmpiricalDistribution(
        dict(sorted(counts.items())),
        samples,
        meta={
            "n": n,
            "p": p,
            "k": k,
            "refinement_rounds": refinement_rounds,
        },
    )


# ---------------------------------------------------------------------------
# the height survey


class SurveyRecord(NamedTuple):
    h_lo: int
    h_hi: int
    r: int
    curves_sampled: int
    hits: int
    estimated_probability: float
    standard_error: float


MAX_SURVEY_RANK = 5


def _survey_chunk(spec):
    """Count draws with corank >= r (r = 1..5) over one seeded chunk.

    Each sampled curve contributes one model draw at its own height.
    Module level so process pools can pickle it.
    """
    height_cap, band_index, chunk_index, size, cfg = spec
    rng = Random(chunk_seed(cfg.seed, f"survey:{band_index}", chunk_index))
    a_max, b_max = _coefficient_box(height_cap)
    hits = [0] * (MAX_SURVEY_RANK + 1)
    for _ in range(size):
        while True:
            a4 = rng.randint(-a_max, a_max)
            a6 = rng.randint(-b_max, b_max)
            h = curve_height(a4, a6)
            if 2 * h > height_cap and is_valid_curve(a4, a6):
                break
        eta = schedule_eta(h, cfg)
        n = eta + rng.randrange(2)
        x = schedule_x(h, eta, cfg)
        corank = kernel_rank(sample_alternating(n, x, rng))
        for r in range(1, min(corank, MAX_SURVEY_RANK) + 1):
            hits[r] += 1
    return hits


def rank_survey(h_grid, curves_per_band: int, cfg: ModelConfig, threads: int = 1):
    """Estimated Prob(corank >= r), r = 1..5, per height band, plus
    log-log slope fits across the grid for every r with enough signal.

    Returns (records, fits) where fits maps r to a FitResult.  Chunk
    seeds derive from (cfg.seed, band, chunk), so results do not depend
    on the thread count.
    """
    h_grid = list(h_grid)
    if len(h_grid) < 3:
        raise ValueError("need at least 3 grid heights")
    if any(b <= a for a, b in zip(h_grid, h_grid[1:])):
        raise ValueError("grid heights must increase")
    if any(h < MIN_HEIGHT for h in h_grid):
        raise ValueError(f"grid heights must be at least {MIN_HEIGHT}")
    if not all(_band_nonempty(h) for h in h_grid):
        raise ValueError("some grid band contains no valid curve")
    if curves_per_band < 1:
        raise ValueError("need at least one curve per band")
    specs = []
    for band_index, h in enumerate(h_grid):
        for chunk_index, size in enumerate(
            chunk_sizes(curves_per_band, cfg.chunk)
        ):
            specs.append((h, band_index, chunk_index, size, cfg))
    partials = map_chunks(_survey_chunk, specs, threads)
    per_band = [[0] * (MAX_SURVEY_RANK + 1) for _ in h_grid]
    for spec, part in zip(specs, partials):
        acc = per_band[spec[1]]
        for r in range(1, MAX_SURVEY_RANK + 1):
            acc[r] += part[r]
    records = []
    for band_index, h in enumerate(h_grid):
        for r in range(1, MAX_SURVEY_RANK + 1):
            hits = per_band[band_index][r]
            p_hat = hits / curves_per_band
            records.append(
                SurveyRecord(
                    h_lo=h // 2,
                    h_hi=h,
                    r=r,
                    curves_sampled=curves_per_band,
                    hits=hits,
                    estimated_probability=p_hat,
                    standard_error=math.sqrt(
                        p_hat * (1 - p_hat) / curves_per_band
                    ),
                )
            )
    fits = {}
    for r in range(1, MAX_SURVEY_RANK + 1):
        points = [
            (rec.h_hi, rec.estimated_probability)
            for rec in records
            if rec.r == r and rec.estimated_probability > 0
        ]
        if len(points) >= 3:
            fits[r] = exponent_fit(points)
    return records, fits


def predicted_table(h_list):
    """Closed-form long-run percentages per height: rank 0, rank 1,
    rank >= 2 even, rank >= 3 odd.  Columns 1+3 and 2+4 each sum to 50.
    """
    rows = []
    for h in h_list:
        if h <= 1:
            raise ValueError("heights must exceed 1")
        u = math.exp(-math.log(h) / 24)
        v = u * u
        rows.append((h, 50 * (1 - u), 50 * (1 - v), 50 * u, 50 * v))
    return rows
