"""Fractional integrals, truncated singular integrals and kernel checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy import integrate as spi

from . import kernels
from .grid import GridFunction
from .mixed_norms import AdmissibilityError, ExponentVector, inv, parse_exponent
from .reports import VerificationReport

__all__ = [
    "AdamsExponents",
    "adams_exponents",
    "KernelDescriptor",
    "hilbert_kernel",
    "riesz_kernel",
    "fractional_kernel_as_cz",
    "self_cell_integral",
    "fractional_integral",
    "singular_integral",
    "kernel_condition_check",
]


@dataclass(frozen=True)
class AdamsExponents:
    """Target exponents ``(r, s)``; iterates as the pair."""

    r: float
    s: ExponentVector
    metadata: dict = field(default_factory=dict, compare=False)

    def __iter__(self):
        return iter((self.r, self.s))


def adams_exponents(p, alpha: float, qvec, n: int) -> AdamsExponents:
    """``1/r = 1/p - alpha/n`` and ``s = (r/p) q``."""
    p = parse_exponent(p)
    qvec = ExponentVector.of(qvec, n)
    if not 0 < alpha < n:
        raise AdmissibilityError(f"need 0 < alpha < n, got alpha={alpha}, n={n}")
    inv_r = inv(p) - alpha / n
    if not inv_r > 0:
        raise AdmissibilityError(f"1/p - alpha/n = {inv_r:.6g} must be positive")
    if qvec.inverse_sum < n * inv(p) - 1e-12:
        raise AdmissibilityError("source exponents violate sum 1/q_j >= n/p")
    r = 1.0 / inv_r
    s = qvec * (r / p) if math.isfinite(p) else qvec
    meta = {"inverse_sum_s": s.inverse_sum, "n_over_r": n / r,
            "admissible": s.inverse_sum >= n / r - 1e-12}
    return AdamsExponents(r, s, meta)


# {{{ kernels


@dataclass(frozen=True)
class KernelDescriptor:
    """Integral kernel description.

    ``kind="fractional"`` is ``|x-y|^(alpha-n)``.  ``kind="cz"`` is a
    Calderon-Zygmund kernel: either a built-in ``name`` (``"hilbert"``,
    ``"riesz"``) or a user ``evaluator(x, y)`` acting on ``(..., n)`` arrays.
    ``size_constant`` bounds ``|k(x,y)| |x-y|^n``; ``smoothness_constant``
    bounds the Holder-type difference with exponent ``epsilon``.
    """

    kind: str
    dim: int = 1
    alpha: float | None = None
    name: str | None = None
    axis: int = 1
    evaluator: Callable | None = field(default=None, compare=False)
    size_constant: float = 1.0
    smoothness_constant: float | None = None
    epsilon: float = 1.0
    delta: float | None = None

    def __post_init__(self):
        if self.kind == "fractional":
            if self.alpha is None or not 0 < self.alpha < self.dim:
                raise AdmissibilityError(f"fractional kernel needs 0 < alpha < n, got {self.alpha}")
        elif self.kind == "cz":
            if self.name is None and self.evaluator is None:
                raise ValueError("cz kernel needs a built-in name or an evaluator")
            if self.name not in (None, "hilbert", "riesz"):
                raise ValueError(f"unknown built-in kernel {self.name!r}")
            if not (self.size_constant > 0 and self.epsilon > 0):
                raise ValueError("kernel constants must be positive")
            if self.epsilon > 1:
                raise ValueError("smoothness exponent must lie in (0, 1]")
            if self.delta is not None and not self.delta > 0:
                raise ValueError("truncation radius must be positive")
        else:
            raise ValueError(f"unknown kernel kind {self.kind!r}")

    @property
    def smooth_c(self) -> float:
        return self.size_constant if self.smoothness_constant is None else self.smoothness_constant

    def __call__(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        d = x - y
        r = np.linalg.norm(d, axis=-1)
        with np.errstate(divide="ignore", invalid="ignore"):
            if self.kind == "fractional":
                return r ** (self.alpha - self.dim)
            if self.name == "hilbert":
                return 1.0 / (math.pi * d[..., 0])
            if self.name == "riesz":
                return d[..., self.axis - 1] / r ** (self.dim + 1)
        return np.asarray(self.evaluator(x, y), dtype=float)

    def translation_invariant(self) -> bool:
        return self.kind == "fractional" or self.name is not None

    def with_delta(self, delta: float) -> "KernelDescriptor":
        return KernelDescriptor(self.kind, self.dim, self.alpha, self.name, self.axis, self.evaluator,
                                self.size_constant, self.smoothness_constant, self.epsilon, delta)

    def to_json(self) -> dict:
        if self.evaluator is not None and self.name is None:
            kind = {"kind": "cz", "evaluator": "user"}
        else:
            kind = {"kind": self.kind, "name": self.name}
        kind.update({"dim": self.dim, "alpha": self.alpha, "axis": self.axis,
                     "size_constant": self.size_constant,
                     "smoothness_constant": self.smooth_c, "epsilon": self.epsilon,
                     "delta": self.delta})
        return kind

    @classmethod
    def from_json(cls, d: dict) -> "KernelDescriptor":
        kind = d.get("kind", "cz")
        if kind == "fractional":
            return cls("fractional", int(d.get("dim", 1)), alpha=float(d["alpha"]))
        name = d.get("name", "hilbert")
        delta = d.get("delta")
        if name == "hilbert":
            return hilbert_kernel(delta)
        if name == "riesz":
            return riesz_kernel(int(d.get("axis", 1)), int(d.get("dim", 2)), delta)
        raise ValueError(f"kernel {name!r} cannot be built from JSON")


def hilbert_kernel(delta: float | None = None) -> KernelDescriptor:
    """``1/(pi (x - y))``; with ``|x-y| >= 2|x-z|`` the two differences add up to at most
    ``4/pi |x-z| / |x-y|^2``."""
    return KernelDescriptor("cz", 1, name="hilbert", size_constant=1 / math.pi,
                            smoothness_constant=4 / math.pi, epsilon=1.0, delta=delta)


def riesz_kernel(axis: int = 1, dim: int = 2, delta: float | None = None) -> KernelDescriptor:
    """``(x_j - y_j) / |x - y|^(n+1)``."""
    if not 1 <= axis <= dim:
        raise ValueError("Riesz axis out of range")
    # gradient of x_j/|x|^(n+1) has norm <= (n+2)/|x|^(n+1); on the segment
    # from x to z the distance to y is at least |x-y|/2
    smooth = 2 * (dim + 2) * 2.0 ** (dim + 1)
    return KernelDescriptor("cz", dim, name="riesz", axis=axis, size_constant=1.0,
                            smoothness_constant=smooth, epsilon=1.0, delta=delta)


def fractional_kernel_as_cz(dim: int = 1, alpha: float | None = None) -> KernelDescriptor:
    """``|x-y|^(alpha-n)`` wrapped as a would-be CZ kernel, for negative checks."""
    alpha = 1.0 if alpha is None else alpha
    return KernelDescriptor("cz", dim, evaluator=lambda x, y: np.linalg.norm(
        np.asarray(x) - np.asarray(y), axis=-1) ** (alpha - dim), size_constant=1.0)


# }}}


# {{{ fractional integral


@lru_cache(maxsize=64)
def self_cell_integral(alpha: float, half_widths: tuple[float, ...]) -> float:
    """``int |z|^(alpha-n) dz`` over the box ``prod [-a_j, a_j]``.

    1D is closed form; 2D and 3D integrate the radial antiderivative
    ``rho(omega)^alpha / alpha`` over directions, with ``rho`` the distance
    to the box boundary.
    """
    n = len(half_widths)
    if n == 1:
        return 2.0 * half_widths[0] ** alpha / alpha
    if n == 2:
        a, b = half_widths
        th = math.atan2(b, a)
        i1, _ = spi.quad(lambda t: (a / math.cos(t)) ** alpha / alpha, 0.0, th, epsabs=0, epsrel=1e-13)
        i2, _ = spi.quad(lambda t: (b / math.sin(t)) ** alpha / alpha, th, math.pi / 2, epsabs=0,
                         epsrel=1e-13)
        return 4.0 * (i1 + i2)
    if n == 3:
        a, b, c = half_widths

        def radial(phi, theta):
            w = (math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta))
            rho = min(a / w[0] if w[0] > 0 else math.inf, b / w[1] if w[1] > 0 else math.inf,
                      c / w[2] if w[2] > 0 else math.inf)
            return rho**alpha / alpha * math.sin(theta)

        val, _ = spi.dblquad(radial, 0.0, math.pi / 2, 0.0, math.pi / 2, epsabs=0, epsrel=1e-10)
        return 8.0 * val
    raise ValueError("exact self-cell integral is implemented for n <= 3")


def _offsets(f: GridFunction) -> list[np.ndarray]:
    return [np.arange(-(N - 1), N) * h for N, h in zip(f.shape, f.grid.spacing)]


def _distance_table(f: GridFunction) -> np.ndarray:
    axes = _offsets(f)
    d2 = np.zeros([len(a) for a in axes])
    for j, a in enumerate(axes):
        d2 = d2 + (a**2).reshape([-1 if i == j else 1 for i in range(f.dim)])
    return np.sqrt(d2)


def fractional_integral(f: GridFunction, alpha: float, *, quadrature: str = "midpoint",
                        radius: float | None = None, part: str = "full") -> GridFunction:
    """``I_alpha f(x) = int f(y) |x-y|^(alpha-n) dy`` at every cell center.

    ``quadrature="midpoint"`` uses the kernel at cell centers for distinct
    cells and the exact kernel integral over the cell for the self cell.
    ``quadrature="cell-exact"`` (1D only) integrates the kernel exactly over
    each source cell, which is exact for piecewise constant ``f``.

    ``part`` restricts to centers with ``|x-y| <= radius`` (``"near"``) or
    ``> radius`` (``"far"``).
    """
    n = f.dim
    if not 0 < alpha < n:
        raise AdmissibilityError(f"need 0 < alpha < n, got alpha={alpha}, n={n}")
    if part not in ("full", "near", "far"):
        raise ValueError(f"unknown part {part!r}")
    if part != "full" and not (radius and radius > 0):
        raise ValueError("near/far parts need a positive radius")
    dist = _distance_table(f)
    center = tuple(N - 1 for N in f.shape)
    vol = f.grid.cell_volume
    if quadrature == "midpoint":
        with np.errstate(divide="ignore"):
            table = np.where(dist > 0, dist ** (alpha - n), 0.0) * vol
        table[center] = self_cell_integral(float(alpha), tuple(h / 2 for h in f.grid.spacing))
    elif quadrature == "cell-exact":
        if n != 1:
            raise ValueError("cell-exact quadrature is implemented in 1D only")
        h = f.grid.spacing[0]
        far = dist + h / 2
        near = np.abs(dist - h / 2)
        table = (far**alpha - near**alpha) / alpha
        table[center] = 2.0 * (h / 2) ** alpha / alpha
    else:
        raise ValueError(f"unknown quadrature {quadrature!r}")
    if part == "near":
        table = np.where(dist <= radius, table, 0.0)
    elif part == "far":
        table = np.where(dist > radius, table, 0.0)
    out = kernels.offset_convolve(f.values, table)
    return f.with_values(out, op="I_alpha", alpha=alpha, quadrature=quadrature, part=part)


# }}}


# {{{ singular integrals


def _check_delta(f: GridFunction, kernel: KernelDescriptor) -> float:
    diag = math.sqrt(sum(h * h for h in f.grid.spacing))
    delta = kernel.delta if kernel.delta is not None else diag
    if delta < diag * (1 - 1e-12):
        raise ValueError(f"truncation radius {delta} is below the cell diagonal {diag}")
    return delta


def singular_integral(f: GridFunction, kernel: KernelDescriptor,
                      check_samples: int = 2000) -> GridFunction:
    """Truncated operator ``T_delta f(x) = sum_{|x-y| > delta} k(x,y) f(y) |cell|``.

    The truncation is applied at every cell, on and off the support of ``f``.
    ``kernel.delta`` defaults to the cell diagonal.  User kernels are run
    through :func:`kernel_condition_check` first and rejected if they fail.
    """
    if kernel.kind != "cz":
        raise ValueError("singular_integral needs a cz kernel")
    if kernel.dim != f.dim:
        raise ValueError(f"kernel dimension {kernel.dim} != grid dimension {f.dim}")
    delta = _check_delta(f, kernel)
    vol = f.grid.cell_volume
    if kernel.translation_invariant():
        axes = _offsets(f)
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
        dist = _distance_table(f)
        with np.errstate(divide="ignore", invalid="ignore"):
            vals = kernel(pts, np.zeros(f.dim))
        table = np.where(dist > delta, vals, 0.0) * vol
        out = kernels.offset_convolve(f.values, table)
    else:
        rep = kernel_condition_check(kernel, {"count": check_samples})
        if not rep.passed:
            raise ValueError(f"kernel fails the size/smoothness check: {rep.summary_line()}")
        centers = f.grid.centers().reshape(-1, f.dim)
        fv = f.values.ravel()
        out = np.zeros(len(centers))
        for i, x in enumerate(centers):
            r = np.linalg.norm(centers - x, axis=-1)
            mask = r > delta
            out[i] = np.sum(kernel(np.broadcast_to(x, centers[mask].shape), centers[mask])
                            * fv[mask]) * vol
        out = out.reshape(f.shape)
    return f.with_values(out, op="T_delta", delta=delta)


def _sample_triples(dim: int, count: int, seed: int, rmin: float, rmax: float):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=(count, dim))
    u = rng.standard_normal((count, dim))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    dist = np.exp(rng.uniform(math.log(rmin), math.log(rmax), size=count))
    y = x + u[:] * dist[:, None]
    v = rng.standard_normal((count, dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    frac = rng.uniform(0.0, 0.5, size=count)
    frac[: max(1, count // 10)] = 0.5  # include the extreme |x-y| = 2|x-z|
    z = x + v * (frac * dist)[:, None]
    return x, y, z


def kernel_condition_check(kernel: KernelDescriptor, sample_spec: dict | None = None,
                           tol: float = 1e-9) -> VerificationReport:
    """Sampled size and smoothness ratios over triples with ``|x-y| >= 2|x-z|``.

    Reports ``sup |k(x,y)| |x-y|^n`` and
    ``sup (|k(x,y)-k(z,y)| + |k(y,x)-k(y,z)|) |x-y|^(n+eps) / |x-z|^eps``;
    the check passes iff both stay within the declared constants.
    """
    spec = {"count": 4000, "seed": 0, "rmin": 1e-2, "rmax": 1e2}
    spec.update(sample_spec or {})
    n = kernel.dim
    x, y, z = _sample_triples(n, int(spec["count"]), int(spec["seed"]),
                              float(spec["rmin"]), float(spec["rmax"]))
    rxy = np.linalg.norm(x - y, axis=1)
    rxz = np.linalg.norm(x - z, axis=1)
    keep = rxz > 0
    size = np.abs(kernel(x, y)) * rxy**n
    diff = np.abs(kernel(x, y) - kernel(z, y)) + np.abs(kernel(y, x) - kernel(y, z))
    eps = kernel.epsilon
    smooth = np.where(keep, diff * rxy ** (n + eps) / np.where(keep, rxz, 1.0) ** eps, 0.0)
    size_sup = float(np.max(size))
    smooth_sup = float(np.max(smooth))
    ok_size = size_sup <= kernel.size_constant * (1 + tol)
    ok_smooth = smooth_sup <= kernel.smooth_c * (1 + tol)
    rows = [
        {"condition": "size", "sup_ratio": size_sup, "constant": kernel.size_constant,
         "normalized": size_sup / kernel.size_constant, "passed": ok_size},
        {"condition": "smoothness", "sup_ratio": smooth_sup, "constant": kernel.smooth_c,
         "normalized": smooth_sup / kernel.smooth_c, "passed": ok_smooth},
    ]
    return VerificationReport(
        "kernel_condition_check", params={"kernel": kernel.to_json(), "samples": spec},
        rows=rows, sup_ratio=max(size_sup / kernel.size_constant, smooth_sup / kernel.smooth_c),
        tolerance=tol, passed=bool(ok_size and ok_smooth),
        criterion="both sampled sup ratios <= declared constant * (1 + tol)")


# }}}
