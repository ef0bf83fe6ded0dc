"""Best approximation E_m(f)_X by trigonometric polynomials of order <= m-1.

All solvers work on the grid discretisation of the norm. X = L_2 has a
closed form for spectral input; 1 < s < inf uses damped Newton on the
smooth convex objective; s = 1 uses reweighted least squares with a
smoothing homotopy and reports a duality gap; X = C uses a multiple
exchange (Remez) iteration, optionally polished against an exact evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy import optimize

from .trig_core import NormIndex, SampledFunction, TrigPolynomial, norm, partial_sum, sup_norm


# Newton weights |r|^(s-2) blow up at zero residuals when s < 2.
RESIDUAL_FLOOR = 1e-10


class ConvergenceError(RuntimeError):
    """A solver exhausted its iteration budget without meeting its certificate."""


@dataclass(frozen=True, eq=False)
class ApproxResult:
    E: float
    minimizer: TrigPolynomial
    certificate: Dict[str, Any] = field(default_factory=dict)


def trig_basis(x: np.ndarray, m: int) -> np.ndarray:
    """Columns 1/2, cos kx, sin kx (k = 1..m-1) so coefficients map straight onto a_0, a_k, b_k."""
    x = np.asarray(x, dtype=float)
    k = np.arange(1, m)
    kx = np.multiply.outer(x, k)
    return np.column_stack([np.full(x.shape, 0.5), np.cos(kx), np.sin(kx)])


def _coeffs_to_poly(c: np.ndarray, m: int) -> TrigPolynomial:
    return TrigPolynomial(c[:m], c[m:])


def best_approx_L2(f: TrigPolynomial, m: int) -> ApproxResult:
    """Orthogonal projection: the minimiser is S_{m-1}(f)."""
    if m < 1:
        raise ValueError("m must be >= 1")
    tail_a = f.a[m:]
    tail_b = f.b[m - 1 :]
    E = math.sqrt(math.pi * (math.fsum(tail_a**2) + math.fsum(tail_b**2)))
    return ApproxResult(E, partial_sum(f, m - 1), {"method": "projection"})


def _prepare(f: SampledFunction, m: int):
    if m < 1:
        raise ValueError("m must be >= 1")
    if f.grid.M < 2 * m + 1:
        raise ValueError(f"grid too coarse: M={f.grid.M} for m={m}")
    A = trig_basis(f.grid.points, m)
    y = np.asarray(f.values, dtype=float)
    scale = float(np.max(np.abs(y)))
    return A, y, scale


def best_approx_Ls(
    f: SampledFunction,
    m: int,
    idx: NormIndex,
    gtol: float = 1e-10,
    max_iter: int = 200,
) -> ApproxResult:
    """Minimise the grid version of int |f - t|^s over t of order <= m-1, 1 <= s < inf.

    When ``f`` carries an evaluator with breakpoints, the reported E is the
    L_s norm of f - t* integrated piecewise with that evaluator (an upper
    bound for the true E); the grid value is kept as ``E_grid``.
    """
    if idx.is_inf:
        raise ValueError("use best_approx_C for s = infinity")
    s = idx.value
    A, y, scale = _prepare(f, m)
    if scale == 0.0:
        return ApproxResult(0.0, TrigPolynomial.zero(), {"method": "trivial"})
    y = y / scale
    h = f.grid.h
    c0 = np.linalg.lstsq(A, y, rcond=None)[0]
    if s == 2.0:
        c, cert = c0, {"method": "least-squares"}
        r = y - A @ c
        cert["grad_norm"] = float(np.max(np.abs(2.0 * h * (A.T @ r))))
        J = h * float(np.sum(r * r))
    else:
        c, J, cert = _ls_solve(A, y, h, s, c0, gtol, max_iter)
    E = scale * J ** (1.0 / s)
    poly = _coeffs_to_poly(scale * c, m)
    if getattr(f.evaluator, "breakpoints", None) is not None:
        # kinks limit the rectangle rule; integrate the residual piecewise instead
        resid = SampledFunction(f.grid, f.values - poly(f.grid.points), _Difference(f.evaluator, poly))
        cert["E_grid"] = E
        E = norm(resid, idx)
    return ApproxResult(E, poly, cert)


def _smoothed_newton(A, y, h, s, c, eps, max_iter):
    """Damped Newton on h * sum (r^2 + eps^2)^(s/2); eps = 0 gives the plain objective."""
    n = A.shape[1]
    e2 = eps * eps

    def objective(cc):
        r = y - A @ cc
        return h * float(np.sum((r * r + e2) ** (s / 2.0)))

    J = objective(c)
    gnorm = math.inf
    it = 0
    for it in range(max_iter):
        r = y - A @ c
        q = r * r + e2
        if eps > 0.0:
            g = -s * h * (A.T @ (r * q ** (s / 2.0 - 1.0)))
        else:
            g = -s * h * (A.T @ (np.sign(r) * np.abs(r) ** (s - 1.0)))
        gnorm = float(np.max(np.abs(g)))
        if gnorm <= 1e-15:
            break
        if eps > 0.0:
            wts = s * q ** (s / 2.0 - 2.0) * ((s - 1.0) * r * r + e2)
        else:
            wts = s * (s - 1.0) * np.maximum(np.abs(r), RESIDUAL_FLOOR) ** (s - 2.0)
        H = h * (A.T @ (wts[:, None] * A))
        H[np.diag_indices(n)] += 1e-15 * np.trace(H) / n
        d = np.linalg.solve(H, -g)
        slope = float(g @ d)
        if -slope <= 1e-24 * max(J, 1e-300):
            break
        t = 1.0
        while t > 1e-14:
            J_new = objective(c + t * d)
            if J_new <= J + 1e-4 * t * slope:
                break
            t *= 0.5
        else:
            break  # no decrease left at working precision
        c = c + t * d
        stalled = eps == 0.0 and J - J_new <= 1e-15 * J
        J = J_new
        if stalled:
            break
    return c, gnorm, it + 1


def _ls_solve(A, y, h, s, c, gtol, max_iter):
    """Minimise h * sum |y - Ac|^s; s < 1.5 goes through a smoothing homotopy in eps."""
    iters = 0
    dual = 0.0
    if s < 1.5:
        eps_path = [10.0**-k for k in range(2, 11)] if s == 1.0 else [10.0**-k for k in range(2, 13)]
        for eps in eps_path:
            c, _, k = _smoothed_newton(A, y, h, s, c, eps, max_iter)
            iters += k
        dual = _smoothed_dual(A, y, h, s, y - A @ c, eps_path[-1])
        if s == 1.0:
            c, dual = _l1_vertex(A, y, h, c, dual)
    gnorm = float("nan")
    c_best = c
    if s > 1.0:
        c, gnorm, k = _smoothed_newton(A, y, h, s, c, 0.0, max_iter)
        iters += k
        dual = max(dual, _ls_dual(A, y, h, s, y - A @ c))

    def value(cc):
        return h * float(np.sum(np.abs(y - A @ cc) ** s))

    if value(c_best) < value(c):
        c = c_best
    J = value(c)
    primal = J ** (1.0 / s)
    tol = 1e-8 if s < 1.2 else 1e-10
    # y is normalised to max |y| = 1, so a tiny primal means f already lies in the subspace
    ok = (primal - dual) <= tol * max(primal, 1e-300) or gnorm <= gtol or primal <= 1e-12
    gap = (primal - dual) / max(primal, 1e-300)
    if not ok:
        raise ConvergenceError(
            f"L_{s} solver stalled: gradient norm {gnorm:.3e}, relative duality gap {gap:.3e} after {iters} Newton steps"
        )
    cert = {"method": "newton" if s >= 1.5 else "smoothing-homotopy", "grad_norm": gnorm,
            "duality_gap": gap, "dual": dual, "iterations": iters, "converged": True}
    return c, J, cert


def _l1_vertex(A, y, h, c, dual):
    """Snap the smoothed L_1 solution to a vertex and recover an exact dual.

    A grid L_1 optimum interpolates y on d = dim points. Interpolating on the
    d smallest residuals gives a candidate; the dual u = sign r off that set,
    with the d free values solving A^T u = 0, certifies it when |u| <= 1.
    """
    d = A.shape[1]
    r = y - A @ c
    Z = np.argsort(np.abs(r))[:d]
    try:
        cv = np.linalg.solve(A[Z], y[Z])
    except np.linalg.LinAlgError:
        return c, dual
    if np.sum(np.abs(y - A @ cv)) <= np.sum(np.abs(r)):
        c = cv
    r = y - A @ c
    rest = np.ones(y.size, dtype=bool)
    rest[Z] = False
    u = np.sign(r)
    try:
        u[Z] = np.linalg.solve(A[Z].T, -(A[rest].T @ u[rest]))
    except np.linalg.LinAlgError:
        return c, dual
    u = u - A @ np.linalg.lstsq(A, u, rcond=None)[0]
    u = u / max(1.0, float(np.max(np.abs(u))))
    return c, max(dual, h * float(u @ y))


def _ls_dual(A, y, h, s, r):
    """Lower bound on min ||y - Ac||_s from u = |r|^{s-1} sign r made orthogonal to the basis.

    For A^T u = 0, h*u.y = h*u.(y - Ac) <= ||u||_{s'} ||y - Ac||_s for every c.
    """
    u = np.abs(r) ** (s - 1.0) * np.sign(r)
    u = u - A @ np.linalg.lstsq(A, u, rcond=None)[0]
    sc = s / (s - 1.0)
    un = (h * np.sum(np.abs(u) ** sc)) ** (1.0 / sc)
    if un == 0.0:
        return 0.0
    return h * float(u @ y) / un


def _smoothed_dual(A, y, h, s, r, eps):
    """Dual bound from the stationarity of the smoothed objective.

    u = r (r^2 + eps^2)^(s/2 - 1) is orthogonal to the basis at a stationary
    point; a least-squares projection removes the leftover. For s = 1 the
    box |u| <= 1 holds by construction, for s > 1 u is normalised in L_s'.
    """
    u = r * (r * r + eps * eps) ** (s / 2.0 - 1.0)
    u = u - A @ np.linalg.lstsq(A, u, rcond=None)[0]
    if s == 1.0:
        u = u / max(1.0, float(np.max(np.abs(u))))
        return h * float(u @ y)
    sc = s / (s - 1.0)
    un = (h * np.sum(np.abs(u) ** sc)) ** (1.0 / sc)
    return h * float(u @ y) / un if un > 0.0 else 0.0


def _exchange(e: np.ndarray, npts: int) -> Optional[np.ndarray]:
    """New reference: one extremum per cyclic sign run, trimmed to ``npts`` keeping alternation."""
    sg = np.where(e >= 0.0, 1, -1)
    change = np.nonzero(sg != np.roll(sg, 1))[0]
    if change.size < npts:
        return None
    ae = np.abs(e)
    M = e.size
    pts = []
    for i, start in enumerate(change):
        stop = change[i + 1] if i + 1 < change.size else change[0] + M
        run = np.arange(start, stop) % M
        pts.append(int(run[np.argmax(ae[run])]))
    pts = list(pts)
    while len(pts) > npts:
        vals = ae[pts]
        i = int(np.argmin(vals))
        R = len(pts)
        lo, hi = (i - 1) % R, (i + 1) % R
        j = lo if vals[lo] <= vals[hi] else hi
        for k in sorted((i, j), reverse=True):
            del pts[k]
    return np.sort(np.array(pts))


def _levelled(Aref: np.ndarray, yref: np.ndarray):
    k = Aref.shape[0]
    signs = (-1.0) ** np.arange(k)
    sol = np.linalg.solve(np.column_stack([Aref, signs]), yref)
    return sol[:-1], float(sol[-1])


def best_approx_C(
    f: SampledFunction,
    m: int,
    max_iter: int = 100,
    tol: float = 1e-13,
    polish: bool = True,
) -> ApproxResult:
    """Uniform best approximation by multiple exchange on the grid.

    With an exact evaluator attached the reference is then polished off-grid
    and E is the refined sup of the final error.
    """
    if f.grid.M < 32 * m:
        raise ValueError(f"grid too coarse for minimax: need M >= 32m = {32 * m}, got {f.grid.M}")
    A, y, scale = _prepare(f, m)
    if scale == 0.0:
        return ApproxResult(0.0, TrigPolynomial.zero(), {"method": "trivial"})
    y = y / scale
    M, npts = f.grid.M, 2 * m
    ref = (np.arange(npts) * M) // npts
    c, lev = np.linalg.lstsq(A, y, rcond=None)[0], 0.0
    converged = False
    it = 0
    for it in range(max_iter):
        c, lev = _levelled(A[ref], y[ref])
        e = y - A @ c
        emax = float(np.max(np.abs(e)))
        # y is normalised to max |y| = 1: an error at roundoff level means f is in the subspace
        if emax - abs(lev) <= tol * max(emax, 1e-300) or emax <= 1e-12:
            converged = True
            break
        new_ref = _exchange(e, npts)
        if new_ref is None:
            converged = emax <= 1e-14
            break
        if np.array_equal(new_ref, ref):
            converged = True
            break
        ref = new_ref
    if not converged:
        raise ConvergenceError(f"exchange did not converge in {max_iter} iterations")

    x = f.grid.points
    pts = x[ref]
    lower = abs(lev)
    if polish and f.evaluator is not None and emax > 1e-14:
        c, pts, lev = _polish(f, m, c, pts, lev, scale)
        lower = abs(lev)
    poly = _coeffs_to_poly(scale * c, m)
    err = SampledFunction(f.grid, f.values - poly(x), _Difference(f.evaluator, poly) if f.evaluator else None)
    E = sup_norm(err)
    err_at = np.asarray(err.evaluator(pts) if err.evaluator else err.values[ref], dtype=float)
    cert = {
        "method": "remez",
        "iterations": it + 1,
        "points": pts,
        "errors": err_at,
        "level": scale * lower,
        "alternates": bool(np.all(np.sign(err_at[1:]) == -np.sign(err_at[:-1]))),
    }
    return ApproxResult(E, poly, cert)


class _Difference:
    def __init__(self, ev, poly):
        self.ev, self.poly = ev, poly
        bp = getattr(ev, "breakpoints", None)
        if bp is not None:
            self.breakpoints = bp

    def __call__(self, x):
        return np.asarray(self.ev(x), dtype=float) - self.poly(x)


def _polish(f, m, c, pts, lev, scale, rounds=20):
    ev = f.evaluator
    h = f.grid.h
    for _ in range(rounds):
        poly = _coeffs_to_poly(c, m)
        signs = np.sign(lev) * (-1.0) ** np.arange(pts.size)
        new = np.empty_like(pts)
        for i, (t0, sg) in enumerate(zip(pts, signs)):
            res = optimize.minimize_scalar(
                lambda t: -sg * (float(ev(t)) / scale - poly(t)),
                bounds=(t0 - h, t0 + h),
                method="bounded",
                options={"xatol": 1e-13},
            )
            new[i] = res.x
        order = np.argsort(new)
        if not np.all(np.diff(new[order]) > 0):
            break
        pts = new
        c_new, lev_new = _levelled(trig_basis(pts, m), np.asarray(ev(pts), dtype=float) / scale)
        moved = np.max(np.abs(c_new - c))
        c, lev = c_new, lev_new
        if moved < 1e-15:
            break
    return c, pts, lev


def verify_zero_best(f: SampledFunction, m: int, idx: NormIndex, rtol: float = 1e-8) -> bool:
    """True when int t(x)|f|^{s-1} sign f dx vanishes for every basis t of order <= m-1.

    That orthogonality characterises t = 0 as the best L_s approximant (1 < s < inf).
    """
    if idx.is_inf or idx.value == 1.0:
        raise ValueError("zero-best criterion implemented for 1 < s < inf only")
    s = idx.value
    v = np.asarray(f.values, dtype=float)
    g = np.abs(v) ** (s - 1.0) * np.sign(v)
    A = trig_basis(f.grid.points, m)
    moments = f.grid.h * (A.T @ g)
    ref = (f.grid.h * np.sum(np.abs(v) ** s)) ** ((s - 1.0) / s)
    return bool(np.max(np.abs(moments)) <= rtol * max(ref, 1e-300))
