import logging
import math
from functools import lru_cache

import numpy as np
from scipy.integrate import quad, quad_vec

from recovery.config import DEFAULT_NUMERICS, Numerics
from recovery.errors import ExprDomainError, ModelError, QuadratureError
from recovery.exprdsl.evaluator import compile_expr
from recovery.model.coordinates import WorkingGrid, build_grid
from recovery.model.models import DerivedCoefficients, Domain, MarketModel
from recovery.odesolve.models import EigenSolution

logger = logging.getLogger("model")

PANEL_ABS_TOL = 1e-10
INVERSE_TOL = 1e-6
STENCIL_SCALE = 2e-3


@lru_cache(maxsize=64)
def working_grid(model: MarketModel, numerics: Numerics = DEFAULT_NUMERICS) -> WorkingGrid:
    return build_grid(
        model.chart, model.xi, numerics.truncation_log_halfwidth, numerics.grid_step
    )


def _gamma_integrand(model: MarketModel):
    """2 k x_u / sigma^2 as a function of the chart variable u."""
    chart = model.chart

    def integrand(u):
        x = chart.to_x(u)
        sigma = model.sigma(x)
        return 2.0 * model.k(x) * chart.x_u(u) / (sigma * sigma)

    return integrand


@lru_cache(maxsize=64)
def derive(model: MarketModel, numerics: Numerics = DEFAULT_NUMERICS) -> DerivedCoefficients:
    """Tabulate k, sigma^2, r and log gamma on the working grid.

    log gamma(x) = -int_xi^x 2k/sigma^2 ds, integrated panel by panel in u.
    """
    grid = working_grid(model, numerics)
    integrand = _gamma_integrand(model)

    node_values = integrand(grid.u)
    bad = ~np.isfinite(node_values)
    if bad.any():
        where = float(grid.x[int(np.argmax(bad))])
        raise QuadratureError(f"non-finite gamma integrand at x={where}")

    left = grid.u[:-1]
    width = grid.step

    def panels(t):
        return integrand(left + t * width) * width

    areas, _ = quad_vec(panels, 0.0, 1.0, epsabs=PANEL_ABS_TOL, norm="max")
    if not np.all(np.isfinite(areas)):
        where = float(grid.x[int(np.argmax(~np.isfinite(areas)))])
        raise QuadratureError(f"non-finite gamma quadrature near x={where}")

    c = grid.center
    gamma_log = np.zeros(grid.u.shape)
    gamma_log[c + 1 :] = -np.cumsum(areas[c:])
    gamma_log[:c] = np.cumsum(areas[:c][::-1])[::-1]

    sigma = model.sigma(grid.x)
    derived = DerivedCoefficients(
        model=model,
        grid=grid,
        k_nodes=np.broadcast_to(model.k(grid.x), grid.x.shape).astype(float),
        sigma2_nodes=np.broadcast_to(sigma * sigma, grid.x.shape).astype(float),
        r_nodes=np.broadcast_to(model.r(grid.x), grid.x.shape).astype(float),
        gamma_log_nodes=gamma_log,
    )
    logger.debug(
        f"Derived {model.name}: log gamma spans "
        f"[{gamma_log.min():.4g}, {gamma_log.max():.4g}] on {grid.u.size} nodes"
    )
    return derived


def gamma_log_at(derived: DerivedCoefficients, x):
    """log gamma at arbitrary states: nearest node plus a local quadrature."""
    grid = derived.grid
    model = derived.model
    integrand = _gamma_integrand(model)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    out = np.empty(xs.shape)
    for i, xv in enumerate(xs.flat):
        if not model.domain.contains(xv):
            raise ModelError(f"x={xv} is outside the model domain")
        u = float(grid.chart.to_u(xv))
        j = int(np.clip(round((u - grid.u[0]) / grid.step), 0, grid.u.size - 1))
        if xv == model.xi:
            out.flat[i] = 0.0
            continue
        value, _ = quad(integrand, grid.u[j], u, epsabs=PANEL_ABS_TOL)
        out.flat[i] = derived.gamma_log_nodes[j] - value
    if np.ndim(x) == 0:
        return float(out[0])
    return out


def to_log_coordinates(model: MarketModel) -> MarketModel:
    """Model of Y = ln X; requires a domain (lo, inf) with lo >= 0."""
    lo = model.domain.lo
    if not lo >= 0:
        raise ModelError("log coordinates need a domain contained in (0, inf)")

    def b(y):
        x = np.exp(y)
        sigma = model.sigma(x)
        return model.b(x) / x - 0.5 * sigma * sigma / (x * x)

    def sigma(y):
        x = np.exp(y)
        return model.sigma(x) / x

    def r(y):
        return model.r(np.exp(y))

    def v(y):
        return model.v(np.exp(y))

    return MarketModel(
        b=b,
        sigma=sigma,
        r=r,
        v=v,
        xi=math.log(model.xi),
        domain=Domain(lo=math.log(lo) if lo > 0 else -math.inf),
        name=f"log({model.name})",
    )


def _as_function(f):
    if callable(f) and not isinstance(f, str):
        return f
    return compile_expr(f)


def _stencil_step(chart, x):
    # power-of-two steps keep x +- h exact
    raw = STENCIL_SCALE * chart.x_u_at(x)
    return np.exp2(np.round(np.log2(raw)))


def _derivatives(f, chart, x):
    """Five-point first and second derivatives of f at x."""
    h = _stencil_step(chart, x)
    f0 = f(x)
    fp1, fm1 = f(x + h), f(x - h)
    fp2, fm2 = f(x + 2 * h), f(x - 2 * h)
    d1p, d1m = fp1 - f0, f0 - fm1
    d2p, d2m = fp2 - fp1, fm1 - fm2
    first = (7.0 * (d1p + d1m) - (d2p + d2m)) / (12.0 * h)
    second = (15.0 * (d1p - d1m) - (d2p - d2m)) / (12.0 * h * h)
    return first, second


def _image_domain(pi, lo: float) -> Domain:
    if lo == -math.inf:
        raise ModelError("image_domain must be given for maps of the real line")
    try:
        image_lo = float(pi(lo))
    except ExprDomainError:
        image_lo = -math.inf
    if math.isnan(image_lo):
        image_lo = -math.inf
    return Domain(lo=image_lo)


def apply_monotone_map(
    model: MarketModel,
    solution: EigenSolution | None = None,
    *,
    pi,
    pi_inverse,
    image_domain: Domain | None = None,
    numerics: Numerics = DEFAULT_NUMERICS,
):
    """Model of Y = pi(X), with the solution carried over as H(y) = h(pi^-1(y)).

    Returns ``(model, solution)``; the solution is None when none is given.
    """
    pi = _as_function(pi)
    pi_inverse = _as_function(pi_inverse)
    chart = model.chart
    grid = working_grid(model, numerics)

    x = grid.x
    y = np.broadcast_to(pi(x), x.shape)
    if not np.all(np.isfinite(y)):
        raise ModelError("map is not finite on the working grid")
    if not np.all(np.diff(y) > 0):
        where = float(x[int(np.argmax(np.diff(y) <= 0))])
        raise ModelError(f"map is not strictly increasing near x={where}")
    first, _ = _derivatives(pi, chart, x)
    if not np.all(first > 0):
        where = float(x[int(np.argmax(first <= 0))])
        raise ModelError(f"map derivative is not positive at x={where}")
    back = np.broadcast_to(pi_inverse(y), x.shape)
    mismatch = np.abs(back - x) / (1.0 + np.abs(x))
    if float(np.max(mismatch)) > INVERSE_TOL:
        where = float(x[int(np.argmax(mismatch))])
        raise ModelError(f"inverse mismatch {float(np.max(mismatch)):.3g} at x={where}")

    if image_domain is None:
        image_domain = _image_domain(pi, model.domain.lo)

    def b(yv):
        xv = pi_inverse(yv)
        d1, d2 = _derivatives(pi, chart, xv)
        sigma = model.sigma(xv)
        return d1 * model.b(xv) + 0.5 * d2 * sigma * sigma

    def sigma(yv):
        xv = pi_inverse(yv)
        d1, _ = _derivatives(pi, chart, xv)
        return d1 * model.sigma(xv)

    def r(yv):
        return model.r(pi_inverse(yv))

    def v(yv):
        return model.v(pi_inverse(yv))

    mapped = MarketModel(
        b=b,
        sigma=sigma,
        r=r,
        v=v,
        xi=float(pi(model.xi)),
        domain=image_domain,
        name=f"mapped({model.name})",
    )
    logger.info(f"Mapped model {model.name} onto domain ({image_domain.lo}, inf)")
    if solution is None:
        return mapped, None

    d1, _ = _derivatives(pi, chart, solution.x)
    d1_xi, _ = _derivatives(pi, chart, np.array([model.xi]))
    new_x = np.asarray(pi(solution.x), dtype=float)
    carried = EigenSolution(
        lam=solution.lam,
        slope=solution.slope / float(d1_xi[0]),
        u=np.asarray(mapped.chart.to_u(new_x), dtype=float),
        x=new_x,
        h=solution.h,
        dh=solution.dh / d1,
        rescale_log=solution.rescale_log,
        truncation=(float(pi(solution.truncation[0])), float(pi(solution.truncation[1]))),
    )
    return mapped, carried
