import logging

import numpy as np
from scipy.integrate import cumulative_simpson

from recovery.config import DEFAULT_NUMERICS, Numerics
from recovery.errors import NotAdmissibleError, QuadratureError
from recovery.model.models import MarketModel
from recovery.odesolve.shooting import extremal_solution
from recovery.recover.admissible import admissible_set
from recovery.recover.models import AdmissibleSet, RecoveredAgent

logger = logging.getLogger("recover")

LOG_CLIP = 700.0


def recover_agent(
    model: MarketModel,
    lam: float,
    numerics: Numerics = DEFAULT_NUMERICS,
    force: bool = False,
    admissible: AdmissibleSet | None = None,
) -> RecoveredAgent:
    """Representative agent with discount rate beta = lambda and phi = h_{M_lambda}.

    U'(x) = 1/phi(x) and U(x) = int_xi^x 1/phi, so U(xi) = 0 and U'(xi) = 1.
    """
    lam = float(lam)
    if force:
        logger.warning(f"Recovering at lambda={lam} without an admissibility check")
    else:
        if admissible is None:
            admissible = admissible_set(model, n_samples=1, numerics=numerics)
        if not admissible.contains(lam):
            detail = f"lambda={lam} is not in the admissible set"
            if admissible.reason:
                detail += f" ({admissible.reason})"
            raise NotAdmissibleError(detail)

    solution = extremal_solution(model, lam, numerics)
    log_phi = solution.log_h
    clipped = bool(np.any(np.abs(log_phi) > LOG_CLIP))
    if clipped:
        logger.warning(f"phi leaves the representable range at lambda={lam}; clipping log phi")
        log_phi = np.clip(log_phi, -LOG_CLIP, LOG_CLIP)

    phi = np.exp(log_phi)
    marginal = np.exp(-log_phi)
    chart = model.chart
    xu = np.asarray(chart.x_u(solution.u), dtype=float)
    utility = cumulative_simpson(marginal * xu, x=solution.u, initial=0.0)
    if not np.all(np.isfinite(utility)):
        raise QuadratureError(f"utility integral is not finite at lambda={lam}")
    center = int(np.argmin(np.abs(solution.x - model.xi)))
    utility = utility - utility[center]

    sigma = model.sigma(solution.x)
    drift = model.k(solution.x) + sigma * sigma * solution.log_derivative
    logger.info(f"Recovered agent for {model.name} at beta={lam}, slope={solution.slope:.10g}")
    return RecoveredAgent(
        beta=lam,
        slope=solution.slope,
        x=solution.x,
        u=solution.u,
        phi=phi,
        log_phi=log_phi,
        marginal_utility=marginal,
        utility=utility,
        drift=np.broadcast_to(drift, solution.x.shape).astype(float),
        clipped=clipped,
    )
