"""Backend dispatch: import the kernel set chosen by ``backend``."""

from . import backend

if backend.active() == "numba":
    from .kernels_numba import (          # noqa: F401
        phi_sum, phi_sum_deriv, phi_pair, theta_series, theta_constants,
        jacobi_sncndn, phi_pole_dist, sn_pole_dist,
        residual, jacobian, min_guard_dist, fold, newton, newton_batch,
        NEWTON_CONVERGED, NEWTON_MAXITER, NEWTON_STALLED, NEWTON_POLE_BLOCKED,
    )
else:
    from .kernels_numpy import (          # noqa: F401
        phi_sum, phi_sum_deriv, phi_pair, theta_series, theta_constants,
        jacobi_sncndn, phi_pole_dist, sn_pole_dist,
        residual, jacobian, min_guard_dist, fold, newton, newton_batch,
        NEWTON_CONVERGED, NEWTON_MAXITER, NEWTON_STALLED, NEWTON_POLE_BLOCKED,
    )
