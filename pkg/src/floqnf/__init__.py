"""Real Floquet normal forms with a periodic/antiperiodic split, and moving
frames around periodic orbits.

Typical use::

    from floqnf import manufacture, rotation_qspec, real_floquet_form
    sys = manufacture(rotation_qspec(2, 1.0), np.diag([0.0, np.log(2.0)]))
    form = real_floquet_form(sys)      # form.d == 2, Q(t+1) == -Q(t)
"""
from .errors import *  # noqa: F401,F403
from .fields import (AutonomousField, forcing, planar_cycle, polynomial_field, rigid_rotation,
                     twisted_cycle)
from .floquet import (FloquetForm, check_real_T_periodic_existence, complex_floquet_form,
                      consistency_check, nonnegative_multiplier_check, real_floquet_form, residual_check,
                      verify_antiperiodicity)
from .integrator import dense_eval, fundamental_solution, monodromy, variational_solution
from .linsys import (PeriodicLinearSystem, QSpec, TrigMatrixPolynomial, constant_system,
                     evaluate, manufacture, piecewise_system, rotation_qspec, trig_system,
                     validate_period)
from .orbitframes import (OrbitFrame, PeriodicOrbit, build_frame, q0_index, refine_orbit,
                          roundtrip_check, transformed_rhs, verify_properties)
from .realog import jordan_block_log, matrix_exp, real_log, shifted_negative_log
from .spectral import a_index, jordan_inventory, real_jordan_basis

__version__ = "0.1.0"
