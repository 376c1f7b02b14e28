import logging

import numpy as np

from mixedbm.core import systems
from mixedbm.core.geometry import sample, star
from mixedbm.core.models import FieldRegion, Formulation, TransmissionConfig

logging.basicConfig(level=logging.INFO)

config = TransmissionConfig(eps0=1.0, eps1=4.0, curve=star(1.0, 0.3, 5))
disc = sample(config.curve, 256)
omega = 2.0
k0, _ = config.wavenumbers(omega)
incident = systems.incident_plane_wave(k0, (1.0, 0.0))

probes = np.array([[2.5, 0.0], [0.0, -2.5], [0.2, 0.1]])
outside = ~config.curve.contains(probes)
for formulation in Formulation:
    solution = systems.solve_scattering(config, disc, omega, incident, formulation)
    balance = systems.power_balance(config, disc, solution, radius=2.0)
    exterior = systems.eval_field(
        config, disc, solution, probes[outside], FieldRegion.EXTERIOR
    )
    interior = systems.eval_field(
        config, disc, solution, probes[~outside], FieldRegion.INTERIOR
    )
    print(formulation.value, exterior, interior)
    print(
        f"  scattered {balance.scattered:.12f}  extinguished "
        f"{balance.extinguished:.12f}  absorbed {balance.absorbed:.2e}"
    )
