import logging

from mixedbm.core import circle_oracle, nep_ssm, systems
from mixedbm.core.geometry import circle, sample
from mixedbm.core.models import Formulation, Rectangle, TransmissionConfig

logging.basicConfig(level=logging.INFO)

config = TransmissionConfig(eps0=1.0, eps1=4.0, curve=circle(1.0))
region = Rectangle(re_min=0.5, re_max=1.5, im_min=-0.5, im_max=-0.05)
disc = sample(config.curve, 128)

exact = circle_oracle.find_eigen(region, config, n_max=10)
for result in exact:
    print(f"oracle  n={result.n:2d}  {result.value:.10f}  {result.classification.value}")

for formulation in Formulation:
    family = systems.operator_family(formulation, config, disc)
    found = nep_ssm.solve_region(family, region, (2, 1), nep_ssm.SsmParams())
    for result in found:
        n, label, _ = circle_oracle.classify(result.value, config, 10)
        print(f"{formulation.value:6s}  n={n:2d}  {result.value:.10f}  {label.value}")
