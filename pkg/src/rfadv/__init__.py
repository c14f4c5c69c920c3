"""Adversarial perturbation experiments against I/Q modulation classifiers.

Subpackages and modules:
  nn        minimal dense/conv network engine with exact backprop
  models    VT-CNN2 and substitute-MLP builders, ADVW weight files
  dataset   synthetic RML-style I/Q frames, RMLD dataset files
  attacks   bisection attack, PCA and iterative UAPs, jamming, shifts
  evaluate  PSR/PNR metrics, accuracy measurement, experiment sweeps
  training  Adam training loop
  cli       rfadv command-line front end
"""

__version__ = "0.1.0"
