"""Independent projections of diffusions: particle simulation, Gaussian oracles and product-measure solvers."""

__version__ = "0.1.0"
