"""Large deviations of the semi-discrete directed polymer in a Brownian
environment: analytic rate functions, exact simulation on a time grid and
Monte Carlo estimators."""

__version__ = "0.1.0"
