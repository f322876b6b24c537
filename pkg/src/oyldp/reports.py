"""Result containers shared by the analytic, simulation and CLI layers."""

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field

__all__ = ["Check", "VerificationReport", "McSummary", "config_digest"]


def config_digest(config):
    """Short stable hash of a JSON-serializable configuration."""
    blob = json.dumps(config, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _jsonable(v):
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "item"):      # numpy scalar
        return _jsonable(v.item())
    return v


@dataclass
class Check:
    name: str
    residual: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)


@dataclass
class VerificationReport:
    """Named checks with residuals, tolerances and input provenance."""

    name: str
    checks: list = field(default_factory=list)
    provenance: dict = field(default_factory=dict)

    def add(self, name, residual, tolerance, passed=None, **details):
        residual = float(residual)
        if passed is None:
            passed = residual <= tolerance
        self.checks.append(Check(name, residual, float(tolerance),
                                 bool(passed), details))
        return self.checks[-1]

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self):
        return max((c.residual for c in self.checks), default=0.0)

    def __getitem__(self, name):
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self):
        return _jsonable({"name": self.name, "passed": self.passed,
                          "provenance": self.provenance,
                          "checks": [asdict(c) for c in self.checks]})

    def to_json(self, indent=2):
        return json.dumps(self.to_dict(), indent=indent)

    def to_text(self):
        width = max([len(c.name) for c in self.checks] + [5])
        lines = [f"{self.name}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  {c.name:<{width}}  residual={c.residual:<12.4g}"
                         f" tol={c.tolerance:<10.3g} "
                         f"{'pass' if c.passed else 'FAIL'}")
        return "\n".join(lines)


@dataclass
class McSummary:
    """Monte Carlo estimate with a 95% normal confidence interval.

    ``censored`` marks tail estimates where no replicate hit the event; the
    mean is then the lower confidence bound and ``ci_high`` is infinite.
    """

    n_replicates: int
    mean: float
    std_error: float
    ci_low: float
    ci_high: float
    seed: int
    config_digest: str
    censored: bool = False
    analytic: float = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_estimate(cls, mean, std_error, n_replicates, seed, digest,
                      **kw):
        return cls(n_replicates, mean, std_error, mean - 1.96 * std_error,
                   mean + 1.96 * std_error, seed, digest, **kw)

    def within(self, value, n_se=3.0):
        """True if ``value`` lies within ``n_se`` standard errors."""
        return abs(self.mean - value) <= n_se * self.std_error

    def to_dict(self):
        return _jsonable(asdict(self))
