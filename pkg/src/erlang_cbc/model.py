"""Parameter types and derived coefficients for the modified Erlang A model.

A model instance is an M/M/s queue whose arrival rate drops to
``(1 - eps) * lam`` and whose per-server service rate becomes
``(1 + tau) * mu`` while all ``s`` servers are busy (congestion-based
control).  Customers abandon either by exponential reneging (rate ``gamma``
per queued customer) or by linear balking (the admitted arrival rate drops
by ``delta`` per queued customer), never both.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass


class DegenerateScaleError(ValueError):
    """A sub-chain rate parameter is non-positive, so its scale is undefined."""


class ParameterError(ValueError):
    """Raised by :func:`check` when a parameter set violates a constraint."""

    def __init__(self, violations: list[str]):
        self.violations = violations
        super().__init__("; ".join(violations))


class Abandonment(str, enum.Enum):
    RENEGING = "reneging"
    BALKING = "balking"


@dataclass(frozen=True)
class AbandonmentSpec:
    """Abandonment mechanism; ``rate`` is gamma (reneging) or delta (balking)."""

    kind: Abandonment
    rate: float

    @classmethod
    def reneging(cls, gamma: float) -> AbandonmentSpec:
        return cls(Abandonment.RENEGING, float(gamma))

    @classmethod
    def balking(cls, delta: float) -> AbandonmentSpec:
        return cls(Abandonment.BALKING, float(delta))

    @classmethod
    def parse(cls, text: str) -> AbandonmentSpec:
        """Parse ``"reneging:<gamma>"`` or ``"balking:<delta>"``."""
        kind, sep, rate = text.partition(":")
        if not sep:
            raise ValueError(f"expected 'reneging:<rate>' or 'balking:<rate>', got {text!r}")
        return cls(Abandonment(kind.strip().lower()), float(rate))

    def __str__(self) -> str:
        return f"{self.kind.value}:{self.rate!r}"


@dataclass(frozen=True)
class CbcControl:
    """Congestion-based control proportions (arrival cut ``eps``, service boost ``tau``)."""

    eps: float = 0.0
    tau: float = 0.0


NO_CONTROL = CbcControl(0.0, 0.0)


@dataclass(frozen=True)
class ModelParams:
    lam: float
    mu: float
    s: int
    abandon: AbandonmentSpec
    cbc: CbcControl = NO_CONTROL

    @property
    def lam_q(self) -> float:
        """Arrival rate while all servers are busy."""
        return (1.0 - self.cbc.eps) * self.lam

    @property
    def mu_q(self) -> float:
        """Per-server service rate while all servers are busy."""
        return (1.0 + self.cbc.tau) * self.mu

    @property
    def theta(self) -> float:
        return self.abandon.rate

    @property
    def is_reneging(self) -> bool:
        return self.abandon.kind is Abandonment.RENEGING

    @property
    def offered_load(self) -> float:
        return self.lam / self.mu

    @property
    def congested_load(self) -> float:
        if self.cbc.eps + self.cbc.tau == 0.0:
            # keep R_Q == R bit-exact on the no-intervention line
            return self.offered_load
        return self.lam_q / self.mu_q

    @property
    def p(self) -> float:
        """Heavy-traffic limit of the abandonment probability, ``1 - s*mu_q/lam``."""
        return 1.0 - self.s * self.mu_q / self.lam

    def replace(self, **changes) -> ModelParams:
        """Copy with fields replaced; also accepts ``eps``, ``tau``, ``gamma``, ``delta``."""
        fields = dict(lam=self.lam, mu=self.mu, s=self.s, abandon=self.abandon, cbc=self.cbc)
        eps = changes.pop("eps", None)
        tau = changes.pop("tau", None)
        if eps is not None or tau is not None:
            fields["cbc"] = CbcControl(
                self.cbc.eps if eps is None else float(eps),
                self.cbc.tau if tau is None else float(tau),
            )
        if "gamma" in changes:
            fields["abandon"] = AbandonmentSpec.reneging(changes.pop("gamma"))
        if "delta" in changes:
            fields["abandon"] = AbandonmentSpec.balking(changes.pop("delta"))
        fields.update(changes)
        return ModelParams(**fields)


def reneging(lam, mu, s, gamma, eps=0.0, tau=0.0) -> ModelParams:
    """Shorthand constructor for a reneging model."""
    return ModelParams(float(lam), float(mu), int(s), AbandonmentSpec.reneging(gamma),
                       CbcControl(float(eps), float(tau)))


def balking(lam, mu, s, delta, eps=0.0, tau=0.0) -> ModelParams:
    """Shorthand constructor for a balking model."""
    return ModelParams(float(lam), float(mu), int(s), AbandonmentSpec.balking(delta),
                       CbcControl(float(eps), float(tau)))


def validate(params: ModelParams) -> list[str]:
    """Return the list of violated constraints (empty when the parameters are valid)."""
    out = []

    def finite(name, value):
        if not isinstance(value, (int, float)) or not math.isfinite(value):
            out.append(f"{name} must be a finite number")
            return False
        return True

    if finite("lambda", params.lam) and params.lam <= 0:
        out.append("lambda > 0 required")
    if finite("mu", params.mu) and params.mu <= 0:
        out.append("mu > 0 required")
    if isinstance(params.s, bool) or not isinstance(params.s, int):
        out.append("s must be an integer")
    elif params.s < 0:
        out.append("s >= 0 required")
    if not isinstance(params.abandon.kind, Abandonment):
        out.append("abandonment kind must be reneging or balking")
    if finite("abandonment rate", params.abandon.rate) and params.abandon.rate <= 0:
        out.append("abandonment rate (gamma or delta) > 0 required")

    eps, tau = params.cbc.eps, params.cbc.tau
    eps_ok = finite("eps", eps)
    tau_ok = finite("tau", tau)
    if eps_ok and not 0.0 <= eps <= 1.0:
        out.append("0 <= eps <= 1 required")
    if tau_ok and not -1.0 < tau <= 1.0:
        out.append("-1 < tau <= 1 required")
    if eps_ok and tau_ok and eps + tau < 0.0:
        out.append("eps + tau >= 0 required (R_Q <= R)")
    return out


def check(params: ModelParams) -> ModelParams:
    """Raise :class:`ParameterError` unless ``params`` is valid; return it otherwise."""
    violations = validate(params)
    if violations:
        raise ParameterError(violations)
    return params


@dataclass(frozen=True)
class SubChainScale:
    """Poisson/normal scaling of one sub-chain: rate parameter, staffing index and coefficients."""

    R: float
    s: float

    @property
    def c(self) -> float:
        return (self.s - self.R) / math.sqrt(self.R)

    @property
    def a(self) -> float:
        return (self.s - self.R) / self.R

    @property
    def delta_cc(self) -> float:
        return 0.5 / math.sqrt(self.R)


@dataclass(frozen=True)
class DerivedCoefficients:
    R: float
    R_Q: float
    p: float
    a: float
    c: float
    a_Q: float
    delta_cc: float
    sub1: SubChainScale
    sub2: SubChainScale
    kind: Abandonment

    def c2_ratio_form(self, params: ModelParams) -> float:
        """Sub-chain-2 square-root coefficient from the ratio form (undefined at ``a == 0``)."""
        eps, tau = params.cbc.eps, params.cbc.tau
        mu_q, theta = params.mu_q, params.theta
        if self.a == 0.0:
            raise ZeroDivisionError("ratio form is 0/0 at a == 0")
        if self.kind is Abandonment.RENEGING:
            return (self.a_Q / self.a) * math.sqrt((1 + tau) / (1 - eps)) * math.sqrt(mu_q / theta) * self.c
        return -(self.a_Q / self.a) * math.sqrt(mu_q / ((self.a + 1) * theta)) * self.c


def sub_chain_scale(kind: Abandonment, lam_q: float, mu_q: float, s: float, theta: float) -> SubChainScale:
    """Rescaled (rate, index) pair of the congested sub-chain.

    Reneging uses ``(lam_q/gamma, s*mu_q/gamma)``; balking swaps the roles,
    ``(s*mu_q/delta, lam_q/delta)``.
    """
    if kind is Abandonment.RENEGING:
        scale = SubChainScale(lam_q / theta, s * mu_q / theta)
    else:
        scale = SubChainScale(s * mu_q / theta, lam_q / theta)
    if not scale.R > 0:
        raise DegenerateScaleError(f"{kind.value} sub-chain rate parameter is {scale.R!r}")
    return scale


def derive(params: ModelParams) -> DerivedCoefficients:
    """Compute the linear/square-root coefficients of the full model and both sub-chains."""
    check(params)
    R = params.offered_load
    R_Q = params.congested_load
    s = params.s
    eps, tau = params.cbc.eps, params.cbc.tau
    a = (s - R) / R
    sub2 = sub_chain_scale(params.abandon.kind, params.lam_q, params.mu_q, s, params.theta)
    return DerivedCoefficients(
        R=R,
        R_Q=R_Q,
        p=params.p,
        a=a,
        c=(s - R) / math.sqrt(R),
        a_Q=a + (eps + tau) / (1 + tau),
        delta_cc=0.5 / math.sqrt(R),
        sub1=SubChainScale(R, float(s)),
        sub2=sub2,
        kind=params.abandon.kind,
    )
