"""Fixed-step RK4 integration with conservation-drift supervision.

The two quadratic invariants are monitored every step against a relative
drift budget.  On a breach the run either halves the step and restarts from
t = 0 (keeping the emitted series self-consistent at a single dt) or raises
DriftError.  Non-finite coefficients abort the run through BlowupError after
flushing a final record computed on the last finite state, so the output file
still ends in a well-formed footer.

Samples go to a sink object: begin(params, dt) opens/resets the output,
emit(record, state) receives each sampled row together with the state that
produced it, finish(stats) closes out.  Sinks see a fresh begin() after every
restart.
"""

import math
from dataclasses import dataclass, replace

from .diagnostics import CaseThresholds, hm12_sum, l2_sum, make_record
from .lattice import NonFiniteError, SpectralState, initial_data
from .tendency import rhs_fast

# halving floor relative to the starting step
MIN_DT_FRACTION = 2.0**-20


class DriftError(RuntimeError):
    """Conservation drift exceeded the budget and halving is exhausted or off."""


class BlowupError(RuntimeError):
    """The integration produced non-finite coefficients."""


@dataclass(frozen=True)
class StepControl:
    """Step size plus the drift supervision policy.

    drift_budget is relative drift allowed per unit time (with a one-unit
    grace at early times, where roundoff dominates).
    """

    dt: float
    drift_budget: float = 1e-9
    halve_on_breach: bool = True

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.drift_budget <= 0:
            raise ValueError("drift_budget must be positive")


@dataclass(frozen=True)
class RunStats:
    drift_l2: float
    drift_hm12: float
    dt_final: float
    restarts: int
    blowup: bool
    steps: int


class Sink:
    """No-op sink; subclasses override what they need."""

    def begin(self, params, dt):
        pass

    def emit(self, record, state):
        pass

    def finish(self, stats):
        pass


class ListSink(Sink):
    """Collects records (and optionally states) in memory."""

    def __init__(self, keep_states=False):
        self.records = []
        self.states = [] if keep_states else None

    def begin(self, params, dt):
        self.records.clear()
        if self.states is not None:
            self.states.clear()
        self.dt = dt

    def emit(self, record, state):
        self.records.append(record)
        if self.states is not None:
            self.states.append(state)

    def finish(self, stats):
        self.stats = stats


def step_rk4(state, dt, evaluator=None):
    """One classical RK4 step.  Raises NonFiniteError if values explode."""
    ev = evaluator if evaluator is not None else rhs_fast
    c = state.coeff
    t = state.time
    k1 = ev(state)
    k2 = ev(SpectralState(c + 0.5 * dt * k1, t))
    k3 = ev(SpectralState(c + 0.5 * dt * k2, t))
    k4 = ev(SpectralState(c + dt * k3, t))
    return SpectralState(c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), t + dt)


def run(params, control, sink, evaluator=None):
    """Integrate from the canonical initial data to t_max.

    Emits a record at t = 0 and then every sample_every steps plus the final
    step.  Returns (final_state, stats).  t_max = 0 emits exactly the initial
    record.
    """
    ev = evaluator if evaluator is not None else rhs_fast
    thresholds = CaseThresholds.from_tau(params.tau)
    dt = control.dt
    floor = control.dt * MIN_DT_FRACTION
    restarts = 0
    while True:
        state = initial_data(params.tau, params.N)
        l2_0 = l2_sum(state)
        hm12_0 = hm12_sum(state)
        n = max(0, math.ceil(params.t_max / dt - 1e-12))
        sink.begin(params, dt)
        sink.emit(make_record(state, thresholds, params.s, ev), state)
        drift_l2 = 0.0
        drift_hm12 = 0.0
        breached = False
        for i in range(1, n + 1):
            prev = state
            try:
                state = step_rk4(state, dt, ev)
                l2 = l2_sum(state)
                if not math.isfinite(l2):
                    raise NonFiniteError("l2 sum is not finite")
            except (NonFiniteError, FloatingPointError):
                rec = make_record(prev, thresholds, params.s, ev)
                sink.emit(rec, prev)
                stats = RunStats(drift_l2, drift_hm12, dt, restarts, True, i - 1)
                sink.finish(stats)
                raise BlowupError(f"non-finite state at t ~ {i * dt:.6g}") from None
            state = replace(state, time=i * dt)  # keep t = i*dt exact for dyadic dt
            rel_l2 = abs(l2 - l2_0) / l2_0
            rel_hm = abs(hm12_sum(state) - hm12_0) / hm12_0
            drift_l2 = max(drift_l2, rel_l2)
            drift_hm12 = max(drift_hm12, rel_hm)
            allowance = control.drift_budget * max(i * dt, 1.0)
            if max(rel_l2, rel_hm) > allowance:
                if control.halve_on_breach and dt / 2.0 >= floor:
                    dt /= 2.0
                    restarts += 1
                    breached = True
                    break
                raise DriftError(
                    f"relative drift {max(rel_l2, rel_hm):.3e} over budget {allowance:.3e} at t={i * dt:.6g}"
                )
            if i % params.sample_every == 0 or i == n:
                sink.emit(make_record(state, thresholds, params.s, ev), state)
        if breached:
            continue
        stats = RunStats(drift_l2, drift_hm12, dt, restarts, False, n)
        sink.finish(stats)
        return state, stats
