"""Compiled Schrodinger-equation integrator.

Solves ``i dpsi/dt = [a(t) D + b(t) diag(E)] psi`` where ``D = -sum_i X_i`` is
applied implicitly and ``a``, ``b`` are affine in ``t``.  The stepper is the
Dormand-Prince 8(5,3) pair (DOP853) with its combined 5th/3rd-order error
estimate, reusing the last stage across steps, and a PI step-size controller.
"""

import numba
import numpy as np

OK = 0
STEP_LIMIT = 1
NORM_DRIFT = 2
STEP_UNDERFLOW = 3

STATUS_NAMES = {
    OK: "ok",
    STEP_LIMIT: "step-limit-exceeded",
    NORM_DRIFT: "norm-drift-exceeded",
    STEP_UNDERFLOW: "step-size-underflow",
}

# Dormand-Prince 8(5,3) tableau, as shipped with scipy
from scipy.integrate._ivp import dop853_coefficients as _dop  # noqa: E402

_STAGES = _dop.N_STAGES
_A = np.ascontiguousarray(_dop.A[:_STAGES, :_STAGES])
_B = np.ascontiguousarray(_dop.B)
_C = np.ascontiguousarray(_dop.C[:_STAGES])
_E3 = np.ascontiguousarray(_dop.E3)
_E5 = np.ascontiguousarray(_dop.E5)

# PI controller; local error estimate is of order 7
_SAFE = 0.9
_BETA = 0.04
_ALPHA = 1.0 / 8.0 - 0.2 * _BETA
_FAC_MIN = 0.2
_FAC_MAX = 10.0


@numba.njit(cache=True)
def _rhs(psi, energies, n, a, b, out):
    dim = psi.shape[0]
    for k in range(dim):
        acc = 0j
        for i in range(n):
            acc += psi[k ^ (1 << i)]
        h = -a * acc + b * energies[k] * psi[k]
        out[k] = complex(h.imag, -h.real)  # -1j * h


@numba.njit(cache=True)
def _grow(arr, size):
    new = np.empty(max(2 * arr.shape[0], size), dtype=arr.dtype)
    new[: arr.shape[0]] = arr
    return new


@numba.njit(cache=True)
def _grow2(arr, size):
    new = np.empty((max(2 * arr.shape[0], size), arr.shape[1]), dtype=arr.dtype)
    new[: arr.shape[0]] = arr
    return new


@numba.njit(cache=True)
def integrate(
    energies,
    n,
    blend,
    psi0,
    t0,
    t1,
    target,
    rtol,
    atol,
    max_steps,
    norm_tol,
    checkpoints,
    avg_start,
    record_states,
):
    """Integrate from ``t0`` to ``t1``; see ``dynamics.evolve`` for the public API.

    ``blend = (a0, a1, b0, b1)`` gives ``a(t) = a0 + a1 t``, ``b(t) = b0 + b1 t``.
    Steps are clipped to land exactly on every time in ``checkpoints`` and on
    ``avg_start``.  Returns ``(status, times, probs, max_norm_dev, psi,
    checkpoint_states, trajectory, integral)`` where ``probs`` is
    ``|psi[target]|^2`` at each accepted step and ``integral`` is the
    trapezoidal integral of that probability over ``[avg_start, t1]``.
    """
    dim = psi0.shape[0]
    a0, a1, b0, b1 = blend[0], blend[1], blend[2], blend[3]
    k = np.zeros((_STAGES + 1, dim), dtype=np.complex128)
    y = psi0.copy()
    y_new = np.empty(dim, dtype=np.complex128)
    y_stage = np.empty(dim, dtype=np.complex128)

    cap = 1024
    times = np.empty(cap)
    probs = np.empty(cap)
    traj = np.empty((cap if record_states else 0, dim), dtype=np.complex128)
    n_cp = checkpoints.shape[0]
    cp_states = np.empty((n_cp, dim), dtype=np.complex128)
    cp_next = 0

    t = t0
    count = 0
    times[0] = t
    probs[0] = abs(y[target]) ** 2
    if record_states:
        traj[0] = y
    count = 1
    while cp_next < n_cp and checkpoints[cp_next] <= t0:
        cp_states[cp_next] = y
        cp_next += 1

    emax = 0.0
    for e in energies:
        emax = max(emax, abs(e))
    scale = max(abs(a0), abs(a0 + a1 * (t1 - 0.0))) * n + max(abs(b0), abs(b0 + b1 * t1)) * emax
    h = min(t1 - t0, 0.5 / scale if scale > 0 else t1 - t0)
    err_old = 1e-4
    rejected = False
    max_dev = 0.0
    integral = 0.0
    status = 0
    steps = 0

    _rhs(y, energies, n, a0 + a1 * t, b0 + b1 * t, k[0])
    while t < t1:
        if steps >= max_steps:
            status = 1
            break
        # next landing point
        stop = t1
        if cp_next < n_cp and checkpoints[cp_next] < stop:
            stop = checkpoints[cp_next]
        if t < avg_start < stop:
            stop = avg_start
        landing = False
        h_try = h
        if t + h >= stop - 0.01 * h:
            h = stop - t
            landing = True
        if h <= 1e-14 * max(1.0, abs(t)):
            status = 3
            break

        for s in range(1, _STAGES):
            for j in range(dim):
                acc = 0j
                for q in range(s):
                    coef = _A[s, q]
                    if coef != 0.0:
                        acc += coef * k[q, j]
                y_stage[j] = y[j] + h * acc
            ts = t + _C[s] * h
            _rhs(y_stage, energies, n, a0 + a1 * ts, b0 + b1 * ts, k[s])
        for j in range(dim):
            acc = 0j
            for q in range(_STAGES):
                coef = _B[q]
                if coef != 0.0:
                    acc += coef * k[q, j]
            y_new[j] = y[j] + h * acc
        ts = t + h
        _rhs(y_new, energies, n, a0 + a1 * ts, b0 + b1 * ts, k[_STAGES])

        err5 = 0.0
        err3 = 0.0
        for j in range(dim):
            e5 = 0j
            e3 = 0j
            for q in range(_STAGES + 1):
                e5 += _E5[q] * k[q, j]
                e3 += _E3[q] * k[q, j]
            sc = atol + rtol * max(abs(y[j]), abs(y_new[j]))
            err5 += (abs(e5) / sc) ** 2
            err3 += (abs(e3) / sc) ** 2
        denom = err5 + 0.01 * err3
        err = abs(h) * err5 / np.sqrt(denom * dim) if denom > 0.0 else 0.0
        steps += 1

        if err <= 1.0:
            t_prev = t
            p_prev = abs(y[target]) ** 2
            t = stop if landing else t + h
            y, y_new = y_new, y
            k[0] = k[_STAGES]
            p = abs(y[target]) ** 2
            if t_prev >= avg_start:
                integral += 0.5 * (t - t_prev) * (p + p_prev)
            if count >= times.shape[0]:
                times = _grow(times, count + 1)
                probs = _grow(probs, count + 1)
                if record_states:
                    traj = _grow2(traj, count + 1)
            times[count] = t
            probs[count] = p
            if record_states:
                traj[count] = y
            count += 1
            nrm = 0.0
            for j in range(dim):
                nrm += y[j].real ** 2 + y[j].imag ** 2
            dev = abs(np.sqrt(nrm) - 1.0)
            if dev > max_dev:
                max_dev = dev
            if dev > norm_tol:
                status = 2
                break
            while cp_next < n_cp and checkpoints[cp_next] <= t:
                cp_states[cp_next] = y
                cp_next += 1

            fac = _SAFE * max(err, 1e-10) ** (-_ALPHA) * err_old**_BETA
            if rejected:
                fac = min(fac, 1.0)
            fac = min(_FAC_MAX, max(_FAC_MIN, fac))
            err_old = max(err, 1e-4)
            h = h_try if landing and h < h_try else h * fac
            rejected = False
        else:
            h = h * max(_FAC_MIN, _SAFE * err ** (-_ALPHA))
            rejected = True

    if record_states:
        traj = traj[:count]
    return status, times[:count], probs[:count], max_dev, y, cp_states, traj, integral
