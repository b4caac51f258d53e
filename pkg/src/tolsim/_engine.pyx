# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled closed-loop stepping engine.

Mirrors the pure-Python engine in :mod:`tolsim.simulator` operation for
operation (same expression structure, same libm calls) so both engines
produce bit-identical record streams. Compiled without fast-math to keep
IEEE semantics.
"""

import numpy as np

from libc.math cimport atan, atan2, cos, exp, fabs, isfinite, sin, sqrt, tan, M_PI

COLUMNS = (
    "t", "u", "w", "theta", "q", "h", "V",
    "u_d", "du_d", "theta_d", "q_d", "dq_d",
    "e1", "e2", "e3", "T", "tau", "N", "F_mu",
    "Vlyap", "Vdot1", "Vdot2", "Vdot3", "Vdot_total",
)

cdef int NCOLS = 24

cdef int STATUS_HORIZON = 0
cdef int STATUS_STOPPED = 1
cdef int STATUS_BLOWUP = 2


cdef inline double _saturate(double s, double L, double M, double n) noexcept nogil:
    if L == M:
        if s > L:
            return L
        if s < -L:
            return -L
        return s
    if s > L:
        return atan(n * (s - L)) / n + L
    if s < -L:
        return atan(n * (s + L)) / n - L
    return s


cdef inline double _lift_coeff(double alpha, double C_L0, double C_L_alpha,
                               double C_L_max) noexcept nogil:
    cdef double c_l = C_L0 + C_L_alpha * alpha
    if c_l > C_L_max:
        c_l = C_L_max
    elif c_l < -C_L_max:
        c_l = -C_L_max
    return c_l


cdef struct Aero:
    double alpha
    double V
    double L
    double D


cdef struct Params:
    double m, S, rho, C_L_max, mu, g
    double C_L0, C_L_alpha, C_D0, k_induced
    int opposing


cdef inline Aero _aero(double u, double w, Params* p) noexcept nogil:
    cdef Aero a
    cdef double K, kv2, c_l, c_d
    if u == 0.0 and w == 0.0:
        a.alpha = 0.0
    else:
        a.alpha = atan2(w, u)
    a.V = sqrt(u * u + w * w)
    K = 0.5 * p.rho * p.S
    kv2 = K * a.V * a.V
    c_l = _lift_coeff(a.alpha, p.C_L0, p.C_L_alpha, p.C_L_max)
    c_d = p.C_D0 + p.k_induced * c_l * c_l
    a.L = kv2 * c_l
    a.D = kv2 * c_d
    return a


cdef inline double _normal_force(double theta, double T, Aero* a, Params* p) noexcept nogil:
    cdef double tma = theta - a.alpha
    return a.L * cos(tma) - a.D * sin(tma) + T * sin(theta) - p.m * p.g


cdef inline double _du(double u, double w, double q, double theta,
                       double T, Params* p) noexcept nogil:
    """u-equation right-hand side, friction per the contact mode."""
    cdef Aero a = _aero(u, w, p)
    cdef double sin_th = sin(theta)
    cdef double sin_a = sin(a.alpha)
    cdef double cos_a = cos(a.alpha)
    cdef double inv_m = 1.0 / p.m
    cdef double N = _normal_force(theta, T, &a, p)
    cdef double F_mu = 0.0 if N >= 0.0 else p.mu
    cdef double fric, du_free, fric_mag
    if not p.opposing:
        fric = F_mu * N
        return -q * w - p.g * sin_th + inv_m * (a.L * sin_a - a.D * cos_a + T - fric)
    du_free = -q * w - p.g * sin_th + inv_m * (a.L * sin_a - a.D * cos_a + T)
    fric_mag = F_mu * fabs(N)
    if u > 0.0:
        return du_free - inv_m * fric_mag
    if u < 0.0:
        return du_free + inv_m * fric_mag
    if fabs(du_free) * p.m <= fric_mag:
        return 0.0
    if du_free > 0.0:
        return du_free - inv_m * fric_mag
    return du_free + inv_m * fric_mag


cdef inline double _dw(double u, double w, double q, double theta, Params* p) noexcept nogil:
    cdef Aero a = _aero(u, w, p)
    cdef double cos_th = cos(theta)
    cdef double sin_a = sin(a.alpha)
    cdef double cos_a = cos(a.alpha)
    cdef double inv_m = 1.0 / p.m
    return q * u + p.g * cos_th + inv_m * (-a.D * sin_a - a.L * cos_a)


def run_closed_loop(plan):
    """Run the full closed loop for a scenario plan built by the simulator.

    Returns (data, phase_idx, status): per-step rows in COLUMNS order, the
    phase index per step, and the termination status.
    """
    cdef Params p
    p.m = plan["m"]; p.S = plan["S"]; p.rho = plan["rho"]
    p.C_L_max = plan["C_L_max"]; p.mu = plan["mu"]; p.g = plan["g"]
    p.C_L0 = plan["C_L0"]; p.C_L_alpha = plan["C_L_alpha"]
    p.C_D0 = plan["C_D0"]; p.k_induced = plan["k_induced"]
    p.opposing = 1 if plan["opposing"] else 0

    cdef double k_T = plan["k_T"]
    cdef double k_theta = plan["k_theta"]
    cdef double k_q = plan["k_q"]
    cdef double sat_L = plan["sat_L"]
    cdef double sat_M = plan["sat_M"]
    cdef double sat_n = M_PI / (2.0 * (sat_M - sat_L)) if sat_M != sat_L else 0.0
    cdef double th_lim = plan["th_lim"]
    cdef double pc = plan["pc"]
    cdef double pd = plan["pd"]
    cdef double e1_sfac = plan["e1_sfac"]
    cdef double e1_rate = plan["e1_rate"]
    cdef double dt = plan["dt"]
    cdef bint clamp = 1 if plan["clamp"] else 0
    cdef bint landing = 1 if plan["landing"] else 0
    cdef double stop_speed = plan["stop_speed"]
    cdef Py_ssize_t n_steps = plan["n_steps"]
    cdef double thr_a = plan["thr_a"]
    cdef double thr_b = plan["thr_b"]
    cdef double thr_c = plan["thr_c"]

    seg_t0_arr = np.ascontiguousarray(plan["seg_t0"], dtype=np.float64)
    seg_end_arr = np.ascontiguousarray(plan["seg_end"], dtype=np.float64)
    seg_dur_arr = np.ascontiguousarray(plan["seg_dur"], dtype=np.float64)
    seg_v0_arr = np.ascontiguousarray(plan["seg_v0"], dtype=np.float64)
    seg_v1_arr = np.ascontiguousarray(plan["seg_v1"], dtype=np.float64)
    cdef double[::1] seg_t0 = seg_t0_arr
    cdef double[::1] seg_end = seg_end_arr
    cdef double[::1] seg_dur = seg_dur_arr
    cdef double[::1] seg_v0 = seg_v0_arr
    cdef double[::1] seg_v1 = seg_v1_arr
    cdef Py_ssize_t n_seg = seg_t0.shape[0]

    data_arr = np.empty((n_steps, NCOLS), dtype=np.float64)
    phase_arr = np.empty(n_steps, dtype=np.int64)
    cdef double[:, ::1] data = data_arr
    cdef long long[::1] phase_idx = phase_arr

    cdef double u = plan["u0"]
    cdef double w = plan["w0"]
    cdef double th = plan["th0"]
    cdef double q = plan["q0"]
    cdef double h = plan["h0"]
    cdef int phase = 0
    cdef int status = STATUS_HORIZON
    cdef Py_ssize_t n_rec = 0

    cdef Py_ssize_t k, i
    cdef double t, dur, dv, s
    cdef double V_d, dV_d, ddV_d, ex, g1, th_d, q_d, dq_d
    cdef Aero a
    cdef double sin_th, sin_a, cos_a, tma, cos_tma, sin_tma
    cdef double e1, e2, e3, sig, B, C_term, N0, T_raw, T, tau, N, F_mu
    cdef double denom, numer
    cdef double Vlyap, Vdot1, Vdot2, Vdot3, Vdot_total
    cdef double k1u, k1t, k1q, k2u, k2t, k2q, k3u, k3t, k3q, k4u, k4t, k4q
    cdef double k1w, k1h, k2w, k2h, k3w, k3h, k4w, k4h
    cdef double us, ws, ths, qs, hs
    cdef double u_n, w_n, th_n, q_n, h_n

    for k in range(n_steps):
        t = k * dt

        # reference speed along the cubic-ease profile
        i = 0
        while i < n_seg and t >= seg_end[i]:
            i += 1
        if i == n_seg:
            V_d = seg_v1[n_seg - 1]
            dV_d = 0.0
            ddV_d = 0.0
        else:
            dur = seg_dur[i]
            dv = seg_v1[i] - seg_v0[i]
            s = (t - seg_t0[i]) / dur
            V_d = seg_v0[i] + dv * (s * s * (3.0 - 2.0 * s))
            dV_d = dv * (6.0 * s - 6.0 * s * s) / dur
            ddV_d = dv * (6.0 - 12.0 * s) / (dur * dur)

        # pitch reference chain
        ex = exp(-0.5 * (V_d - pc) * (V_d - pc) / (pd * pd))
        th_d = th_lim * ex
        g1 = -(V_d - pc) / (pd * pd)
        q_d = th_d * g1 * dV_d
        dq_d = th_d * ((g1 * g1 - 1.0 / (pd * pd)) * dV_d * dV_d + g1 * ddV_d)

        # controller
        a = _aero(u, w, &p)
        sin_th = sin(th)
        sin_a = sin(a.alpha)
        cos_a = cos(a.alpha)
        tma = th - a.alpha
        cos_tma = cos(tma)
        sin_tma = sin(tma)
        e1 = u - V_d
        sig = _saturate(e1, sat_L, sat_M, sat_n)
        B = (
            -e1_sfac * k_T * sig
            + p.m * (q * w + p.g * sin_th + dV_d)
            - a.L * sin_a
            + a.D * cos_a
        )
        C_term = a.L * cos_tma - a.D * sin_tma - p.m * p.g
        N0 = C_term + B * sin_th
        if N0 >= 0.0:
            T_raw = B
        elif p.opposing and u > 0.0:
            denom = 1.0 + p.mu * sin_th
            numer = B - p.mu * C_term
            T_raw = numer / denom
        elif p.opposing and u == 0.0:
            T_raw = B
        else:
            denom = 1.0 - p.mu * sin_th
            numer = B + p.mu * C_term
            T_raw = numer / denom
        T = 0.0 if (clamp and T_raw < 0.0) else T_raw
        e2 = th - th_d
        e3 = q - q_d
        tau = -k_theta * e2 - k_q * e3 + dq_d

        N = _normal_force(th, T, &a, &p)
        F_mu = 0.0 if N >= 0.0 else p.mu

        # monitor
        Vlyap = 0.5 * (e1 * e1 + e2 * e2 + e3 * e3)
        Vdot1 = -e1_rate * k_T * e1 * sig
        Vdot2 = -k_q * e3 * e3
        Vdot3 = e2 * e3 * (1.0 - k_theta)
        Vdot_total = Vdot1 + Vdot2 + Vdot3

        # phase machine (chained adjacent transitions)
        if landing:
            while True:
                if phase == 0 and u <= thr_a:
                    phase = 1
                elif phase == 1 and h >= 0.0:
                    phase = 2
                elif phase == 2 and u <= thr_b:
                    phase = 3
                else:
                    break
        else:
            while True:
                if phase == 0 and u >= thr_a:
                    phase = 1
                elif phase == 1 and u >= thr_b:
                    phase = 2
                elif phase == 2 and u >= thr_c and N >= 0.0:
                    phase = 3
                else:
                    break

        data[k, 0] = t
        data[k, 1] = u
        data[k, 2] = w
        data[k, 3] = th
        data[k, 4] = q
        data[k, 5] = h
        data[k, 6] = a.V
        data[k, 7] = V_d
        data[k, 8] = dV_d
        data[k, 9] = th_d
        data[k, 10] = q_d
        data[k, 11] = dq_d
        data[k, 12] = e1
        data[k, 13] = e2
        data[k, 14] = e3
        data[k, 15] = T
        data[k, 16] = tau
        data[k, 17] = N
        data[k, 18] = F_mu
        data[k, 19] = Vlyap
        data[k, 20] = Vdot1
        data[k, 21] = Vdot2
        data[k, 22] = Vdot3
        data[k, 23] = Vdot_total
        phase_idx[k] = phase
        n_rec = k + 1

        if landing and phase == 3 and u <= stop_speed:
            status = STATUS_STOPPED
            break

        # integrate one step, command held constant
        if h >= 0.0 and N < 0.0:
            # wheels loaded: only (u, theta, q) integrate; w = u tan(theta), h = 0
            k1u = _du(u, u * tan(th), q, th, T, &p)
            k1t = q
            k1q = tau
            us = u + 0.5 * dt * k1u
            ths = th + 0.5 * dt * k1t
            qs = q + 0.5 * dt * k1q
            k2u = _du(us, us * tan(ths), qs, ths, T, &p)
            k2t = qs
            k2q = tau
            us = u + 0.5 * dt * k2u
            ths = th + 0.5 * dt * k2t
            qs = q + 0.5 * dt * k2q
            k3u = _du(us, us * tan(ths), qs, ths, T, &p)
            k3t = qs
            k3q = tau
            us = u + dt * k3u
            ths = th + dt * k3t
            qs = q + dt * k3q
            k4u = _du(us, us * tan(ths), qs, ths, T, &p)
            k4t = qs
            k4q = tau
            u_n = u + dt * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
            th_n = th + dt * (k1t + 2.0 * k2t + 2.0 * k3t + k4t) / 6.0
            q_n = q + dt * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
            u = u_n
            th = th_n
            q = q_n
            w = u_n * tan(th_n)
            h = 0.0
        else:
            k1u = _du(u, w, q, th, T, &p)
            k1w = _dw(u, w, q, th, &p)
            k1t = q
            k1q = tau
            k1h = -u * sin(th) + w * cos(th)
            us = u + 0.5 * dt * k1u
            ws = w + 0.5 * dt * k1w
            ths = th + 0.5 * dt * k1t
            qs = q + 0.5 * dt * k1q
            hs = h + 0.5 * dt * k1h
            k2u = _du(us, ws, qs, ths, T, &p)
            k2w = _dw(us, ws, qs, ths, &p)
            k2t = qs
            k2q = tau
            k2h = -us * sin(ths) + ws * cos(ths)
            us = u + 0.5 * dt * k2u
            ws = w + 0.5 * dt * k2w
            ths = th + 0.5 * dt * k2t
            qs = q + 0.5 * dt * k2q
            hs = h + 0.5 * dt * k2h
            k3u = _du(us, ws, qs, ths, T, &p)
            k3w = _dw(us, ws, qs, ths, &p)
            k3t = qs
            k3q = tau
            k3h = -us * sin(ths) + ws * cos(ths)
            us = u + dt * k3u
            ws = w + dt * k3w
            ths = th + dt * k3t
            qs = q + dt * k3q
            hs = h + dt * k3h
            k4u = _du(us, ws, qs, ths, T, &p)
            k4w = _dw(us, ws, qs, ths, &p)
            k4t = qs
            k4q = tau
            k4h = -us * sin(ths) + ws * cos(ths)
            u_n = u + dt * (k1u + 2.0 * k2u + 2.0 * k3u + k4u) / 6.0
            w_n = w + dt * (k1w + 2.0 * k2w + 2.0 * k3w + k4w) / 6.0
            th_n = th + dt * (k1t + 2.0 * k2t + 2.0 * k3t + k4t) / 6.0
            q_n = q + dt * (k1q + 2.0 * k2q + 2.0 * k3q + k4q) / 6.0
            h_n = h + dt * (k1h + 2.0 * k2h + 2.0 * k3h + k4h) / 6.0
            if h_n >= 0.0:
                h_n = 0.0
                w_n = u_n * tan(th_n)
            u = u_n
            w = w_n
            th = th_n
            q = q_n
            h = h_n

        if not (isfinite(u) and isfinite(w) and isfinite(th) and isfinite(q) and isfinite(h)):
            status = STATUS_BLOWUP
            break

    return data_arr[:n_rec], phase_arr[:n_rec], status
