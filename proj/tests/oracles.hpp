#pragma once

// Independent reference computations used by the tests.  These are written
// against the model *equations*, not against the library implementation, so
// that an implementation bug cannot silently agree with its own oracle.

#include <cmath>
#include <cstdint>
#include <vector>

#include "rxbar/device.hpp"

namespace oracle {

// R(x) recomputed from scratch.
inline double resistance(double x, double r_on, double r_off) {
    return 1.0 / (x / r_on + (1.0 - x) / r_off);
}

// Closed-form SET trajectory at a constant device voltage v > v_set_th with
// alpha_set = 1:  dx/dt = k * od * (1 - x)  =>  x(t) = 1 - (1 - x0) e^{-k od t}.
inline double set_closed_form(double x0, double v, double t, const rxbar::DeviceParams& p) {
    double od = (v - p.v_set_th) / p.v_set_th;
    return 1.0 - (1.0 - x0) * std::exp(-p.k_set * od * t);
}

// Closed-form RESET trajectory with alpha_reset = 1 and the rate floor:
// exponential decay that freezes at x_sat = floor / (k * od).
inline double reset_closed_form(double x0, double v, double t, const rxbar::DeviceParams& p) {
    double od = (p.v_reset_th - v) / std::abs(p.v_reset_th);
    double x_sat = p.reset_rate_floor / (p.k_reset * od);
    if (x0 * p.k_reset * od < p.reset_rate_floor) return x0; // already below the floor
    double x = x0 * std::exp(-p.k_reset * od * t);
    return std::max(x, x_sat);
}

// Fine-step forward integration of the full rate law (both branches, floor,
// general alpha), written independently of the library's integrator.  Used
// to cross-check apply_pulse at coarser dt.
inline double integrate_reference(double x0, double v, double width, double dt_fine,
                                  const rxbar::DeviceParams& p) {
    double x = x0;
    double t = 0.0;
    while (t < width) {
        double h = std::min(dt_fine, width - t);
        double dxdt = 0.0;
        if (v > p.v_set_th) {
            double od = (v - p.v_set_th) / p.v_set_th;
            dxdt = p.k_set * std::pow(od, p.alpha_set) * (1.0 - x);
        } else if (v < p.v_reset_th) {
            double od = (p.v_reset_th - v) / std::abs(p.v_reset_th);
            double mag = p.k_reset * std::pow(od, p.alpha_reset) * x;
            dxdt = (mag < p.reset_rate_floor) ? 0.0 : -mag;
        }
        x += dxdt * h;
        if (x < 0.0) x = 0.0;
        if (x > 1.0) x = 1.0;
        t += h;
    }
    return x;
}

// Energy of a constant-voltage pulse into a *fixed* resistance (no switching):
// E = v^2 / R * width.  Exact for deadband pulses.
inline double static_energy(double v, double r, double width) { return v * v / r * width; }

// Ternary little-endian digits -> value, via unsigned 128-bit arithmetic.
template <typename Digit>
inline unsigned __int128 trits_value(const std::vector<Digit>& digits) {
    unsigned __int128 v = 0;
    for (std::size_t i = digits.size(); i-- > 0;)
        v = v * 3 + static_cast<unsigned>(digits[i]);
    return v;
}

// value -> ternary little-endian digits (at least min_len of them).
inline std::vector<int> trits_of(unsigned __int128 v, int min_len) {
    std::vector<int> d;
    while (v > 0) {
        d.push_back(static_cast<int>(v % 3));
        v /= 3;
    }
    while (static_cast<int>(d.size()) < min_len) d.push_back(0);
    return d;
}

// Two-sided binomial z statistic for k successes in n trials at rate p0.
inline double binomial_z(double k, double n, double p0) {
    return (k - n * p0) / std::sqrt(n * p0 * (1.0 - p0));
}

// Population standard deviation.
inline double stddev(const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

inline double mean(const std::vector<double>& xs) {
    double m = 0.0;
    for (double x : xs) m += x;
    return m / static_cast<double>(xs.size());
}

} // namespace oracle
