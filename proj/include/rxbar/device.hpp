#pragma once

// Behavioral model of a bipolar threshold-switching resistive memory cell.
//
// The device carries one internal state variable x in [0,1]: the normalized
// conductive filament fraction.  Conduction is a parallel mix of the fully
// formed (r_on) and fully dissolved (r_off) paths:
//
//     R(x) = 1 / (x / r_on + (1 - x) / r_off)
//
// Switching is threshold-gated and polarity-dependent.  With v the voltage
// across the device (not including any series selector):
//
//     v > v_set_th:    dx/dt = +k_set   * ((v - v_set_th) / v_set_th)^alpha_set   * (1 - x)
//     v < v_reset_th:  dx/dt = -k_reset * ((v_reset_th - v) / |v_reset_th|)^alpha_reset * x
//     otherwise:       dx/dt = 0        (deadband; the state is bit-exactly preserved)
//
// RESET additionally self-limits: once the magnitude of dx/dt falls below
// `reset_rate_floor`, dissolution stops for the remainder of the pulse.  The
// filament stabilizes where the drive can no longer sustain dissolution, so
// the final state is addressed by the pulse amplitude:
//
//     x_sat(v) = reset_rate_floor / (k_reset * od(v)^alpha_reset)
//
// This is what makes gradual multi-level programming possible on the RESET
// side.  SET has no such floor and runs to saturation (x -> 1) if driven long
// enough.  One consequence worth internalizing: a "full" RESET at the default
// -2 V does not return the cell to x = 0.  It lands at x_sat(-2 V) = 0.01,
// about 503 kOhm with default parameters.  That is the operational
// high-resistance state; pristine x = 0 (1 MOhm) is only seen on never-formed
// cells.
//
// Integration is explicit Euler at a fixed dt with a final partial step so
// the pulse width is honored exactly.  dt is part of the experiment
// definition: runs only replay bit-identically at the same dt.

#include <cstdint>
#include <vector>

#include "rxbar/rng.hpp"

namespace rxbar {

/// Nominal device parameters (one physical corner).  Per-cell instances are
/// drawn from these via sample_instance().
struct DeviceParams {
    double r_on = 10e3;   // Ohm, fully formed filament
    double r_off = 1e6;   // Ohm, fully dissolved filament
    double v_set_th = 1.0;    // V, SET threshold (> 0)
    double v_reset_th = -1.0; // V, RESET threshold (< 0)
    double k_set = 1e7;   // 1/s, SET rate prefactor
    double k_reset = 1e7; // 1/s, RESET rate prefactor
    double alpha_set = 1.0;
    double alpha_reset = 1.0;
    double reset_rate_floor = 1e5; // 1/s, RESET self-limit (see header comment)

    /// Throws Error(config) naming the offending field if any invariant is
    /// violated (positive resistances, r_off > r_on, signed thresholds, ...).
    void validate() const;
};

/// Dynamic state of one cell.  `cycle_count` counts applied pulse events
/// (every pulse with nonzero drive, switching or not) and is the replay
/// anchor for cycle-to-cycle variation: the jitter draws for pulse N are a
/// pure function of (cell identity, N), so a reloaded array continues with
/// exactly the draws it would have seen without the save/load.
struct DeviceState {
    double x = 0.0;
    std::uint64_t cycle_count = 0;
};

/// Variation model.  Device-to-device (D2D) draws happen once per cell at
/// array construction; cycle-to-cycle (C2C) draws happen once per applied
/// pulse.
struct VariationSpec {
    bool d2d_enabled = true;
    bool c2c_enabled = true;
    double d2d_sigma_r = 0.10;   // std of log: r scales by exp(sigma * z)
    double d2d_sigma_th = 0.02;  // V, additive shift on both thresholds
    double c2c_sigma_th = 0.002; // V, per-pulse threshold jitter
    double c2c_sigma_rate = 0.03; // std of log: k scales by exp(sigma * z) per pulse

    void validate() const;
};

/// A single rectangular voltage pulse applied directly across the device.
struct Pulse {
    double amplitude = 0.0; // V
    double width = 1e-6;    // s
    double dt = 1e-9;       // s, Euler step
};

/// One integration sample: time from pulse start, device voltage, current.
struct PulseSample {
    double t;
    double v;
    double i;
};

struct PulseResult {
    DeviceState state;
    bool switched = false; // true if x moved at all during the pulse
    std::vector<PulseSample> samples; // boundary samples, width/dt + 1 of them (+ trailing partial)
};

/// Per-pulse effective parameters after C2C jitter.  Draw order is pinned
/// (set threshold, reset threshold, set rate, reset rate) so replays agree.
struct EffectivePulse {
    double v_set_th;
    double v_reset_th;
    double k_set;
    double k_reset;
};

EffectivePulse make_effective(const DeviceParams& p, const VariationSpec& var, bool c2c, RngStream& rng);

/// R(x) for a given cell.
[[nodiscard]] double resistance(const DeviceState& st, const DeviceParams& p);

/// dx/dt under the threshold law, including the RESET rate floor.  Returns
/// exactly 0.0 inside the deadband.
[[nodiscard]] double switching_rate(double v_dev, double x, const EffectivePulse& eff, const DeviceParams& p);

/// Integrate one pulse.  C2C jitter (if enabled) is drawn once at pulse start
/// from `rng`; the caller owns the stream discipline.  Increments
/// cycle_count when the pulse has nonzero amplitude.
PulseResult apply_pulse(const DeviceState& st, const DeviceParams& p, const Pulse& pulse,
                        const VariationSpec& var, bool c2c, RngStream& rng);

/// Draw one device instance from the nominal corner.  Resamples (up to 100
/// attempts) if a draw violates the parameter invariants, then throws
/// Error(runtime).  With d2d disabled this is an exact copy and consumes no
/// randomness.
DeviceParams sample_instance(const DeviceParams& nominal, const VariationSpec& var, RngStream& rng);

// ---------------------------------------------------------------------------
// Multi-level programming
// ---------------------------------------------------------------------------

/// A calibrated resistance ladder.  Level 0 is the lowest-resistance state
/// (programmed with a plain SET); levels 1..n-1 are amplitude-addressed RESET
/// saturation states, lowest amplitude first.  `read_boundaries[k]` separates
/// level k from level k+1 (geometric means of adjacent targets).
struct LevelConfig {
    int n_levels = 6;
    std::vector<double> targets;          // Ohm, strictly increasing, size n_levels
    std::vector<double> reset_amplitudes; // V (negative), size n_levels - 1, for levels 1..n-1
    std::vector<double> read_boundaries;  // Ohm, size n_levels - 1
    double set_amplitude = 2.0;  // V, used for level 0 and as programming preamble
    double set_width = 1e-6;     // s
    double reset_width = 6e-6;   // s, long enough to reach the rate-floor plateau
    double dt = 1e-9;

    void validate(const DeviceParams& p) const;
};

/// Build the target ladder for n levels: log-spaced from 1.2 * r_on up to
/// 0.7 * r_off, with read boundaries at the geometric means.  Amplitudes are
/// left empty; call calibrate_reset_amplitudes() to fill them.
LevelConfig make_level_targets(const DeviceParams& p, int n_levels);

/// Solve (by bisection on the pulse amplitude, jitter off) for the RESET
/// amplitudes that land each target resistance after a full SET preamble.
/// Deterministic; throws Error(calibration) if a target is unreachable.
void calibrate_reset_amplitudes(LevelConfig& cfg, const DeviceParams& p);

/// Program one cell to level k: full SET, then (for k > 0) the calibrated
/// RESET at reset_amplitudes[k-1].  Returns the new state.
DeviceState program_level(const DeviceState& st, const DeviceParams& p, const LevelConfig& cfg,
                          int level, const VariationSpec& var, bool c2c, RngStream& rng);

/// Classify the cell's resistance against the read boundaries.  Ties land on
/// the lower level.
[[nodiscard]] int read_level(const DeviceState& st, const DeviceParams& p, const LevelConfig& cfg);

} // namespace rxbar
