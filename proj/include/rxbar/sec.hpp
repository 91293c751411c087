#pragma once

// Hardware-security primitives on the crossbar.
//
// TRNG: one cell is armed into the deep-RESET fixed point, then hit with a
// short SET probe whose amplitude sits on the switching threshold.  Per-pulse
// threshold and rate jitter decide whether the cell crosses the read
// boundary, so each trial yields one physical bit.  The probe amplitude is
// calibrated by bisection against the measured ones-rate.  The official
// output stream is the von Neumann-corrected sequence, which is exactly
// unbiased for any stationary source with per-trial independence of the
// decision noise; the raw pre-corrector bits are also exposed.  The whole
// pipeline requires cycle-to-cycle jitter to be enabled -- with it off the
// cell is deterministic and the generator refuses to run.
//
// PUF: a freshly formed array (every cell driven to its low-resistance
// state) inherits per-device resistance spread from fabrication variation.
// A challenge seeds a device-independent shuffle that pairs up cells; each
// response bit compares the read energies of a pair.  Uniqueness comes from
// device-to-device variation, unreliability from re-formation jitter.
//
// Weight locking: quantized network weights (2-bit levels) are XOR-masked
// with a keystream expanded from the chip's PUF responses.  Masking is an
// involution, so unlocking with the enrolled chip restores the exact levels
// while any other chip yields scrambled weights.

#include <array>
#include <cstdint>
#include <vector>

#include "rxbar/xbar.hpp"

namespace rxbar {

// ---------------------------------------------------------------------------
// True random number generation
// ---------------------------------------------------------------------------

struct TrngConfig {
    int row = 0;
    int col = 0;
    double rearm_v = -2.0;      // deep-RESET between trials
    double rearm_width = 1e-6;
    double probe_width = 1e-7;  // metastable SET probe
    double read_v = 0.2;
    double read_width = 1e-7;
    double dt = 1e-8;
    double target_p = 0.5;      // ones-rate the calibration aims for
    double tol = 0.01;          // accepted |p_hat - target_p|
    int probe_trials = 10000;   // trials per calibration probe
    int max_iters = 50;         // bisection budget

    void validate() const;
};

/// Find the probe amplitude whose measured ones-rate is within cfg.tol of
/// cfg.target_p.  Bisects over [0.8, 1.4] * v_set_th of the cell's own
/// instance.  Throws Error(calibration) when the budget runs out and
/// Error(config) when cycle jitter is disabled.
[[nodiscard]] double trng_calibrate(Crossbar& xbar, const TrngConfig& cfg);

/// One physical bit: rearm, probe at `amplitude`, threshold read.
[[nodiscard]] bool trng_bit(Crossbar& xbar, const TrngConfig& cfg, double amplitude);

/// n raw (pre-corrector) bits.
[[nodiscard]] std::vector<std::uint8_t> trng_raw(Crossbar& xbar, const TrngConfig& cfg,
                                                 double amplitude, std::size_t n);

/// von Neumann corrector: consumes bits in pairs, emits the first bit of
/// each discordant pair.  Exactly removes bias of an independent source.
[[nodiscard]] std::vector<std::uint8_t> von_neumann(const std::vector<std::uint8_t>& raw);

/// Corrected bits: raw trials are generated until n corrected bits exist.
[[nodiscard]] std::vector<std::uint8_t> trng_output(Crossbar& xbar, const TrngConfig& cfg,
                                                    double amplitude, std::size_t n);

struct RandomnessReport {
    std::size_t n = 0;
    double ones_fraction = 0.0;
    double monobit_z = 0.0;
    double runs_z = 0.0;
    double z_critical = 0.0;
    bool monobit_pass = false;
    bool runs_pass = false;
    bool pass = false; // both
};

/// Frequency (monobit) and Wald-Wolfowitz runs tests, two-sided.  alpha must
/// be 0.01 or 0.05 (the critical values are pinned).  Degenerate streams
/// (all zeros / all ones) fail both tests.
[[nodiscard]] RandomnessReport randomness_tests(const std::vector<std::uint8_t>& bits,
                                                double alpha = 0.01);

// ---------------------------------------------------------------------------
// Physical unclonable function
// ---------------------------------------------------------------------------

struct PufConfig {
    int rows = 32;
    int cols = 16;
    int response_bits = 128;
    double form_v = 2.0;  // full-SET formation pulse
    double form_width = 1e-6;
    double clear_v = -2.0; // RESET sweep preceding each (re)formation
    double clear_width = 1e-6;
    double read_v = 0.2;
    double read_width = 1e-7;
    double dt = 1e-8;

    void validate() const;
};

/// RESET-then-SET every cell, row by row.  Re-forming an already formed chip
/// draws fresh cycle jitter, which is what makes re-reads imperfect.
void puf_form(Crossbar& xbar, const PufConfig& cfg);

/// Response to one challenge: the challenge seeds a device-independent
/// shuffle pairing 2*response_bits distinct cells; bit i is 1 when the first
/// cell of pair i dissipates more read energy (= lower resistance) than the
/// second.  Ties resolve to 0.  Throws Error(capacity) when the array cannot
/// host that many pairs.
[[nodiscard]] std::vector<std::uint8_t> puf_response(Crossbar& xbar, const PufConfig& cfg,
                                                     std::uint64_t challenge);

struct PufHealth {
    double log_r_dispersion = 0.0; // std dev of ln R across formed cells
    bool pass = false;             // >= 0.01 required for PUF-grade spread
};

/// Dispersion check on a formed chip.  Chips built without fabrication
/// variation fail it and are rejected by the locking flow.
[[nodiscard]] PufHealth puf_health(const Crossbar& xbar);

struct PufMetrics {
    double uniqueness_pct = 0.0;   // mean pairwise inter-chip hamming distance
    double uniformity_pct = 0.0;   // mean ones-rate per response
    double bit_aliasing_pct = 0.0; // mean per-position ones-rate across chips
    double reliability_pct = 0.0;  // 100 - mean intra-chip HD over re-formations
    int n_chips = 0;
    int m_rereads = 0;
};

/// Build n_chips chips (seeds base_seed..base_seed+n-1), form each, take the
/// golden response to `challenge`, then re-form m_rereads times per chip and
/// compare.  Uses the chips' default variation (both D2D and cycle jitter).
/// When golden_out is non-null it receives the per-chip golden responses.
[[nodiscard]] PufMetrics puf_metrics(const DeviceParams& nominal, const VariationSpec& var,
                                     const PufConfig& cfg, int n_chips, int m_rereads,
                                     std::uint64_t base_seed, std::uint64_t challenge,
                                     std::vector<std::vector<std::uint8_t>>* golden_out = nullptr);

// ---------------------------------------------------------------------------
// Weight locking
// ---------------------------------------------------------------------------

/// Keystream expansion: responses to challenges 0,1,2,... concatenated until
/// n_bits are available.  Requires a healthy (PUF-grade) formed chip.
[[nodiscard]] std::vector<std::uint8_t> puf_keystream(Crossbar& xbar, const PufConfig& cfg,
                                                      std::size_t n_bits);

/// XOR-mask 2-bit weight levels (each in 0..3) with two keystream bits per
/// weight.  Involution: applying it twice with the same keystream is the
/// identity.  Throws Error(capacity) when the keystream is shorter than
/// 2*levels.size() bits.
[[nodiscard]] std::vector<int> mask_levels(const std::vector<int>& levels,
                                           const std::vector<std::uint8_t>& keystream);

// ---------------------------------------------------------------------------
// Quantized MLP demo (the asset weight locking protects)
// ---------------------------------------------------------------------------

/// 4-8-2 fully connected net with ReLU hidden units.  Every parameter is a
/// 2-bit level in 0..3 mapped to the value (level - 1.5) * scale.  Layout:
/// hidden weights row-major (8x4), hidden biases (8), output weights (2x8),
/// output biases (2) -- 58 levels total.
struct QuantizedMlp {
    static constexpr int kInputs = 4;
    static constexpr int kHidden = 8;
    static constexpr int kOutputs = 2;
    static constexpr int kParams = kHidden * kInputs + kHidden + kOutputs * kHidden + kOutputs;

    std::vector<int> levels; // kParams entries, each 0..3
    double scale = 1.0;

    [[nodiscard]] double value(int idx) const { return (levels[(std::size_t)idx] - 1.5) * scale; }
    [[nodiscard]] int infer(const std::array<double, kInputs>& x) const; // argmax, tie -> 0
};

struct Dataset {
    std::vector<std::array<double, QuantizedMlp::kInputs>> x;
    std::vector<int> y;
};

/// Random reference net whose own labels on a probe set are balanced (30-70%
/// class 1); redraws until that holds.
[[nodiscard]] QuantizedMlp make_reference_mlp(std::uint64_t seed);

/// Inputs uniform in [-1,1]^4, labels produced by `ref` itself, so the
/// reference net scores 100% by construction.
[[nodiscard]] Dataset make_dataset(const QuantizedMlp& ref, int n, std::uint64_t seed);

[[nodiscard]] double accuracy(const QuantizedMlp& net, const Dataset& data);

} // namespace rxbar
