#include "rxbar/device.hpp"

#include <cmath>
#include <string>

#include "rxbar/errors.hpp"

namespace rxbar {

void DeviceParams::validate() const {
    if (!(r_on > 0.0)) throw_config("device: r_on must be positive");
    if (!(r_off > r_on)) throw_config("device: r_off must exceed r_on");
    if (!(v_set_th > 0.0)) throw_config("device: v_set_th must be positive");
    if (!(v_reset_th < 0.0)) throw_config("device: v_reset_th must be negative");
    if (!(k_set > 0.0)) throw_config("device: k_set must be positive");
    if (!(k_reset > 0.0)) throw_config("device: k_reset must be positive");
    if (!(alpha_set > 0.0)) throw_config("device: alpha_set must be positive");
    if (!(alpha_reset > 0.0)) throw_config("device: alpha_reset must be positive");
    if (!(reset_rate_floor >= 0.0)) throw_config("device: reset_rate_floor must be non-negative");
}

void VariationSpec::validate() const {
    if (!(d2d_sigma_r >= 0.0)) throw_config("variation: d2d_sigma_r must be non-negative");
    if (!(d2d_sigma_th >= 0.0)) throw_config("variation: d2d_sigma_th must be non-negative");
    if (!(c2c_sigma_th >= 0.0)) throw_config("variation: c2c_sigma_th must be non-negative");
    if (!(c2c_sigma_rate >= 0.0)) throw_config("variation: c2c_sigma_rate must be non-negative");
}

EffectivePulse make_effective(const DeviceParams& p, const VariationSpec& var, bool c2c, RngStream& rng) {
    EffectivePulse eff{p.v_set_th, p.v_reset_th, p.k_set, p.k_reset};
    if (c2c && var.c2c_enabled) {
        // Pinned draw order; four normals per pulse, always.
        eff.v_set_th += var.c2c_sigma_th * rng.normal();
        eff.v_reset_th += var.c2c_sigma_th * rng.normal();
        eff.k_set *= rng.lognormal_factor(var.c2c_sigma_rate);
        eff.k_reset *= rng.lognormal_factor(var.c2c_sigma_rate);
    }
    return eff;
}

double resistance(const DeviceState& st, const DeviceParams& p) {
    return 1.0 / (st.x / p.r_on + (1.0 - st.x) / p.r_off);
}

double switching_rate(double v_dev, double x, const EffectivePulse& eff, const DeviceParams& p) {
    if (v_dev > eff.v_set_th) {
        double od = (v_dev - eff.v_set_th) / eff.v_set_th;
        return eff.k_set * std::pow(od, p.alpha_set) * (1.0 - x);
    }
    if (v_dev < eff.v_reset_th) {
        double od = (eff.v_reset_th - v_dev) / std::abs(eff.v_reset_th);
        double mag = eff.k_reset * std::pow(od, p.alpha_reset) * x;
        // Self-limiting RESET: below the floor the filament holds.
        if (mag < p.reset_rate_floor) return 0.0;
        return -mag;
    }
    return 0.0;
}

PulseResult apply_pulse(const DeviceState& st, const DeviceParams& p, const Pulse& pulse,
                        const VariationSpec& var, bool c2c, RngStream& rng) {
    if (!(pulse.width > 0.0)) throw_config("pulse: width must be positive");
    if (!(pulse.dt > 0.0)) throw_config("pulse: dt must be positive");

    EffectivePulse eff = make_effective(p, var, c2c, rng);

    PulseResult out;
    out.state = st;
    double x = st.x;
    double t = 0.0;
    out.samples.push_back({0.0, pulse.amplitude, pulse.amplitude / resistance({x, 0}, p)});
    while (t < pulse.width) {
        double h = std::min(pulse.dt, pulse.width - t);
        double rate = switching_rate(pulse.amplitude, x, eff, p);
        if (rate != 0.0) {
            x += rate * h;
            if (x < 0.0) x = 0.0;
            if (x > 1.0) x = 1.0;
            out.switched = true;
        }
        t += h;
        out.samples.push_back({t, pulse.amplitude, pulse.amplitude / resistance({x, 0}, p)});
    }
    out.state.x = x;
    if (pulse.amplitude != 0.0) out.state.cycle_count = st.cycle_count + 1;
    return out;
}

DeviceParams sample_instance(const DeviceParams& nominal, const VariationSpec& var, RngStream& rng) {
    if (!var.d2d_enabled) return nominal;
    for (int attempt = 0; attempt < 100; attempt++) {
        DeviceParams q = nominal;
        q.r_on = nominal.r_on * rng.lognormal_factor(var.d2d_sigma_r);
        q.r_off = nominal.r_off * rng.lognormal_factor(var.d2d_sigma_r);
        q.v_set_th = nominal.v_set_th + var.d2d_sigma_th * rng.normal();
        q.v_reset_th = nominal.v_reset_th + var.d2d_sigma_th * rng.normal();
        if (q.r_off > q.r_on && q.v_set_th > 0.0 && q.v_reset_th < 0.0) return q;
    }
    throw_runtime("variation: no valid device instance after 100 attempts "
                  "(sigma too large for the parameter corner)");
}

// ---------------------------------------------------------------------------
// Multi-level programming
// ---------------------------------------------------------------------------

void LevelConfig::validate(const DeviceParams& p) const {
    if (n_levels < 2) throw_config("levels: n_levels must be at least 2");
    if (static_cast<int>(targets.size()) != n_levels)
        throw_config("levels: targets size must equal n_levels");
    if (static_cast<int>(read_boundaries.size()) != n_levels - 1)
        throw_config("levels: read_boundaries size must equal n_levels - 1");
    if (static_cast<int>(reset_amplitudes.size()) != n_levels - 1)
        throw_config("levels: reset_amplitudes size must equal n_levels - 1 (run calibration)");
    for (int k = 0; k < n_levels; k++) {
        if (!(targets[k] > p.r_on && targets[k] < p.r_off))
            throw_config("levels: target " + std::to_string(k) + " outside (r_on, r_off)");
        if (k > 0 && !(targets[k] > targets[k - 1]))
            throw_config("levels: targets must be strictly increasing");
    }
    for (int k = 0; k + 1 < n_levels; k++) {
        if (!(read_boundaries[k] > targets[k] && read_boundaries[k] < targets[k + 1]))
            throw_config("levels: read boundary " + std::to_string(k) + " must separate its targets");
        if (!(reset_amplitudes[k] < p.v_reset_th))
            throw_config("levels: reset amplitude " + std::to_string(k) + " must exceed the RESET threshold");
    }
    if (!(set_amplitude > p.v_set_th)) throw_config("levels: set_amplitude must exceed v_set_th");
    if (!(set_width > 0.0 && reset_width > 0.0 && dt > 0.0))
        throw_config("levels: widths and dt must be positive");
}

LevelConfig make_level_targets(const DeviceParams& p, int n_levels) {
    if (n_levels < 2) throw_config("levels: n_levels must be at least 2");
    LevelConfig cfg;
    cfg.n_levels = n_levels;
    double lo = 1.2 * p.r_on;
    double hi = 0.7 * p.r_off;
    if (!(lo < hi)) throw_config("levels: r_on/r_off window too narrow for a ladder");
    cfg.targets.resize(n_levels);
    for (int k = 0; k < n_levels; k++) {
        double f = static_cast<double>(k) / static_cast<double>(n_levels - 1);
        cfg.targets[k] = lo * std::pow(hi / lo, f);
    }
    cfg.read_boundaries.resize(n_levels - 1);
    for (int k = 0; k + 1 < n_levels; k++)
        cfg.read_boundaries[k] = std::sqrt(cfg.targets[k] * cfg.targets[k + 1]);
    return cfg;
}

namespace {

// Resistance reached from a fresh full-SET by one RESET pulse at `amp`.
double settle_resistance(const DeviceParams& p, const LevelConfig& cfg, double amp) {
    VariationSpec off;
    off.d2d_enabled = false;
    off.c2c_enabled = false;
    RngStream dummy(0);
    DeviceState st{0.0, 0};
    st = apply_pulse(st, p, {cfg.set_amplitude, cfg.set_width, cfg.dt}, off, false, dummy).state;
    st = apply_pulse(st, p, {amp, cfg.reset_width, cfg.dt}, off, false, dummy).state;
    return resistance(st, p);
}

} // namespace

void calibrate_reset_amplitudes(LevelConfig& cfg, const DeviceParams& p) {
    p.validate();
    if (static_cast<int>(cfg.targets.size()) != cfg.n_levels)
        throw_config("levels: build targets before calibrating");
    cfg.reset_amplitudes.assign(cfg.n_levels - 1, 0.0);
    for (int k = 1; k < cfg.n_levels; k++) {
        double target = cfg.targets[k];
        // R grows monotonically with RESET magnitude.  Bracket, then bisect.
        double lo = std::abs(p.v_reset_th); // at threshold: no switching, R stays low
        double hi = lo * 1.5;
        int guard = 0;
        while (settle_resistance(p, cfg, -hi) < target) {
            hi *= 1.5;
            if (++guard > 24)
                throw_calibration("levels: target " + std::to_string(k) +
                                  " unreachable at any RESET amplitude");
        }
        for (int it = 0; it < 60; it++) {
            double mid = 0.5 * (lo + hi);
            if (settle_resistance(p, cfg, -mid) < target)
                lo = mid;
            else
                hi = mid;
        }
        double amp = -0.5 * (lo + hi);
        double got = settle_resistance(p, cfg, amp);
        if (std::abs(got - target) / target > 0.05)
            throw_calibration("levels: calibration for level " + std::to_string(k) +
                              " missed its target by more than 5 percent");
        cfg.reset_amplitudes[k - 1] = amp;
    }
}

DeviceState program_level(const DeviceState& st, const DeviceParams& p, const LevelConfig& cfg,
                          int level, const VariationSpec& var, bool c2c, RngStream& rng) {
    if (level < 0 || level >= cfg.n_levels)
        throw_runtime("levels: level " + std::to_string(level) + " out of range");
    if (static_cast<int>(cfg.reset_amplitudes.size()) != cfg.n_levels - 1)
        throw_config("levels: reset amplitudes not calibrated");
    DeviceState cur = apply_pulse(st, p, {cfg.set_amplitude, cfg.set_width, cfg.dt}, var, c2c, rng).state;
    if (level > 0)
        cur = apply_pulse(cur, p, {cfg.reset_amplitudes[level - 1], cfg.reset_width, cfg.dt}, var,
                          c2c, rng).state;
    return cur;
}

int read_level(const DeviceState& st, const DeviceParams& p, const LevelConfig& cfg) {
    double r = resistance(st, p);
    for (int k = 0; k + 1 < cfg.n_levels; k++)
        if (r <= cfg.read_boundaries[k]) return k;
    return cfg.n_levels - 1;
}

} // namespace rxbar
