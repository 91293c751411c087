#include "rxbar/sec.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "rxbar/errors.hpp"
#include "rxbar/rng.hpp"

namespace rxbar {

namespace {

// Two-sided standard-normal critical values for the supported alphas.
double critical_z(double alpha) {
    if (alpha == 0.01) return 2.5758293035489004;
    if (alpha == 0.05) return 1.959963984540054;
    throw_config("randomness_tests: alpha must be 0.01 or 0.05");
}

void require_jitter(const Crossbar& xbar, const char* who) {
    if (!xbar.variation().c2c_enabled)
        throw_config(std::string(who) +
                     ": cycle-to-cycle jitter is disabled; the entropy source is "
                     "deterministic and cannot generate random bits");
}

} // namespace

// ---------------------------------------------------------------------------
// TRNG
// ---------------------------------------------------------------------------

void TrngConfig::validate() const {
    if (!(rearm_width > 0.0 && probe_width > 0.0 && read_width > 0.0))
        throw_config("trng: pulse widths must be positive");
    if (!(dt > 0.0) || dt > probe_width) throw_config("trng: dt must be in (0, probe_width]");
    if (!(rearm_v < 0.0)) throw_config("trng: rearm_v must be negative");
    if (!(target_p > 0.0 && target_p < 1.0)) throw_config("trng: target_p must be in (0,1)");
    if (!(tol > 0.0 && tol < 0.5)) throw_config("trng: tol must be in (0,0.5)");
    if (probe_trials < 100) throw_config("trng: probe_trials must be >= 100");
    if (max_iters < 1) throw_config("trng: max_iters must be >= 1");
}

namespace {

PulseProgram trial_program(const Crossbar& xbar, const TrngConfig& cfg, double amplitude) {
    PulseProgram prog;
    prog.rows = xbar.rows();
    prog.cols = xbar.cols();
    prog.dt = cfg.dt;
    Step& rearm = prog.add_step(cfg.rearm_width, Phase::evaluate, 0);
    rearm.row_drive[static_cast<std::size_t>(cfg.row)] = cfg.rearm_v;
    rearm.col_drive[static_cast<std::size_t>(cfg.col)] = 0.0;
    rearm.select = {CellRef{cfg.row, cfg.col}};
    Step& probe = prog.add_step(cfg.probe_width, Phase::evaluate, 0);
    probe.row_drive[static_cast<std::size_t>(cfg.row)] = amplitude;
    probe.col_drive[static_cast<std::size_t>(cfg.col)] = 0.0;
    probe.select = {CellRef{cfg.row, cfg.col}};
    return prog;
}

bool run_trial(Crossbar& xbar, const TrngConfig& cfg, const PulseProgram& prog) {
    run_program(xbar, prog);
    AccessSpec spec;
    spec.read_v = cfg.read_v;
    spec.read_w = cfg.read_width;
    spec.dt = cfg.dt;
    return read_bit(xbar, cfg.row, cfg.col, Phase::read, 0, spec);
}

} // namespace

bool trng_bit(Crossbar& xbar, const TrngConfig& cfg, double amplitude) {
    cfg.validate();
    require_jitter(xbar, "trng_bit");
    xbar.check_cell(cfg.row, cfg.col);
    return run_trial(xbar, cfg, trial_program(xbar, cfg, amplitude));
}

std::vector<std::uint8_t> trng_raw(Crossbar& xbar, const TrngConfig& cfg, double amplitude,
                                   std::size_t n) {
    cfg.validate();
    require_jitter(xbar, "trng_raw");
    xbar.check_cell(cfg.row, cfg.col);
    PulseProgram prog = trial_program(xbar, cfg, amplitude);
    std::vector<std::uint8_t> bits(n);
    for (std::size_t i = 0; i < n; i++) bits[i] = run_trial(xbar, cfg, prog) ? 1 : 0;
    return bits;
}

double trng_calibrate(Crossbar& xbar, const TrngConfig& cfg) {
    cfg.validate();
    require_jitter(xbar, "trng_calibrate");
    xbar.check_cell(cfg.row, cfg.col);
    double vth = xbar.params(cfg.row, cfg.col).v_set_th;
    double lo = 0.8 * vth, hi = 1.4 * vth;
    for (int iter = 0; iter < cfg.max_iters; iter++) {
        double mid = 0.5 * (lo + hi);
        PulseProgram prog = trial_program(xbar, cfg, mid);
        long ones = 0;
        for (int t = 0; t < cfg.probe_trials; t++)
            if (run_trial(xbar, cfg, prog)) ones++;
        double p_hat = static_cast<double>(ones) / cfg.probe_trials;
        if (std::abs(p_hat - cfg.target_p) <= cfg.tol) return mid;
        if (p_hat < cfg.target_p)
            lo = mid;
        else
            hi = mid;
    }
    throw_calibration("trng_calibrate: no amplitude reached |p - " + std::to_string(cfg.target_p) +
                      "| <= " + std::to_string(cfg.tol) + " within " +
                      std::to_string(cfg.max_iters) + " probes");
}

std::vector<std::uint8_t> von_neumann(const std::vector<std::uint8_t>& raw) {
    std::vector<std::uint8_t> out;
    out.reserve(raw.size() / 4);
    for (std::size_t i = 0; i + 1 < raw.size(); i += 2)
        if (raw[i] != raw[i + 1]) out.push_back(raw[i]);
    return out;
}

std::vector<std::uint8_t> trng_output(Crossbar& xbar, const TrngConfig& cfg, double amplitude,
                                      std::size_t n) {
    std::vector<std::uint8_t> out;
    out.reserve(n);
    while (out.size() < n) {
        // Even chunk size keeps the global pairing aligned.
        std::size_t want = std::max<std::size_t>(2 * (n - out.size()), 1024) * 2;
        std::vector<std::uint8_t> raw = trng_raw(xbar, cfg, amplitude, want);
        std::vector<std::uint8_t> kept = von_neumann(raw);
        out.insert(out.end(), kept.begin(), kept.end());
    }
    out.resize(n);
    return out;
}

RandomnessReport randomness_tests(const std::vector<std::uint8_t>& bits, double alpha) {
    RandomnessReport rep;
    rep.z_critical = critical_z(alpha);
    rep.n = bits.size();
    if (bits.empty()) return rep;
    double n = static_cast<double>(bits.size());
    double n1 = 0.0;
    for (std::uint8_t b : bits) n1 += b ? 1.0 : 0.0;
    double n0 = n - n1;
    rep.ones_fraction = n1 / n;
    rep.monobit_z = (n1 - n0) / std::sqrt(n);
    rep.monobit_pass = std::abs(rep.monobit_z) < rep.z_critical;

    if (n1 == 0.0 || n0 == 0.0 || bits.size() < 2) {
        // Degenerate stream: no run structure to test; fail closed.
        rep.runs_z = std::numeric_limits<double>::infinity();
        rep.runs_pass = false;
        rep.pass = false;
        return rep;
    }
    double runs = 1.0;
    for (std::size_t i = 1; i < bits.size(); i++)
        if (bits[i] != bits[i - 1]) runs += 1.0;
    double mean = 1.0 + 2.0 * n1 * n0 / n;
    double var = 2.0 * n1 * n0 * (2.0 * n1 * n0 - n) / (n * n * (n - 1.0));
    if (var <= 0.0) {
        rep.runs_z = std::numeric_limits<double>::infinity();
        rep.runs_pass = false;
    } else {
        rep.runs_z = (runs - mean) / std::sqrt(var);
        rep.runs_pass = std::abs(rep.runs_z) < rep.z_critical;
    }
    rep.pass = rep.monobit_pass && rep.runs_pass;
    return rep;
}

// ---------------------------------------------------------------------------
// PUF
// ---------------------------------------------------------------------------

void PufConfig::validate() const {
    if (rows < 1 || cols < 1) throw_config("puf: array must be at least 1x1");
    if (response_bits < 1) throw_config("puf: response_bits must be >= 1");
    if (2L * response_bits > static_cast<long>(rows) * cols)
        throw_capacity("puf: " + std::to_string(response_bits) + " response bits need " +
                       std::to_string(2 * response_bits) + " cells, array has " +
                       std::to_string(static_cast<long>(rows) * cols));
    if (!(form_v > 0.0) || !(clear_v < 0.0)) throw_config("puf: form_v > 0 and clear_v < 0 required");
    if (!(form_width > 0.0 && clear_width > 0.0 && read_width > 0.0 && dt > 0.0))
        throw_config("puf: widths and dt must be positive");
}

namespace {

void check_geometry(const Crossbar& xbar, const PufConfig& cfg) {
    if (xbar.rows() != cfg.rows || xbar.cols() != cfg.cols)
        throw_config("puf: array is " + std::to_string(xbar.rows()) + "x" +
                     std::to_string(xbar.cols()) + " but config expects " +
                     std::to_string(cfg.rows) + "x" + std::to_string(cfg.cols));
}

} // namespace

void puf_form(Crossbar& xbar, const PufConfig& cfg) {
    cfg.validate();
    check_geometry(xbar, cfg);
    PulseProgram prog;
    prog.rows = cfg.rows;
    prog.cols = cfg.cols;
    prog.dt = cfg.dt;
    for (int r = 0; r < cfg.rows; r++) {
        Step& clear = prog.add_step(cfg.clear_width, Phase::init, 0);
        clear.row_drive[static_cast<std::size_t>(r)] = cfg.clear_v;
        Step& set = prog.add_step(cfg.form_width, Phase::init, 0);
        set.row_drive[static_cast<std::size_t>(r)] = cfg.form_v;
        for (int c = 0; c < cfg.cols; c++) {
            clear.col_drive[static_cast<std::size_t>(c)] = 0.0;
            clear.select.push_back(CellRef{r, c});
            set.col_drive[static_cast<std::size_t>(c)] = 0.0;
            set.select.push_back(CellRef{r, c});
        }
    }
    run_program(xbar, prog);
}

std::vector<std::uint8_t> puf_response(Crossbar& xbar, const PufConfig& cfg,
                                       std::uint64_t challenge) {
    cfg.validate();
    check_geometry(xbar, cfg);
    int n_cells = cfg.rows * cfg.cols;

    // Device-independent pairing: the shuffle depends only on the challenge,
    // so every chip answers the same pair sequence.
    RngStream pick = RngStream::derive(challenge, "puf.pairs", 0);
    std::vector<int> order(static_cast<std::size_t>(n_cells));
    std::iota(order.begin(), order.end(), 0);
    int take = 2 * cfg.response_bits;
    for (int i = 0; i < take; i++) {
        std::uint64_t j = static_cast<std::uint64_t>(i) +
                          pick.below(static_cast<std::uint64_t>(n_cells - i));
        std::swap(order[static_cast<std::size_t>(i)], order[j]);
    }

    std::vector<std::uint8_t> bits(static_cast<std::size_t>(cfg.response_bits));
    for (int k = 0; k < cfg.response_bits; k++) {
        int lin1 = order[static_cast<std::size_t>(2 * k)];
        int lin2 = order[static_cast<std::size_t>(2 * k + 1)];
        CellRef a{lin1 / cfg.cols, lin1 % cfg.cols};
        CellRef b{lin2 / cfg.cols, lin2 % cfg.cols};

        PulseProgram prog;
        prog.rows = cfg.rows;
        prog.cols = cfg.cols;
        prog.dt = cfg.dt;
        Step& read = prog.add_step(cfg.read_width, Phase::read, 1);
        read.row_drive[static_cast<std::size_t>(a.row)] = cfg.read_v;
        read.row_drive[static_cast<std::size_t>(b.row)] = cfg.read_v;
        read.col_drive[static_cast<std::size_t>(a.col)] = 0.0;
        read.col_drive[static_cast<std::size_t>(b.col)] = 0.0;
        read.select = {a, b};

        const std::vector<double>& per_dev = xbar.trace().per_device;
        double e1_before = per_dev[static_cast<std::size_t>(lin1)];
        double e2_before = per_dev[static_cast<std::size_t>(lin2)];
        run_program(xbar, prog);
        double e1 = xbar.trace().per_device[static_cast<std::size_t>(lin1)] - e1_before;
        double e2 = xbar.trace().per_device[static_cast<std::size_t>(lin2)] - e2_before;
        bits[static_cast<std::size_t>(k)] = e1 > e2 ? 1 : 0; // tie -> 0
    }
    return bits;
}

PufHealth puf_health(const Crossbar& xbar) {
    PufHealth h;
    double n = 0.0, mean = 0.0, m2 = 0.0;
    for (int r = 0; r < xbar.rows(); r++)
        for (int c = 0; c < xbar.cols(); c++) {
            double lr = std::log(xbar.cell_resistance(r, c));
            n += 1.0;
            double d = lr - mean;
            mean += d / n;
            m2 += d * (lr - mean);
        }
    h.log_r_dispersion = n > 1.0 ? std::sqrt(m2 / (n - 1.0)) : 0.0;
    h.pass = h.log_r_dispersion >= 0.01;
    return h;
}

namespace {

double hamming_pct(const std::vector<std::uint8_t>& a, const std::vector<std::uint8_t>& b) {
    long d = 0;
    for (std::size_t i = 0; i < a.size(); i++)
        if (a[i] != b[i]) d++;
    return 100.0 * static_cast<double>(d) / static_cast<double>(a.size());
}

} // namespace

PufMetrics puf_metrics(const DeviceParams& nominal, const VariationSpec& var,
                       const PufConfig& cfg, int n_chips, int m_rereads,
                       std::uint64_t base_seed, std::uint64_t challenge,
                       std::vector<std::vector<std::uint8_t>>* golden_out) {
    cfg.validate();
    if (n_chips < 2) throw_config("puf_metrics: need at least 2 chips");
    if (m_rereads < 1) throw_config("puf_metrics: need at least 1 re-read");

    std::vector<std::vector<std::uint8_t>> golden;
    golden.reserve(static_cast<std::size_t>(n_chips));
    double intra_acc = 0.0;
    long intra_n = 0;
    for (int i = 0; i < n_chips; i++) {
        Crossbar chip(cfg.rows, cfg.cols, nominal, var, base_seed + static_cast<std::uint64_t>(i));
        puf_form(chip, cfg);
        golden.push_back(puf_response(chip, cfg, challenge));
        for (int m = 0; m < m_rereads; m++) {
            puf_form(chip, cfg); // re-formation draws fresh cycle jitter
            intra_acc += hamming_pct(golden.back(), puf_response(chip, cfg, challenge));
            intra_n++;
        }
    }

    PufMetrics out;
    out.n_chips = n_chips;
    out.m_rereads = m_rereads;
    double inter_acc = 0.0;
    long inter_n = 0;
    for (int i = 0; i < n_chips; i++)
        for (int j = i + 1; j < n_chips; j++) {
            inter_acc += hamming_pct(golden[static_cast<std::size_t>(i)],
                                     golden[static_cast<std::size_t>(j)]);
            inter_n++;
        }
    out.uniqueness_pct = inter_acc / static_cast<double>(inter_n);
    double ones = 0.0;
    for (const auto& g : golden)
        for (std::uint8_t b : g) ones += b;
    out.uniformity_pct =
        100.0 * ones / static_cast<double>(n_chips * cfg.response_bits);
    double alias = 0.0;
    for (int k = 0; k < cfg.response_bits; k++) {
        double col = 0.0;
        for (const auto& g : golden) col += g[static_cast<std::size_t>(k)];
        alias += 100.0 * col / static_cast<double>(n_chips);
    }
    out.bit_aliasing_pct = alias / cfg.response_bits;
    out.reliability_pct = 100.0 - intra_acc / static_cast<double>(intra_n);
    if (golden_out) *golden_out = std::move(golden);
    return out;
}

// ---------------------------------------------------------------------------
// Weight locking
// ---------------------------------------------------------------------------

std::vector<std::uint8_t> puf_keystream(Crossbar& xbar, const PufConfig& cfg,
                                        std::size_t n_bits) {
    PufHealth h = puf_health(xbar);
    if (!h.pass)
        throw_runtime("puf_keystream: chip is not PUF-grade (log-resistance dispersion " +
                      std::to_string(h.log_r_dispersion) + " < 0.01); was it formed with "
                      "fabrication variation enabled?");
    std::vector<std::uint8_t> key;
    key.reserve(n_bits);
    std::uint64_t challenge = 0;
    while (key.size() < n_bits) {
        std::vector<std::uint8_t> resp = puf_response(xbar, cfg, challenge++);
        key.insert(key.end(), resp.begin(), resp.end());
    }
    key.resize(n_bits);
    bool all_same = true;
    for (std::uint8_t b : key)
        if (b != key[0]) all_same = false;
    if (all_same) throw_runtime("puf_keystream: degenerate keystream (all bits equal)");
    return key;
}

std::vector<int> mask_levels(const std::vector<int>& levels,
                             const std::vector<std::uint8_t>& keystream) {
    if (2 * levels.size() > keystream.size())
        throw_capacity("mask_levels: " + std::to_string(levels.size()) + " weights need " +
                       std::to_string(2 * levels.size()) + " keystream bits, got " +
                       std::to_string(keystream.size()));
    std::vector<int> out(levels.size());
    for (std::size_t i = 0; i < levels.size(); i++) {
        int lv = levels[i];
        if (lv < 0 || lv > 3)
            throw_config("mask_levels: weight level " + std::to_string(lv) +
                         " out of range [0,3]");
        int k2 = (keystream[2 * i] ? 1 : 0) | ((keystream[2 * i + 1] ? 1 : 0) << 1);
        out[i] = lv ^ k2;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quantized MLP demo
// ---------------------------------------------------------------------------

int QuantizedMlp::infer(const std::array<double, kInputs>& x) const {
    if (static_cast<int>(levels.size()) != kParams)
        throw_config("mlp: expected " + std::to_string(kParams) + " levels, got " +
                     std::to_string(levels.size()));
    std::array<double, kHidden> h{};
    for (int j = 0; j < kHidden; j++) {
        double acc = value(kHidden * kInputs + j); // bias
        for (int k = 0; k < kInputs; k++) acc += value(j * kInputs + k) * x[(std::size_t)k];
        h[(std::size_t)j] = acc > 0.0 ? acc : 0.0;
    }
    int base = kHidden * kInputs + kHidden;
    double best = 0.0;
    int best_o = 0;
    for (int o = 0; o < kOutputs; o++) {
        double acc = value(base + kOutputs * kHidden + o); // bias
        for (int j = 0; j < kHidden; j++) acc += value(base + o * kHidden + j) * h[(std::size_t)j];
        if (o == 0 || acc > best) {
            best = acc;
            best_o = o;
        }
    }
    return best_o;
}

Dataset make_dataset(const QuantizedMlp& ref, int n, std::uint64_t seed) {
    if (n < 1) throw_config("make_dataset: n must be >= 1");
    RngStream rng = RngStream::derive(seed, "nn.data", 0);
    Dataset ds;
    ds.x.resize(static_cast<std::size_t>(n));
    ds.y.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; i++) {
        for (int k = 0; k < QuantizedMlp::kInputs; k++)
            ds.x[(std::size_t)i][(std::size_t)k] = 2.0 * rng.uniform() - 1.0;
        ds.y[(std::size_t)i] = ref.infer(ds.x[(std::size_t)i]);
    }
    return ds;
}

QuantizedMlp make_reference_mlp(std::uint64_t seed) {
    for (std::uint64_t attempt = 0; attempt < 100; attempt++) {
        QuantizedMlp net;
        net.levels.resize(static_cast<std::size_t>(QuantizedMlp::kParams));
        RngStream rng = RngStream::derive(seed, "nn.ref", attempt);
        for (int& lv : net.levels) lv = static_cast<int>(rng.below(4));
        Dataset probe = make_dataset(net, 512, seed ^ 0x9e3779b97f4a7c15ULL);
        double ones = 0.0;
        for (int y : probe.y) ones += y;
        double frac = ones / static_cast<double>(probe.y.size());
        if (frac >= 0.3 && frac <= 0.7) return net;
    }
    throw_runtime("make_reference_mlp: no balanced reference net in 100 attempts");
}

double accuracy(const QuantizedMlp& net, const Dataset& data) {
    if (data.x.empty()) throw_config("accuracy: empty dataset");
    long hits = 0;
    for (std::size_t i = 0; i < data.x.size(); i++)
        if (net.infer(data.x[i]) == data.y[i]) hits++;
    return static_cast<double>(hits) / static_cast<double>(data.x.size());
}

} // namespace rxbar
