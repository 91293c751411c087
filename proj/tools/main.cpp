// Command-line front end for the crossbar toolchain.
//
// Subcommands: lim, mvl-add, fsa, trng, puf, lock, calibrate.  Every command
// prints its resolved seed and writes only seed-determined artifacts, so any
// run can be reproduced bit-for-bit by passing the printed seed back in.
// Exit codes: 0 success, 1 operational failure (calibration, runtime),
// 2 usage/configuration/input errors.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rxbar/blif.hpp"
#include "rxbar/config.hpp"
#include "rxbar/device.hpp"
#include "rxbar/errors.hpp"
#include "rxbar/limc.hpp"
#include "rxbar/mvl.hpp"
#include "rxbar/rng.hpp"
#include "rxbar/sec.hpp"
#include "rxbar/spice.hpp"
#include "rxbar/version.hpp"
#include "rxbar/xbar.hpp"

namespace {

using nlohmann::json;
using namespace rxbar;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string u128_str(unsigned __int128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return s;
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary); // binary: no newline translation
    if (!out) throw_io("cannot open '" + path.string() + "' for writing");
    out << content;
    if (!out) throw_io("write to '" + path.string() + "' failed");
}

void write_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw_io("cannot open '" + path.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw_io("write to '" + path.string() + "' failed");
}

/// Pack bits LSB-first into bytes (bit i of the stream = bit i%8 of byte i/8).
std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits) {
    std::vector<std::uint8_t> bytes((bits.size() + 7) / 8, 0);
    for (std::size_t i = 0; i < bits.size(); i++)
        if (bits[i]) bytes[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
    return bytes;
}

std::string bits_str(const std::vector<std::uint8_t>& bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

std::string energy_csv(const ExecutionTrace& trace) {
    std::ostringstream out;
    out << "row,col,op_id,phase,joules\n";
    for (const auto& [key, e] : trace.per_cell_op_phase) {
        auto [r, c, op, ph] = key;
        out << r << ',' << c << ',' << op << ',' << phase_name(static_cast<Phase>(ph)) << ','
            << fmt17(e) << '\n';
    }
    return out.str();
}

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::string c2c; // "", "on", "off"

    void attach(CLI::App* cmd, const char* default_out) {
        cmd->add_option("--config", config_path, "JSON config file");
        cmd->add_option("--out", out_dir, "output directory")->default_val(default_out);
        cmd->add_option("--seed", seed, "seed (default: freshly drawn, printed either way)");
        cmd->add_option("--c2c", c2c, "override cycle-to-cycle jitter")
            ->check(CLI::IsMember({"on", "off"}));
    }

    [[nodiscard]] ToolConfig config() const {
        ToolConfig cfg = config_path.empty() ? ToolConfig{} : load_config(config_path);
        if (c2c == "on") cfg.variation.c2c_enabled = true;
        if (c2c == "off") cfg.variation.c2c_enabled = false;
        cfg.validate();
        return cfg;
    }

    [[nodiscard]] std::uint64_t resolve_seed() const {
        if (seed) return *seed;
        std::random_device rd;
        return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    }

    [[nodiscard]] std::filesystem::path prepare_out() const {
        std::filesystem::path dir(out_dir);
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) throw_io("cannot create output directory '" + out_dir + "': " + ec.message());
        return dir;
    }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw_io("cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// ---------------------------------------------------------------------------
// lim
// ---------------------------------------------------------------------------

struct LimOpts {
    CommonOpts common;
    std::string netlist;
    int rows = 16;
    int cols = 16;
    std::string inputs; // explicit vector, e.g. "101"
    bool exhaustive = false;
};

void run_lim(const LimOpts& opt) {
    ToolConfig cfg = opt.common.config();
    std::uint64_t seed = opt.common.resolve_seed();
    std::filesystem::path out = opt.common.prepare_out();
    std::cout << "seed: " << seed << "\n";

    LogicNetlist net = parse_netlist(read_file(opt.netlist));
    GateGraph graph = tech_map(net);
    LimSchedule sched = build_schedule(graph, opt.rows, opt.cols);
    std::size_t n_in = net.inputs.size();

    json jsched;
    jsched["rows"] = sched.rows;
    jsched["cols"] = sched.cols;
    jsched["dt"] = sched.program.dt;
    jsched["n_steps"] = sched.program.steps.size();
    jsched["behavioral_fallback"] = sched.behavioral_fallback;
    jsched["inputs"] = net.inputs;
    jsched["outputs"] = net.outputs;
    jsched["n_gates"] = sched.graph.gates.size();
    json homes = json::object();
    for (std::size_t sig = 0; sig < sched.home.size(); sig++)
        homes[sched.graph.signal_names[sig]] = {sched.home[sig].row, sched.home[sig].col};
    jsched["homes"] = homes;
    json segs = json::array();
    for (const PhaseSegment& s : sched.segments)
        segs.push_back({{"label", s.label}, {"first_step", s.first_step}, {"n_steps", s.n_steps}});
    jsched["segments"] = segs;
    write_text(out / "schedule.json", jsched.dump(2) + "\n");

    std::vector<std::vector<bool>> vectors;
    if (opt.exhaustive) {
        if (n_in > 10)
            throw_config("lim: --exhaustive supports at most 10 inputs (got " +
                         std::to_string(n_in) + ")");
        for (std::size_t v = 0; v < (std::size_t{1} << n_in); v++) {
            std::vector<bool> bits(n_in);
            for (std::size_t i = 0; i < n_in; i++) bits[i] = (v >> i) & 1;
            vectors.push_back(bits);
        }
    } else if (!opt.inputs.empty()) {
        if (opt.inputs.size() != n_in)
            throw_config("lim: --inputs needs exactly " + std::to_string(n_in) + " bits");
        std::vector<bool> bits(n_in);
        for (std::size_t i = 0; i < n_in; i++) {
            if (opt.inputs[i] != '0' && opt.inputs[i] != '1')
                throw_config("lim: --inputs must be a 0/1 string");
            bits[i] = opt.inputs[i] == '1';
        }
        vectors.push_back(bits);
    }

    std::ostringstream results;
    results << "inputs,outputs,init_j,evaluate_j,read_j,total_j\n";
    std::string last_energy;
    for (const auto& bits : vectors) {
        Crossbar xb(opt.rows, opt.cols, cfg.device, cfg.variation, seed, cfg.selector_r);
        std::vector<bool> outs = execute_schedule(xb, sched, bits);
        const ExecutionTrace& t = xb.trace();
        std::string in_s, out_s;
        for (bool b : bits) in_s.push_back(b ? '1' : '0');
        for (bool b : outs) out_s.push_back(b ? '1' : '0');
        results << in_s << ',' << out_s << ','
                << fmt17(t.per_phase[static_cast<int>(Phase::init)]) << ','
                << fmt17(t.per_phase[static_cast<int>(Phase::evaluate)]) << ','
                << fmt17(t.per_phase[static_cast<int>(Phase::read)]) << ','
                << fmt17(t.total_energy) << '\n';
        last_energy = energy_csv(t);
        std::cout << "in " << in_s << " -> out " << out_s << "\n";
    }
    if (!vectors.empty()) {
        write_text(out / "results.csv", results.str());
        write_text(out / "energy.csv", last_energy);
    }
    // The emitted deck reproduces the schedule as last patched (all-zero
    // loads when no vector was run).
    write_text(out / "netlist.sp",
               emit_spice(sched.program, cfg.device, cfg.selector_r, "lim schedule"));
    std::cout << "compiled " << sched.graph.gates.size() << " gates into "
              << sched.program.steps.size() << " steps ("
              << (sched.behavioral_fallback ? "behavioral" : "staged") << " mode)\n";
    std::cout << "wrote: schedule.json, netlist.sp"
              << (vectors.empty() ? "" : ", results.csv, energy.csv") << "\n";
}

// ---------------------------------------------------------------------------
// mvl-add
// ---------------------------------------------------------------------------

struct MvlOpts {
    CommonOpts common;
    std::uint64_t a = 0;
    std::uint64_t b = 0;
    int trits = 41;
    int rows = 16;
    int cols = 16;
};

void run_mvl(const MvlOpts& opt) {
    ToolConfig cfg = opt.common.config();
    std::uint64_t seed = opt.common.resolve_seed();
    std::filesystem::path out = opt.common.prepare_out();
    std::cout << "seed: " << seed << "\n";

    LevelConfig ladder = make_ladder(cfg, std::max(cfg.levels, 3));
    TritVector ta = trits_from_u64(opt.a, opt.trits);
    TritVector tb = trits_from_u64(opt.b, opt.trits);
    // Multi-level programming relies on the ladder being calibrated for the
    // device it drives, so the working array is a device-matched instance;
    // cycle-to-cycle jitter stays as configured.
    VariationSpec var = cfg.variation;
    var.d2d_enabled = false;
    Crossbar xb(opt.rows, opt.cols, cfg.device, var, seed, cfg.selector_r);
    TernaryAddResult res = ternary_add(xb, ta, tb, ladder);
    TritVector want = add_trits_software(ta, tb);

    std::ostringstream csv;
    csv << "digit,a,b,sum\n";
    for (std::size_t i = 0; i < res.sum.size(); i++)
        csv << i << ',' << (i < ta.size() ? ta[i] : 0) << ',' << (i < tb.size() ? tb[i] : 0)
            << ',' << res.sum[i] << '\n';
    write_text(out / "digits.csv", csv.str());
    write_text(out / "energy.csv", energy_csv(xb.trace()));

    unsigned __int128 value = 0;
    for (std::size_t i = res.sum.size(); i-- > 0;)
        value = value * 3 + static_cast<unsigned>(res.sum[i]);
    std::cout << "a: " << opt.a << "\nb: " << opt.b << "\n";
    std::cout << "sum: " << u128_str(value) << " (" << res.sum.size() << " trits)\n";
    std::cout << "matches reference adder: " << (res.sum == want ? "yes" : "NO") << "\n";
    std::cout << "wrote: digits.csv, energy.csv\n";
    if (res.sum != want) throw_runtime("mvl-add: device sum disagrees with reference adder");
}

// ---------------------------------------------------------------------------
// fsa
// ---------------------------------------------------------------------------

struct FsaOpts {
    CommonOpts common;
    AutomatonConfig acfg;
};

void run_fsa(const FsaOpts& opt) {
    ToolConfig cfg = opt.common.config();
    std::uint64_t seed = opt.common.resolve_seed();
    std::filesystem::path out = opt.common.prepare_out();
    std::cout << "seed: " << seed << "\n";

    LevelConfig ladder = make_ladder(cfg, 2 * opt.acfg.depth);
    // Device-matched array for the same reason as mvl-add: the ladder is a
    // per-device calibration.
    VariationSpec var = cfg.variation;
    var.d2d_enabled = false;
    Crossbar xb(1, 1, cfg.device, var, seed, cfg.selector_r);
    AutomatonResult dev = run_automaton(xb, opt.acfg, ladder, seed);
    AutomatonResult sw = run_automaton_software(opt.acfg, seed);

    std::ostringstream csv;
    csv << "step,state_before,action,penalty,state_after\n";
    for (std::size_t i = 0; i < dev.trajectory.size(); i++) {
        const AutomatonStep& s = dev.trajectory[i];
        csv << i << ',' << s.state_before << ',' << s.action << ',' << (s.penalty ? 1 : 0) << ','
            << s.state_after << '\n';
    }
    write_text(out / "trajectory.csv", csv.str());

    bool same = dev.trajectory.size() == sw.trajectory.size();
    for (std::size_t i = 0; same && i < dev.trajectory.size(); i++) {
        const AutomatonStep& d = dev.trajectory[i];
        const AutomatonStep& s = sw.trajectory[i];
        same = d.state_before == s.state_before && d.action == s.action &&
               d.penalty == s.penalty && d.state_after == s.state_after;
    }
    std::cout << "action-1 frequency (final " << opt.acfg.window << "): "
              << fmt17(dev.action1_frequency) << "\n";
    std::cout << "misdetections: " << dev.misdetections << "\n";
    std::cout << "software twin " << (cfg.variation.c2c_enabled ? "(jitter on)" : "(jitter off)")
              << " matches: " << (same ? "yes" : "no") << "\n";
    std::cout << "wrote: trajectory.csv\n";
}

// ---------------------------------------------------------------------------
// trng
// ---------------------------------------------------------------------------

struct TrngOpts {
    CommonOpts common;
    std::size_t bits = 100000;
    bool debias = false;
    double target_p = 0.5;
};

void run_trng(const TrngOpts& opt) {
    ToolConfig cfg = opt.common.config();
    std::uint64_t seed = opt.common.resolve_seed();
    std::filesystem::path out = opt.common.prepare_out();
    std::cout << "seed: " << seed << "\n";

    TrngConfig tc;
    tc.target_p = opt.target_p;
    Crossbar xb(1, 1, cfg.device, cfg.variation, seed, cfg.selector_r);
    double amp = trng_calibrate(xb, tc);
    std::cout << "calibrated probe amplitude: " << fmt17(amp) << " V\n";

    std::vector<std::uint8_t> stream = opt.debias ? trng_output(xb, tc, amp, opt.bits)
                                                  : trng_raw(xb, tc, amp, opt.bits);
    RandomnessReport rep = randomness_tests(stream, 0.01);
    write_bytes(out / "bits.bin", pack_bits(stream));
    std::ostringstream csv;
    csv << "stream,n,ones_fraction,monobit_z,runs_z,monobit_pass,runs_pass,pass\n";
    csv << (opt.debias ? "corrected" : "raw") << ',' << rep.n << ',' << fmt17(rep.ones_fraction)
        << ',' << fmt17(rep.monobit_z) << ',' << fmt17(rep.runs_z) << ','
        << (rep.monobit_pass ? 1 : 0) << ',' << (rep.runs_pass ? 1 : 0) << ','
        << (rep.pass ? 1 : 0) << '\n';
    write_text(out / "stats.csv", csv.str());
    std::cout << "stream: " << (opt.debias ? "corrected" : "raw") << ", " << rep.n << " bits\n";
    std::cout << "ones fraction: " << fmt17(rep.ones_fraction) << "\n";
    std::cout << "monobit z: " << fmt17(rep.monobit_z) << " (" << (rep.monobit_pass ? "pass" : "fail")
              << "), runs z: " << fmt17(rep.runs_z) << " (" << (rep.runs_pass ? "pass" : "fail")
              << ")\n";
    std::cout << "wrote: bits.bin, stats.csv\n";
}

// ---------------------------------------------------------------------------
// puf
// ---------------------------------------------------------------------------

struct PufOpts {
    CommonOpts common;
    int chips = 50;
    int rereads = 10;
    std::uint64_t challenge = 1;
    PufConfig pcfg;
};

void run_puf(const PufOpts& opt) {
    ToolConfig cfg = opt.common.config();
    std::uint64_t seed = opt.common.resolve_seed();
    std::filesystem::path out = opt.common.prepare_out();
    std::cout << "seed: " << seed << "\n";

    std::vector<std::vector<std::uint8_t>> golden;
    PufMetrics m = puf_metrics(cfg.device, cfg.variation, opt.pcfg, opt.chips, opt.rereads, seed,
                               opt.challenge, &golden);

    std::ostringstream csv;
    csv << "chip,chip_seed,challenge,response\n";
    for (int i = 0; i < opt.chips; i++)
        csv << i << ',' << seed + static_cast<std::uint64_t>(i) << ',' << opt.challenge << ','
            << bits_str(golden[static_cast<std::size_t>(i)]) << '\n';
    write_text(out / "responses.csv", csv.str());

    json jm;
    jm["n_chips"] = m.n_chips;
    jm["m_rereads"] = m.m_rereads;
    jm["response_bits"] = opt.pcfg.response_bits;
    jm["uniqueness_pct"] = m.uniqueness_pct;
    jm["uniformity_pct"] = m.uniformity_pct;
    jm["bit_aliasing_pct"] = m.bit_aliasing_pct;
    jm["reliability_pct"] = m.reliability_pct;
    write_text(out / "metrics.json", jm.dump(2) + "\n");

    std::cout << "chips: " << m.n_chips << ", re-reads: " << m.m_rereads << "\n";
    std::cout << "uniqueness: " << fmt17(m.uniqueness_pct) << " %\n";
    std::cout << "uniformity: " << fmt17(m.uniformity_pct) << " %\n";
    std::cout << "bit aliasing: " << fmt17(m.bit_aliasing_pct) << " %\n";
    std::cout << "reliability: " << fmt17(m.reliability_pct) << " %\n";
    std::cout << "wrote: responses.csv, metrics.json\n";
}

// ---------------------------------------------------------------------------
// lock
// ---------------------------------------------------------------------------

struct LockOpts {
    CommonOpts common;
    std::uint64_t net_seed = 1;
    int wrong_chips = 50;
    int eval_points = 2000;
};

void run_lock(const LockOpts& opt) {
    ToolConfig cfg = opt.common.config();
    std::uint64_t seed = opt.common.resolve_seed();
    std::filesystem::path out = opt.common.prepare_out();
    std::cout << "seed: " << seed << "\n";

    PufConfig pcfg;
    QuantizedMlp ref = make_reference_mlp(opt.net_seed);
    Dataset eval = make_dataset(ref, opt.eval_points, opt.net_seed ^ 0x5a5a5a5aULL);

    Crossbar enrolled(pcfg.rows, pcfg.cols, cfg.device, cfg.variation, seed, cfg.selector_r);
    puf_form(enrolled, pcfg);
    std::vector<std::uint8_t> key = puf_keystream(enrolled, pcfg, 2 * ref.levels.size());
    std::vector<int> locked = mask_levels(ref.levels, key);

    QuantizedMlp right = ref;
    right.levels = mask_levels(locked, key);
    bool identity = right.levels == ref.levels;
    double right_acc = accuracy(right, eval);

    double wrong_sum = 0.0, wrong_min = 1.0, wrong_max = 0.0;
    for (int i = 0; i < opt.wrong_chips; i++) {
        Crossbar imposter(pcfg.rows, pcfg.cols, cfg.device, cfg.variation,
                          seed + 1 + static_cast<std::uint64_t>(i), cfg.selector_r);
        puf_form(imposter, pcfg);
        QuantizedMlp wrong = ref;
        wrong.levels = mask_levels(locked, puf_keystream(imposter, pcfg, 2 * ref.levels.size()));
        double acc = accuracy(wrong, eval);
        wrong_sum += acc;
        wrong_min = std::min(wrong_min, acc);
        wrong_max = std::max(wrong_max, acc);
    }
    double wrong_mean = opt.wrong_chips > 0 ? wrong_sum / opt.wrong_chips : 0.0;

    json jl;
    jl["net_seed"] = opt.net_seed;
    jl["chip_seed"] = seed;
    jl["scale"] = ref.scale;
    jl["locked_levels"] = locked;
    write_text(out / "locked.json", jl.dump(2) + "\n");
    json jr;
    jr["unlock_identity"] = identity;
    jr["right_chip_accuracy"] = right_acc;
    jr["wrong_chips"] = opt.wrong_chips;
    jr["wrong_mean_accuracy"] = wrong_mean;
    jr["wrong_min_accuracy"] = wrong_min;
    jr["wrong_max_accuracy"] = wrong_max;
    write_text(out / "report.json", jr.dump(2) + "\n");

    std::cout << "unlock with enrolled chip restores weights: " << (identity ? "yes" : "NO")
              << "\n";
    std::cout << "right-chip accuracy: " << fmt17(right_acc) << "\n";
    if (opt.wrong_chips > 0)
        std::cout << "wrong-chip accuracy over " << opt.wrong_chips
                  << " chips: mean " << fmt17(wrong_mean) << ", min " << fmt17(wrong_min)
                  << ", max " << fmt17(wrong_max) << "\n";
    std::cout << "wrote: locked.json, report.json\n";
    if (!identity) throw_runtime("lock: unlocking with the enrolled chip failed");
}

// ---------------------------------------------------------------------------
// calibrate
// ---------------------------------------------------------------------------

struct CalOpts {
    CommonOpts common;
    int levels = 6;
};

void run_calibrate(const CalOpts& opt) {
    ToolConfig cfg = opt.common.config();
    std::uint64_t seed = opt.common.resolve_seed();
    std::filesystem::path out = opt.common.prepare_out();
    std::cout << "seed: " << seed << "\n";

    LevelConfig ladder = make_ladder(cfg, opt.levels);
    json jl;
    jl["n_levels"] = ladder.n_levels;
    jl["set_amplitude"] = ladder.set_amplitude;
    jl["set_width"] = ladder.set_width;
    jl["reset_width"] = ladder.reset_width;
    jl["dt"] = ladder.dt;
    jl["targets_ohm"] = ladder.targets;
    jl["reset_amplitudes_v"] = ladder.reset_amplitudes;
    jl["read_boundaries_ohm"] = ladder.read_boundaries;
    write_text(out / "ladder.json", jl.dump(2) + "\n");

    std::cout << "level,target_ohm,reset_amplitude_v\n";
    for (int k = 0; k < ladder.n_levels; k++)
        std::cout << k << ',' << fmt17(ladder.targets[static_cast<std::size_t>(k)]) << ','
                  << (k == 0 ? std::string("-")
                             : fmt17(ladder.reset_amplitudes[static_cast<std::size_t>(k - 1)]))
                  << "\n";
    std::cout << "wrote: ladder.json\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"resistive crossbar logic-in-memory toolchain"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    LimOpts lim;
    CLI::App* c_lim = app.add_subcommand("lim", "compile a logic netlist onto the array and run it");
    c_lim->add_option("netlist", lim.netlist, "netlist file (.names subset)")->required();
    c_lim->add_option("--rows", lim.rows, "array rows")->check(CLI::PositiveNumber);
    c_lim->add_option("--cols", lim.cols, "array cols")->check(CLI::PositiveNumber);
    c_lim->add_option("--inputs", lim.inputs, "one input vector as a 0/1 string");
    c_lim->add_flag("--exhaustive", lim.exhaustive, "run all input vectors (up to 10 inputs)");
    lim.common.attach(c_lim, "rxbar-lim");

    MvlOpts mvl;
    CLI::App* c_mvl = app.add_subcommand("mvl-add", "add two numbers in ternary residence");
    c_mvl->add_option("--a", mvl.a, "first addend (decimal, 64-bit)")->required();
    c_mvl->add_option("--b", mvl.b, "second addend (decimal, 64-bit)")->required();
    c_mvl->add_option("--trits", mvl.trits, "operand width in trits")->check(CLI::PositiveNumber);
    c_mvl->add_option("--rows", mvl.rows, "array rows")->check(CLI::PositiveNumber);
    c_mvl->add_option("--cols", mvl.cols, "array cols")->check(CLI::PositiveNumber);
    mvl.common.attach(c_mvl, "rxbar-mvl");

    FsaOpts fsa;
    CLI::App* c_fsa = app.add_subcommand("fsa", "run the two-action learning automaton");
    c_fsa->add_option("--depth", fsa.acfg.depth, "memory depth N (2N states)")
        ->check(CLI::PositiveNumber);
    c_fsa->add_option("--c1", fsa.acfg.c1, "penalty probability for action 1");
    c_fsa->add_option("--c2", fsa.acfg.c2, "penalty probability for action 2");
    c_fsa->add_option("--steps", fsa.acfg.steps, "environment steps")->check(CLI::PositiveNumber);
    c_fsa->add_option("--window", fsa.acfg.window, "trailing window for the action-1 frequency")
        ->check(CLI::PositiveNumber);
    fsa.common.attach(c_fsa, "rxbar-fsa");

    TrngOpts trng;
    CLI::App* c_trng = app.add_subcommand("trng", "calibrate and stream the random-bit source");
    c_trng->add_option("--bits", trng.bits, "bits to emit")->check(CLI::PositiveNumber);
    c_trng->add_flag("--debias", trng.debias, "emit the corrected stream instead of raw bits");
    c_trng->add_option("--target-p", trng.target_p, "calibration ones-rate");
    trng.common.attach(c_trng, "rxbar-trng");

    PufOpts puf;
    CLI::App* c_puf = app.add_subcommand("puf", "population metrics for the chip fingerprint");
    c_puf->add_option("--chips", puf.chips, "population size")->check(CLI::PositiveNumber);
    c_puf->add_option("--rereads", puf.rereads, "re-formations per chip")
        ->check(CLI::PositiveNumber);
    c_puf->add_option("--challenge", puf.challenge, "challenge word");
    c_puf->add_option("--rows", puf.pcfg.rows, "chip rows")->check(CLI::PositiveNumber);
    c_puf->add_option("--cols", puf.pcfg.cols, "chip cols")->check(CLI::PositiveNumber);
    c_puf->add_option("--bits", puf.pcfg.response_bits, "response bits per challenge")
        ->check(CLI::PositiveNumber);
    puf.common.attach(c_puf, "rxbar-puf");

    LockOpts lock;
    CLI::App* c_lock = app.add_subcommand("lock", "lock the demo network to a chip");
    c_lock->add_option("--net-seed", lock.net_seed, "reference network seed");
    c_lock->add_option("--wrong-chips", lock.wrong_chips, "imposter chips to evaluate")
        ->check(CLI::NonNegativeNumber);
    c_lock->add_option("--eval", lock.eval_points, "evaluation points")
        ->check(CLI::PositiveNumber);
    lock.common.attach(c_lock, "rxbar-lock");

    CalOpts cal;
    CLI::App* c_cal = app.add_subcommand("calibrate", "build the multi-level ladder");
    c_cal->add_option("--levels", cal.levels, "ladder size");
    cal.common.attach(c_cal, "rxbar-cal");

    try {
        app.parse(argc, argv);
        if (*c_lim) run_lim(lim);
        if (*c_mvl) run_mvl(mvl);
        if (*c_fsa) run_fsa(fsa);
        if (*c_trng) run_trng(trng);
        if (*c_puf) run_puf(puf);
        if (*c_lock) run_lock(lock);
        if (*c_cal) run_calibrate(cal);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::runtime:
            case ErrorKind::calibration:
                return 1;
            default:
                return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
