#include "rxbar/mvl.hpp"

#include <algorithm>
#include <string>

#include "rxbar/errors.hpp"
#include "rxbar/rng.hpp"

namespace rxbar {

namespace {

void check_digits(const TritVector& t, const char* who) {
    for (int d : t)
        if (d < 0 || d > 2)
            throw_config(std::string(who) + ": digit " + std::to_string(d) +
                         " out of range [0,2]");
}

} // namespace

TritVector trits_from_u64(std::uint64_t value, int n) {
    if (n < 0 || n > 81) throw_config("trits_from_u64: width must be in [0,81]");
    TritVector out(static_cast<std::size_t>(n), 0);
    std::uint64_t rest = value;
    for (int i = 0; i < n; i++) {
        out[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3);
        rest /= 3;
    }
    if (rest != 0)
        throw_config("trits_from_u64: value " + std::to_string(value) + " does not fit in " +
                     std::to_string(n) + " trits");
    return out;
}

std::uint64_t u64_from_trits(const TritVector& trits) {
    check_digits(trits, "u64_from_trits");
    unsigned __int128 acc = 0;
    unsigned __int128 weight = 1;
    constexpr unsigned __int128 kMax = ~std::uint64_t{0};
    for (std::size_t i = 0; i < trits.size(); i++) {
        acc += weight * static_cast<unsigned>(trits[i]);
        if (acc > kMax) throw_config("u64_from_trits: value exceeds 64 bits");
        if (i + 1 < trits.size()) {
            weight *= 3;
            if (weight > kMax) {
                // Remaining digits must all be zero or the value overflows.
                for (std::size_t j = i + 1; j < trits.size(); j++)
                    if (trits[j] != 0) throw_config("u64_from_trits: value exceeds 64 bits");
                break;
            }
        }
    }
    return static_cast<std::uint64_t>(acc);
}

TritVector add_trits_software(const TritVector& a, const TritVector& b) {
    check_digits(a, "add_trits_software");
    check_digits(b, "add_trits_software");
    std::size_t n = std::max(a.size(), b.size());
    TritVector out(n + 1, 0);
    int carry = 0;
    for (std::size_t i = 0; i < n; i++) {
        int ai = i < a.size() ? a[i] : 0;
        int bi = i < b.size() ? b[i] : 0;
        int t = ai + bi + carry;
        out[i] = t % 3;
        carry = t / 3;
    }
    out[n] = carry;
    return out;
}

TernaryAddResult ternary_add(Crossbar& xbar, const TritVector& a, const TritVector& b,
                             const LevelConfig& cfg) {
    check_digits(a, "ternary_add");
    check_digits(b, "ternary_add");
    if (cfg.n_levels < 3) throw_config("ternary_add: level ladder must have at least 3 levels");
    int n = static_cast<int>(std::max(a.size(), b.size()));
    if (n == 0) throw_config("ternary_add: empty operands");
    long need = 3L * n + 1;
    long have = static_cast<long>(xbar.rows()) * xbar.cols();
    if (need > have)
        throw_capacity("ternary_add: " + std::to_string(n) + "-trit operands need " +
                       std::to_string(need) + " cells, array has " + std::to_string(have));

    TernaryLayout lay;
    lay.n = n;
    lay.cols = xbar.cols();

    constexpr int kOpLoad = 0, kOpSweep = 1, kOpRead = 2;
    for (int i = 0; i < n; i++) {
        int ai = i < static_cast<int>(a.size()) ? a[static_cast<std::size_t>(i)] : 0;
        int bi = i < static_cast<int>(b.size()) ? b[static_cast<std::size_t>(i)] : 0;
        CellRef ca = lay.a(i), cb = lay.b(i);
        program_cell_level(xbar, ca.row, ca.col, cfg, ai, Phase::init, kOpLoad);
        program_cell_level(xbar, cb.row, cb.col, cfg, bi, Phase::init, kOpLoad);
    }

    // Digit-serial sweep: the array supplies the digits, the controller
    // carries one base-3 digit of state between iterations.
    int carry = 0;
    for (int i = 0; i < n; i++) {
        CellRef ca = lay.a(i), cb = lay.b(i), cs = lay.s(i);
        int ai = std::min(read_cell_level(xbar, ca.row, ca.col, cfg, Phase::evaluate, kOpSweep), 2);
        int bi = std::min(read_cell_level(xbar, cb.row, cb.col, cfg, Phase::evaluate, kOpSweep), 2);
        int t = ai + bi + carry;
        program_cell_level(xbar, cs.row, cs.col, cfg, t % 3, Phase::evaluate, kOpSweep);
        carry = t / 3;
    }
    CellRef top = lay.s(n);
    program_cell_level(xbar, top.row, top.col, cfg, carry, Phase::evaluate, kOpSweep);

    TernaryAddResult res;
    res.layout = lay;
    res.sum.resize(static_cast<std::size_t>(n) + 1);
    for (int i = 0; i <= n; i++) {
        CellRef cs = lay.s(i);
        res.sum[static_cast<std::size_t>(i)] =
            std::min(read_cell_level(xbar, cs.row, cs.col, cfg, Phase::read, kOpRead), 2);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Learning automaton
// ---------------------------------------------------------------------------

void AutomatonConfig::validate() const {
    if (depth < 1) throw_config("automaton: depth must be >= 1");
    if (!(c1 >= 0.0 && c1 <= 1.0)) throw_config("automaton: c1 must be in [0,1]");
    if (!(c2 >= 0.0 && c2 <= 1.0)) throw_config("automaton: c2 must be in [0,1]");
    if (steps < 1) throw_config("automaton: steps must be >= 1");
    if (window < 1 || window > steps)
        throw_config("automaton: window must be in [1, steps]");
}

int krinsky_next(int state, bool penalty, int depth) {
    int n2 = 2 * depth;
    if (state < 1 || state > n2) throw_config("krinsky_next: state out of range");
    bool action1 = state <= depth;
    if (!penalty) return action1 ? 1 : n2; // reward: jump to the deepest state
    if (action1) return state == depth ? depth + 1 : state + 1;
    return state == depth + 1 ? depth : state - 1;
}

namespace {

struct EnvStream {
    RngStream rng;
    explicit EnvStream(std::uint64_t seed) : rng(RngStream::derive(seed, "fsa.env", 0)) {}
    bool penalty_for(int action, const AutomatonConfig& cfg) {
        double u = rng.uniform();
        return u < (action == 1 ? cfg.c1 : cfg.c2);
    }
};

double trailing_action1(const std::vector<AutomatonStep>& traj, int window) {
    std::size_t first = traj.size() - static_cast<std::size_t>(window);
    long hits = 0;
    for (std::size_t i = first; i < traj.size(); i++)
        if (traj[i].action == 1) hits++;
    return static_cast<double>(hits) / window;
}

} // namespace

AutomatonResult run_automaton(Crossbar& xbar, const AutomatonConfig& cfg,
                              const LevelConfig& levels, std::uint64_t env_seed) {
    cfg.validate();
    int n2 = 2 * cfg.depth;
    if (levels.n_levels < n2)
        throw_config("automaton: depth " + std::to_string(cfg.depth) + " needs " +
                     std::to_string(n2) + " ladder levels, config has " +
                     std::to_string(levels.n_levels));
    xbar.check_cell(cfg.row, cfg.col);

    EnvStream env(env_seed);
    AutomatonResult res;
    res.trajectory.reserve(static_cast<std::size_t>(cfg.steps));

    constexpr int kOpInit = 0, kOpStep = 1;
    int shadow = cfg.depth; // start at the shallowest action-1 state
    program_cell_level(xbar, cfg.row, cfg.col, levels, shadow - 1, Phase::init, kOpInit);

    for (int k = 0; k < cfg.steps; k++) {
        int lvl = read_cell_level(xbar, cfg.row, cfg.col, levels, Phase::evaluate, kOpStep);
        int state = std::clamp(lvl + 1, 1, n2);
        if (state != shadow) res.misdetections++;
        int action = state <= cfg.depth ? 1 : 2;
        bool penalty = env.penalty_for(action, cfg);
        int next = krinsky_next(state, penalty, cfg.depth);
        program_cell_level(xbar, cfg.row, cfg.col, levels, next - 1, Phase::evaluate, kOpStep);
        shadow = next;
        res.trajectory.push_back({state, action, penalty, next});
    }
    res.action1_frequency = trailing_action1(res.trajectory, cfg.window);
    return res;
}

AutomatonResult run_automaton_software(const AutomatonConfig& cfg, std::uint64_t env_seed) {
    cfg.validate();
    EnvStream env(env_seed);
    AutomatonResult res;
    res.trajectory.reserve(static_cast<std::size_t>(cfg.steps));
    int state = cfg.depth;
    for (int k = 0; k < cfg.steps; k++) {
        int action = state <= cfg.depth ? 1 : 2;
        bool penalty = env.penalty_for(action, cfg);
        int next = krinsky_next(state, penalty, cfg.depth);
        res.trajectory.push_back({state, action, penalty, next});
        state = next;
    }
    res.action1_frequency = trailing_action1(res.trajectory, cfg.window);
    return res;
}

} // namespace rxbar
