#pragma once

// Multi-valued logic on the crossbar: balanced use of the multi-level cell
// ladder for base-3 arithmetic, and a two-action learning automaton whose
// state lives in a single cell's resistance level.
//
// Ternary numbers are little-endian digit vectors (trit i weighs 3^i, each
// digit in {0,1,2}).  Digits map onto ladder levels 0..2; an array read that
// lands above level 2 (possible only with cycle jitter enabled) clamps to 2.
// Addition is digit-serial: the controller reads one digit of each operand,
// adds them with the running carry, writes the sum digit back, and keeps the
// carry in controller state.  The array stores operands and result; the
// carry chain is the controller's contribution.  41 trits cover the full
// 64-bit unsigned range (3^41 > 2^64), so two machine words can be added
// entirely in ternary residence.
//
// The automaton is a classic two-action reward/penalty design with memory
// depth N: states 1..N commit to action 1, states N+1..2N to action 2.
// Reward jumps to the deepest state of the current action (1 or 2N); penalty
// walks one state toward the boundary and crosses it at the shallowest
// state.  The state is stored as ladder level s-1, giving a 2N-level cell.
// The controller keeps a shadow copy only to *count* read-back
// disagreements; the behavioral state is always the one read from the
// device, so the automaton genuinely runs on the memory.

#include <cstdint>
#include <vector>

#include "rxbar/device.hpp"
#include "rxbar/xbar.hpp"

namespace rxbar {

using TritVector = std::vector<int>;

/// Value <-> digit conversions.  Conversions are exact over the full
/// unsigned 64-bit range; trits_from_u64 throws Error(config) when the value
/// does not fit in n trits.
[[nodiscard]] TritVector trits_from_u64(std::uint64_t value, int n);
/// Throws Error(config) if the vector's value exceeds 64 bits or contains an
/// out-of-range digit.
[[nodiscard]] std::uint64_t u64_from_trits(const TritVector& trits);

/// Pure big-integer-style ternary addition (schoolbook, any width).  The
/// result has max(|a|,|b|) + 1 digits.  Reference implementation for the
/// device-backed adder.
[[nodiscard]] TritVector add_trits_software(const TritVector& a, const TritVector& b);

/// Where ternary_add places its digits: operands and result are packed
/// row-major from cell 0 of the array, a first, then b, then the sum.
struct TernaryLayout {
    int n = 0;    // operand width in trits
    int cols = 0; // array width used to flatten indices
    [[nodiscard]] CellRef a(int i) const { return flat(i); }
    [[nodiscard]] CellRef b(int i) const { return flat(n + i); }
    [[nodiscard]] CellRef s(int i) const { return flat(2 * n + i); }
    [[nodiscard]] CellRef flat(int k) const { return CellRef{k / cols, k % cols}; }
};

struct TernaryAddResult {
    TritVector sum;       // n + 1 digits, read back from the array
    TernaryLayout layout; // where everything lives
};

/// Add two ternary numbers in-array.  Operand digits are programmed into the
/// array (init phase), the digit-serial sweep reads and writes through the
/// array path (evaluate phase), and the returned sum is read back from the
/// result cells (read phase).  Requires 3n+1 cells; throws
/// Error(capacity) otherwise.  cfg must provide at least 3 levels.
TernaryAddResult ternary_add(Crossbar& xbar, const TritVector& a, const TritVector& b,
                             const LevelConfig& cfg);

// ---------------------------------------------------------------------------
// Learning automaton
// ---------------------------------------------------------------------------

struct AutomatonConfig {
    int depth = 5;       // N; the automaton has 2N states
    double c1 = 0.2;     // penalty probability when taking action 1
    double c2 = 0.6;     // penalty probability when taking action 2
    int steps = 10000;   // environment interactions
    int row = 0;         // cell that stores the state
    int col = 0;
    int window = 1000;   // trailing window for the action-1 frequency

    void validate() const;
};

struct AutomatonStep {
    int state_before = 0; // state the controller read from the device
    int action = 0;       // 1 or 2
    bool penalty = false; // environment response
    int state_after = 0;  // state programmed back
};

struct AutomatonResult {
    std::vector<AutomatonStep> trajectory;
    long misdetections = 0;        // device read disagreed with last write
    double action1_frequency = 0.0; // over the trailing window
};

/// One transition of the reward/penalty rule.  penalty=false rewards.
[[nodiscard]] int krinsky_next(int state, bool penalty, int depth);

/// Run the automaton against the stochastic environment with its state in
/// cell (cfg.row, cfg.col).  The environment draws one uniform variate per
/// step from the substream ("fsa.env", env_seed); device jitter (if enabled)
/// lives on the array's own stream, so a software twin fed the same env_seed
/// sees the identical feedback sequence.  cfg requires 2*depth ladder
/// levels.  Starts from state = depth (shallowest action-1 state).
AutomatonResult run_automaton(Crossbar& xbar, const AutomatonConfig& cfg,
                              const LevelConfig& levels, std::uint64_t env_seed);

/// Pure-software twin: same rule, same environment stream, no device.
AutomatonResult run_automaton_software(const AutomatonConfig& cfg, std::uint64_t env_seed);

} // namespace rxbar
