#pragma once

// 1T1R crossbar array with a shared-line pulse engine.
//
// Topology: every cell sits between one row line and one column line behind
// an ideal selector switch with on-resistance `selector_r`.  A pulse step
// drives some lines to fixed voltages, leaves others floating, and closes
// the selectors of an explicit set of cells.  Unselected cells are perfectly
// isolated: their state cannot move and they dissipate nothing, no matter
// what the lines do (the selector removes sneak paths by construction).
//
// Floating lines matter: they are how conditional switching works.  A
// floating line's voltage is the conductance-weighted average of the driven
// lines it connects to through selected cells -- a resistive divider.  A
// selected cell whose row AND column both float has no defined operating
// point and is rejected as a program error.
//
// Energy accounting: per selected cell we integrate v_dev * i with the
// trapezoid rule over the Euler boundaries, where v_dev is the voltage across
// the memory element itself (after the selector divider).  Selector
// dissipation is deliberately not attributed to the cell.  The execution
// trace resolves energy by device, by op id, by phase, and by the full
// (cell, op, phase) key; the four views sum to the same total by
// construction.
//
// Cycle-to-cycle replay: each cell carries a cycle counter.  The jitter for
// pulse event N of cell (r, c) is drawn from a stream derived from the array
// seed, the cell index, and N alone, so saving and reloading an array
// continues the exact jitter sequence.  A "pulse event" is any executed step
// in which the selected cell saw a nonzero series voltage at the step start.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "rxbar/device.hpp"
#include "rxbar/rng.hpp"

namespace rxbar {

struct CellRef {
    int row = 0;
    int col = 0;
    friend bool operator==(const CellRef& a, const CellRef& b) {
        return a.row == b.row && a.col == b.col;
    }
};

enum class Phase { init = 0, evaluate = 1, read = 2, reset = 3 };
inline constexpr int kPhaseCount = 4;
[[nodiscard]] const char* phase_name(Phase p);

/// Gate for conditional steps: evaluated against one cell's resistance at
/// step start.  If the predicate fails the step is skipped entirely (no
/// drive, no energy, no cycle count), but its width still elapses.
struct StepCondition {
    CellRef cell;
    bool fire_if_below = true; // true: fire when R < threshold; false: when R >= threshold
    double threshold_ohm = 0.0;
};

struct Step {
    std::vector<std::optional<double>> row_drive; // size rows; nullopt = floating
    std::vector<std::optional<double>> col_drive; // size cols
    std::vector<CellRef> select;                  // selectors closed this step
    double width = 1e-6;
    Phase phase = Phase::evaluate;
    int op_id = 0;
    std::optional<StepCondition> condition;
};

struct PulseProgram {
    int rows = 0;
    int cols = 0;
    double dt = 1e-9;
    std::vector<Step> steps;

    /// Append a step with all lines floating and nothing selected.
    Step& add_step(double width, Phase phase, int op_id);
    void validate() const;
};

struct ExecutionTrace {
    std::uint64_t steps_executed = 0;
    std::uint64_t steps_skipped = 0; // conditional steps whose predicate failed
    double total_time = 0.0;
    double total_energy = 0.0;
    std::vector<double> per_device; // rows*cols, row-major
    std::map<int, double> per_op;
    std::array<double, kPhaseCount> per_phase{};
    std::map<std::tuple<int, int, int, int>, double> per_cell_op_phase; // (row, col, op, phase)

    void reset(int rows, int cols);
};

/// Flat summary derived from a trace; the redundant views are kept because
/// reports consume them in different shapes.
struct EnergyReport {
    double total = 0.0;
    std::array<double, kPhaseCount> per_phase{};
    std::map<int, double> per_op;
    std::vector<double> per_device;
};

[[nodiscard]] EnergyReport energy_report(const ExecutionTrace& trace);

class Crossbar {
  public:
    /// Builds the array and draws every cell's device instance from the
    /// nominal corner (substream "d2d", indexed by linear cell index).
    Crossbar(int rows, int cols, const DeviceParams& nominal, const VariationSpec& var,
             std::uint64_t seed, double selector_r = 1e3);

    [[nodiscard]] int rows() const { return rows_; }
    [[nodiscard]] int cols() const { return cols_; }
    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] double selector_r() const { return selector_r_; }
    [[nodiscard]] const DeviceParams& nominal() const { return nominal_; }
    [[nodiscard]] const VariationSpec& variation() const { return var_; }
    void set_c2c(bool enabled) { var_.c2c_enabled = enabled; }

    [[nodiscard]] const DeviceParams& params(int r, int c) const { return cell(r, c).params; }
    [[nodiscard]] const DeviceState& state(int r, int c) const { return cell(r, c).state; }
    [[nodiscard]] DeviceState& state(int r, int c) { return cell(r, c).state; }
    [[nodiscard]] double cell_resistance(int r, int c) const {
        return resistance(cell(r, c).state, cell(r, c).params);
    }

    [[nodiscard]] ExecutionTrace& trace() { return trace_; }
    [[nodiscard]] const ExecutionTrace& trace() const { return trace_; }

    /// Jitter stream for the cell's *current* cycle count.  Device-path
    /// helpers that apply pulses directly anchor their draws here.
    [[nodiscard]] RngStream pulse_stream(int r, int c) const;

    void check_cell(int r, int c) const;

  private:
    struct Cell {
        DeviceParams params;
        DeviceState state;
    };

    [[nodiscard]] Cell& cell(int r, int c) { return cells_[idx(r, c)]; }
    [[nodiscard]] const Cell& cell(int r, int c) const { return cells_[idx(r, c)]; }
    [[nodiscard]] std::size_t idx(int r, int c) const {
        return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(c);
    }

    int rows_;
    int cols_;
    double selector_r_;
    std::uint64_t seed_;
    DeviceParams nominal_;
    VariationSpec var_;
    std::vector<Cell> cells_;
    ExecutionTrace trace_;

    friend void run_program(Crossbar&, const PulseProgram&);
    friend std::string serialize(const Crossbar&);
    friend Crossbar deserialize(const std::string&);
};

/// Execute every step of the program against the array, accumulating into
/// the array's trace.  Throws on dimension mismatch or invalid topology.
void run_program(Crossbar& xbar, const PulseProgram& program);

/// Single-cell write/read primitives built on run_program.  Amplitudes are
/// the module-level defaults used throughout: +/-2 V, 1 us writes; 0.2 V,
/// 0.1 us reads.
struct AccessSpec {
    double set_v = 2.0;
    double set_w = 1e-6;
    double reset_v = -2.0;
    double reset_w = 1e-6;
    double read_v = 0.2;
    double read_w = 1e-7;
    double dt = 1e-9;
};

void write_bit(Crossbar& xbar, int r, int c, bool bit, Phase phase = Phase::evaluate,
               int op_id = 0, const AccessSpec& spec = {});

/// Read pulse + threshold compare at sqrt(r_on * r_off) of the cell's own
/// instance parameters.  true = low resistance.
bool read_bit(Crossbar& xbar, int r, int c, Phase phase = Phase::read, int op_id = 0,
              const AccessSpec& spec = {});

/// Copy src's bit into dst using the in-array resistive divider (no external
/// readout): drive src's line hard, let the shared line float, and the dst
/// cell SETs only if src is low-ohmic.  A restore pulse then snaps dst to the
/// full rail.  Cells sharing neither a row nor a column route through the
/// corner cell (src.row, dst.col), which is overwritten in the process.
void clone_cell(Crossbar& xbar, CellRef src, CellRef dst, Phase phase = Phase::evaluate,
                int op_id = 0, const AccessSpec& spec = {});

/// Multi-level access through the per-cell write driver (SET preamble +
/// calibrated RESET applied directly across the cell; the driver compensates
/// the selector drop).  Reads go through the array path.
void program_cell_level(Crossbar& xbar, int r, int c, const LevelConfig& cfg, int level,
                        Phase phase = Phase::evaluate, int op_id = 0);
int read_cell_level(Crossbar& xbar, int r, int c, const LevelConfig& cfg,
                    Phase phase = Phase::read, int op_id = 0);

/// Text snapshot of the array (header + one line per cell, %.17g fields).
/// The execution trace is not part of the snapshot.  Deserializing and
/// re-running the same pulses replays bit-identically, including jitter.
std::string serialize(const Crossbar& xbar);
Crossbar deserialize(const std::string& text);

} // namespace rxbar
