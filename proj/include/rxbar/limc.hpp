#pragma once

// Logic-in-memory compiler: netlist -> gate graph -> placed pulse schedule.
//
// The physical gate library has three members, all realized with shared-line
// resistive dividers inside the array (no readout between gates):
//
//   OR2   input cells driven at -1.4 V, output row grounded, shared column
//         floating.  Any low-ohmic input pulls the floating column low enough
//         to SET the output cell; two high-ohmic inputs leave it safely
//         inside the deadband.
//   NOT   three cells: input biased at +0.6 V, output (pre-SET) at -1.3 V,
//         and an always-low keeper at +0.7 V.  A low-ohmic input pins the
//         floating column near 0 and the output RESETs; a high-ohmic input
//         lets the keeper pull the column up, protecting the output.  The
//         input never leaves the deadband in either case.
//   COPY  two cells: source row driven at -1.8 V, destination row grounded.
//         The divider SETs the destination only if the source is low-ohmic.
//
// Divider outputs stall short of the full rail, so OR2 and COPY outputs are
// snapped by a restore pair (sense pulse + conditional full SET) before
// anything consumes them.  Gate inputs always see full-rail levels.
//
// Arrays with at least 3 rows and 2 columns use a staging discipline: every
// signal owns a home cell in the left columns, gates fire in the dedicated
// rightmost (staging) column, and COPY legs shuttle operands in and results
// out.  Smaller geometries fall back to behavioral gates built from sense +
// conditional-write pairs (flagged on the schedule), which execute correctly
// but exercise no divider physics.
//
// AND is not a library gate: the mapper uses OR plus three inverters.
//
// Every touched cell is formed (SET + full RESET) in the init segment so that
// logic sees one uniform high-resistance state (~503 kOhm) instead of the
// pristine 1 MOhm of a never-switched cell; mixed populations would corrupt
// the OR margins.

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rxbar/blif.hpp"
#include "rxbar/xbar.hpp"

namespace rxbar {

enum class GateKind { OR2, NOT, COPY };

struct Gate {
    GateKind kind;
    int a = -1;   // first operand signal
    int b = -1;   // second operand (OR2 only)
    int out = -1; // result signal
};

struct GateGraph {
    std::vector<std::string> signal_names; // id -> name; internal ones start with '$'
    std::vector<int> inputs;               // signal ids, .inputs order
    std::vector<int> outputs;              // signal ids, .outputs order
    std::vector<Gate> gates;               // topological order
};

/// Map a parsed netlist onto {OR2, NOT, COPY}.  Rejects nodes with more than
/// 16 inputs.  For netlists with up to 10 primary inputs the result is
/// verified exhaustively against logical_sim before being returned.
GateGraph tech_map(const LogicNetlist& net);

/// Evaluate the gate graph directly (no array).
std::vector<bool> gate_sim(const GateGraph& graph, const std::vector<bool>& input_values);

/// Voltage/timing recipes for the gate library.  The defaults are tuned for
/// the default device corner; margins are asserted by the test suite.
struct GateRecipes {
    double or_v = 1.4;   // V, magnitude on OR2 input rows
    double or_w = 5e-6;  // s
    double not_v_in = 0.6;
    double not_v_out = -1.3;
    double not_v_keep = 0.7;
    double not_w = 8e-6;
    double copy_v = 1.8; // clone divider drive (also used by clone_cell)
    double copy_w = 5e-6;
    double set_v = 2.0; // full-rail writes
    double reset_v = -2.0;
    double write_w = 1e-6;
    double sense_v = 0.2;
    double sense_w = 1e-7;
    double sense_threshold = 1e5; // Ohm; LRS below, HRS above (nominal corner)
    double dt = 1e-8;
};

struct PhaseSegment {
    std::string label; // "init", "load", "evaluate", "read"
    std::size_t first_step = 0;
    std::size_t n_steps = 0;
};

struct LimSchedule {
    int rows = 0;
    int cols = 0;
    GateGraph graph;
    GateRecipes recipes;
    std::vector<CellRef> home;  // per signal id
    PulseProgram program;       // init + load + evaluate + read, in order
    std::vector<PhaseSegment> segments;
    std::vector<std::pair<std::size_t, int>> load_steps; // program step index -> input signal id
    bool behavioral_fallback = false; // true when geometry forced sense-write gates
    int read_op = 0;                  // op id of the final read segment

    // Op id layout: 0 = init/forming, 1..n_inputs = loads (in .inputs
    // order), then one per gate (graph order), then read_op last.
    [[nodiscard]] int load_op(std::size_t input_pos) const { return 1 + static_cast<int>(input_pos); }
    [[nodiscard]] int gate_op(std::size_t gate_pos) const {
        return 1 + static_cast<int>(graph.inputs.size() + gate_pos);
    }
};

/// Place the graph on a rows x cols array and compile the pulse schedule.
/// Throws Error(capacity) with exact numbers when the placement does not fit.
LimSchedule build_schedule(const GateGraph& graph, int rows, int cols,
                           const GateRecipes& recipes = {});

/// Patch the load steps for this input vector, run the whole program, and
/// classify the output home cells.  The array must match the schedule's
/// dimensions.  Returns output bits in .outputs order.
std::vector<bool> execute_schedule(Crossbar& xbar, LimSchedule& schedule,
                                   const std::vector<bool>& input_values);

} // namespace rxbar
