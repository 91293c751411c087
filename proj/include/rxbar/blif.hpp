#pragma once

// Combinational netlist input.
//
// The accepted format is the classical .model/.inputs/.outputs/.names subset:
//
//   .model adder
//   .inputs a b cin
//   .outputs sum cout
//   .names a b cin sum
//   100 1
//   010 1
//   001 1
//   111 1
//   .end
//
// Each .names block lists single-output cover rows over {0,1,-} with output
// value 1 (the on-set).  Deliberately out of scope, rejected with an error:
// latches, subcircuits, constant nodes (zero-input .names), and all-dash
// cover rows (disguised constants).  Comments (#) and backslash line
// continuations are handled.  All parse errors carry 1-based line numbers.

#include <string>
#include <vector>

namespace rxbar {

struct LogicNode {
    std::string output;
    std::vector<std::string> inputs;
    std::vector<std::string> covers; // one pattern per row, length == inputs.size()
    int line = 0;                    // .names line, for diagnostics
};

struct LogicNetlist {
    std::string model;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<LogicNode> nodes; // topologically sorted by parse_netlist
};

/// Parse and validate: every signal defined, no duplicate drivers, no
/// combinational cycles.  Throws Error(parse) with a line number.
LogicNetlist parse_netlist(const std::string& text);

/// Golden reference evaluation.  `input_values` follows .inputs order;
/// returns values in .outputs order.
std::vector<bool> logical_sim(const LogicNetlist& net, const std::vector<bool>& input_values);

} // namespace rxbar
