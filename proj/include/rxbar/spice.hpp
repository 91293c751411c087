#pragma once

// SPICE netlist emission for pulse programs.
//
// The emitted deck is structural: one X instance per array cell (a two-
// resistor subcircuit standing in for memory element + selector), one PWL
// voltage source per line that is ever driven to a nonzero value, and one
// PWL source per gate node of every cell that is ever selected.  Lines that
// are only ever at 0 V (or floating) are tied to ground with a DC 0 source
// and a comment.  Each step contributes exactly two PWL breakpoints per
// source -- a short rise edge (min(1 ns, width/100)) and the hold until the
// step's end -- so breakpoint times are strictly increasing and step counts
// can be recovered from the deck.  Conditional steps are emitted with their
// nominal drive plus a comment; resolving the condition is the simulator's
// job, not the waveform's.
//
// All numbers are printed with %.17g so a deck diff is an exact replay diff.

#include <map>
#include <string>
#include <vector>

#include "rxbar/device.hpp"
#include "rxbar/xbar.hpp"

namespace rxbar {

std::string emit_spice(const PulseProgram& program, const DeviceParams& nominal,
                       double selector_r, const std::string& title);

/// What a consumer can recover from the deck without simulating it.  Used to
/// verify emission round-trips.
struct SpiceSummary {
    int n_instances = 0;    // X lines
    int n_sources = 0;      // V lines (PWL and DC ties)
    int n_pwl_sources = 0;  // V lines carrying a PWL waveform
    double tran_step = 0.0; // .tran arguments
    double tran_stop = 0.0;
    std::map<std::string, int> pwl_points; // source name -> breakpoint count
};

/// Parse an emitted deck back.  Validates that every PWL time axis is
/// strictly increasing and that breakpoint counts are even.  Throws
/// Error(parse) on malformed decks.
SpiceSummary parse_spice_summary(const std::string& deck);

} // namespace rxbar
