#include "rxbar/spice.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "rxbar/errors.hpp"
#include "rxbar/version.hpp"

namespace rxbar {

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// Per-line drive trajectory: one optional voltage per step.
using LineTrack = std::vector<std::optional<double>>;

bool ever_nonzero(const LineTrack& t) {
    for (const auto& v : t)
        if (v.has_value() && *v != 0.0) return true;
    return false;
}

void emit_pwl(std::ostringstream& out, const std::string& name, const std::string& node,
              const LineTrack& track, const std::vector<double>& t_start,
              const std::vector<double>& width) {
    std::vector<int> floating_steps;
    out << name << " " << node << " 0 PWL(";
    for (std::size_t k = 0; k < track.size(); k++) {
        double v = 0.0;
        if (track[k].has_value())
            v = *track[k];
        else
            floating_steps.push_back(static_cast<int>(k));
        double rise = std::min(1e-9, width[k] / 100.0);
        if (k) out << " ";
        out << fmt_g(t_start[k] + rise) << " " << fmt_g(v) << " " << fmt_g(t_start[k] + width[k])
            << " " << fmt_g(v);
    }
    out << ")\n";
    if (!floating_steps.empty()) {
        out << "* note: " << node << " floats during step";
        if (floating_steps.size() > 1) out << "s";
        for (int k : floating_steps) out << " " << k;
        out << "; approximated as 0 V above\n";
    }
}

} // namespace

std::string emit_spice(const PulseProgram& program, const DeviceParams& nominal,
                       double selector_r, const std::string& title) {
    std::ostringstream out;
    out << "* rxbar netlist v" << kVersion << "\n";
    out << "* " << (title.empty() ? "untitled program" : title) << "\n";
    if (program.steps.empty()) {
        out << "* empty program\n";
        out << ".end\n";
        return out.str();
    }
    program.validate();

    const int rows = program.rows;
    const int cols = program.cols;
    const std::size_t n_steps = program.steps.size();

    std::vector<double> t_start(n_steps), width(n_steps);
    double t = 0.0;
    for (std::size_t k = 0; k < n_steps; k++) {
        t_start[k] = t;
        width[k] = program.steps[k].width;
        t += width[k];
    }
    double t_total = t;

    // Step table (comments) -- the human-readable program.
    out << "* steps: " << n_steps << ", total " << fmt_g(t_total) << " s, dt " << fmt_g(program.dt)
        << " s\n";
    for (std::size_t k = 0; k < n_steps; k++) {
        const Step& st = program.steps[k];
        out << "* step " << k << ": t=" << fmt_g(t_start[k]) << " width=" << fmt_g(width[k])
            << " phase=" << phase_name(st.phase) << " op=" << st.op_id;
        if (st.condition) {
            const StepCondition& c = *st.condition;
            out << " conditional: fires when R(" << c.cell.row << "," << c.cell.col << ") "
                << (c.fire_if_below ? "<" : ">=") << " " << fmt_g(c.threshold_ohm)
                << " ohm (simulator-resolved; nominal drive emitted)";
        }
        out << "\n";
    }

    out << ".subckt rram_cell p n g ron=" << fmt_g(nominal.r_on) << " roff=" << fmt_g(nominal.r_off)
        << " rsel=" << fmt_g(selector_r) << "\n";
    out << "* memory element placeholder: the state-dependent resistance is\n";
    out << "* resolved by the companion simulator, not this static deck\n";
    out << "Rmem p mid {ron}\n";
    out << "Rsel mid n {rsel}\n";
    out << ".ends rram_cell\n";

    for (int r = 0; r < rows; r++)
        for (int c = 0; c < cols; c++)
            out << "Xr" << r << "c" << c << " row" << r << " col" << c << " gate" << r << "c" << c
                << " rram_cell\n";

    // Row and column drives.
    for (int r = 0; r < rows; r++) {
        LineTrack track(n_steps);
        for (std::size_t k = 0; k < n_steps; k++)
            track[k] = program.steps[k].row_drive[static_cast<std::size_t>(r)];
        std::string node = "row" + std::to_string(r);
        if (ever_nonzero(track)) {
            emit_pwl(out, "V" + node, node, track, t_start, width);
        } else {
            out << "* " << node << " never driven above 0 V; tied to ground\n";
            out << "V" << node << " " << node << " 0 DC 0\n";
        }
    }
    for (int c = 0; c < cols; c++) {
        LineTrack track(n_steps);
        for (std::size_t k = 0; k < n_steps; k++)
            track[k] = program.steps[k].col_drive[static_cast<std::size_t>(c)];
        std::string node = "col" + std::to_string(c);
        if (ever_nonzero(track)) {
            emit_pwl(out, "V" + node, node, track, t_start, width);
        } else {
            out << "* " << node << " never driven above 0 V; tied to ground\n";
            out << "V" << node << " " << node << " 0 DC 0\n";
        }
    }

    // Gate (selector) drives: 1 V = closed.
    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            LineTrack track(n_steps);
            bool ever = false;
            for (std::size_t k = 0; k < n_steps; k++) {
                bool on = false;
                for (const CellRef& cr : program.steps[k].select)
                    if (cr.row == r && cr.col == c) on = true;
                track[k] = on ? 1.0 : 0.0;
                ever = ever || on;
            }
            std::string node = "gate" + std::to_string(r) + "c" + std::to_string(c);
            if (ever) {
                emit_pwl(out, "V" + node, node, track, t_start, width);
            } else {
                out << "* cell (" << r << "," << c << ") never selected; gate tied to ground\n";
                out << "V" << node << " " << node << " 0 DC 0\n";
            }
        }
    }

    out << ".tran " << fmt_g(program.dt) << " " << fmt_g(t_total) << "\n";
    out << ".end\n";
    return out.str();
}

SpiceSummary parse_spice_summary(const std::string& deck) {
    SpiceSummary sum;
    std::istringstream in(deck);
    std::string line;
    bool saw_end = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '*') continue;
        if (line.rfind(".end", 0) == 0 && line.rfind(".ends", 0) != 0) {
            saw_end = true;
            continue;
        }
        if (line[0] == 'X') {
            sum.n_instances++;
            continue;
        }
        if (line.rfind(".tran", 0) == 0) {
            std::istringstream ls(line);
            std::string dot;
            if (!(ls >> dot >> sum.tran_step >> sum.tran_stop))
                throw_parse("spice deck: malformed .tran line");
            continue;
        }
        if (line[0] == 'V') {
            sum.n_sources++;
            auto open = line.find("PWL(");
            if (open == std::string::npos) continue; // DC tie
            auto close = line.rfind(')');
            if (close == std::string::npos || close < open)
                throw_parse("spice deck: unterminated PWL list");
            std::istringstream name_in(line);
            std::string name;
            name_in >> name;
            std::istringstream vals(line.substr(open + 4, close - open - 4));
            double tprev = -1.0, tv = 0.0, vv = 0.0;
            int points = 0;
            while (vals >> tv >> vv) {
                if (!(tv > tprev))
                    throw_parse("spice deck: PWL times not strictly increasing in " + name);
                tprev = tv;
                points += 2;
            }
            if (points == 0 || points % 4 != 0)
                throw_parse("spice deck: PWL breakpoint count must be two pairs per step in " +
                            name);
            sum.n_pwl_sources++;
            sum.pwl_points[name] = points / 2; // (time, value) pairs
        }
    }
    if (!saw_end) throw_parse("spice deck: missing .end");
    return sum;
}

} // namespace rxbar
