#include "rxbar/xbar.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <sstream>
#include <string>

#include "rxbar/errors.hpp"

namespace rxbar {

const char* phase_name(Phase p) {
    switch (p) {
        case Phase::init: return "init";
        case Phase::evaluate: return "evaluate";
        case Phase::read: return "read";
        case Phase::reset: return "reset";
    }
    return "?";
}

Step& PulseProgram::add_step(double width, Phase phase, int op_id) {
    Step st;
    st.row_drive.assign(static_cast<std::size_t>(rows), std::nullopt);
    st.col_drive.assign(static_cast<std::size_t>(cols), std::nullopt);
    st.width = width;
    st.phase = phase;
    st.op_id = op_id;
    steps.push_back(std::move(st));
    return steps.back();
}

void PulseProgram::validate() const {
    if (rows <= 0 || cols <= 0) throw_config("program: dimensions must be positive");
    if (!(dt > 0.0)) throw_config("program: dt must be positive");
    for (std::size_t s = 0; s < steps.size(); s++) {
        const Step& st = steps[s];
        std::string where = "program step " + std::to_string(s);
        if (static_cast<int>(st.row_drive.size()) != rows ||
            static_cast<int>(st.col_drive.size()) != cols)
            throw_config(where + ": drive vector sizes do not match the program dimensions");
        if (!(st.width > 0.0)) throw_config(where + ": width must be positive");
        for (const CellRef& cr : st.select) {
            if (cr.row < 0 || cr.row >= rows || cr.col < 0 || cr.col >= cols)
                throw_config(where + ": selected cell out of range");
        }
        for (std::size_t i = 0; i < st.select.size(); i++)
            for (std::size_t j = i + 1; j < st.select.size(); j++)
                if (st.select[i] == st.select[j])
                    throw_config(where + ": cell selected twice");
        if (st.condition) {
            const StepCondition& c = *st.condition;
            if (c.cell.row < 0 || c.cell.row >= rows || c.cell.col < 0 || c.cell.col >= cols)
                throw_config(where + ": condition cell out of range");
            if (!(c.threshold_ohm > 0.0)) throw_config(where + ": condition threshold must be positive");
        }
    }
}

void ExecutionTrace::reset(int rows, int cols) {
    steps_executed = 0;
    steps_skipped = 0;
    total_time = 0.0;
    total_energy = 0.0;
    per_device.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), 0.0);
    per_op.clear();
    per_phase.fill(0.0);
    per_cell_op_phase.clear();
}

EnergyReport energy_report(const ExecutionTrace& trace) {
    EnergyReport rep;
    rep.total = trace.total_energy;
    rep.per_phase = trace.per_phase;
    rep.per_op = trace.per_op;
    rep.per_device = trace.per_device;
    return rep;
}

Crossbar::Crossbar(int rows, int cols, const DeviceParams& nominal, const VariationSpec& var,
                   std::uint64_t seed, double selector_r)
    : rows_(rows), cols_(cols), selector_r_(selector_r), seed_(seed), nominal_(nominal), var_(var) {
    if (rows <= 0 || cols <= 0) throw_config("crossbar: dimensions must be positive");
    if (!(selector_r >= 0.0)) throw_config("crossbar: selector_r must be non-negative");
    nominal.validate();
    var.validate();
    cells_.resize(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols));
    for (std::size_t i = 0; i < cells_.size(); i++) {
        RngStream s = RngStream::derive(seed, "d2d", i);
        cells_[i].params = sample_instance(nominal, var, s);
    }
    trace_.reset(rows, cols);
}

void Crossbar::check_cell(int r, int c) const {
    if (r < 0 || r >= rows_ || c < 0 || c >= cols_)
        throw_runtime("crossbar: cell (" + std::to_string(r) + ", " + std::to_string(c) +
                      ") out of range");
}

RngStream Crossbar::pulse_stream(int r, int c) const {
    check_cell(r, c);
    std::uint64_t lin = idx(r, c);
    std::uint64_t key = (lin << 32) | (cell(r, c).state.cycle_count & 0xffffffffULL);
    return RngStream::derive(seed_, "c2c", key);
}

// ---------------------------------------------------------------------------
// Pulse engine
// ---------------------------------------------------------------------------

namespace {

struct ActiveCell {
    int r = 0, c = 0;
    std::size_t lin = 0;
    const DeviceParams* params = nullptr;
    double x = 0.0;
    EffectivePulse eff{};
    double energy = 0.0;
    double p_prev = 0.0;
    double v_dev = 0.0;   // refreshed by each solve
    double power = 0.0;   // refreshed by each solve
    bool pulse_event = false;
    bool switched = false;
};

} // namespace

static void execute_step(Crossbar& xb, const Step& step, double dt, double selector_r,
                         ExecutionTrace& tr) {
    if (step.condition) {
        const StepCondition& cond = *step.condition;
        double r = xb.cell_resistance(cond.cell.row, cond.cell.col);
        bool fire = cond.fire_if_below ? (r < cond.threshold_ohm) : (r >= cond.threshold_ohm);
        if (!fire) {
            tr.steps_skipped++;
            tr.total_time += step.width; // the slot elapses even when nothing is driven
            return;
        }
    }

    const int rows = xb.rows();
    const int cols = xb.cols();

    std::vector<ActiveCell> act;
    act.reserve(step.select.size());
    for (const CellRef& cr : step.select) {
        bool row_float = !step.row_drive[static_cast<std::size_t>(cr.row)].has_value();
        bool col_float = !step.col_drive[static_cast<std::size_t>(cr.col)].has_value();
        if (row_float && col_float)
            throw_runtime("program: selected cell (" + std::to_string(cr.row) + ", " +
                          std::to_string(cr.col) + ") floats on both sides");
        ActiveCell a;
        a.r = cr.row;
        a.c = cr.col;
        a.lin = static_cast<std::size_t>(cr.row) * static_cast<std::size_t>(cols) + cr.col;
        a.params = &xb.params(cr.row, cr.col);
        a.x = xb.state(cr.row, cr.col).x;
        if (xb.variation().c2c_enabled) {
            RngStream s = xb.pulse_stream(cr.row, cr.col);
            a.eff = make_effective(*a.params, xb.variation(), true, s);
        } else {
            a.eff = EffectivePulse{a.params->v_set_th, a.params->v_reset_th, a.params->k_set,
                                   a.params->k_reset};
        }
        act.push_back(a);
    }

    // Floating-line membership (only lines touched by selected cells matter).
    std::vector<std::vector<int>> float_row_members(static_cast<std::size_t>(rows));
    std::vector<std::vector<int>> float_col_members(static_cast<std::size_t>(cols));
    std::vector<int> float_rows, float_cols;
    for (std::size_t i = 0; i < act.size(); i++) {
        const ActiveCell& a = act[i];
        if (!step.row_drive[static_cast<std::size_t>(a.r)].has_value()) {
            if (float_row_members[static_cast<std::size_t>(a.r)].empty()) float_rows.push_back(a.r);
            float_row_members[static_cast<std::size_t>(a.r)].push_back(static_cast<int>(i));
        }
        if (!step.col_drive[static_cast<std::size_t>(a.c)].has_value()) {
            if (float_col_members[static_cast<std::size_t>(a.c)].empty()) float_cols.push_back(a.c);
            float_col_members[static_cast<std::size_t>(a.c)].push_back(static_cast<int>(i));
        }
    }

    std::vector<double> row_v(static_cast<std::size_t>(rows), 0.0);
    std::vector<double> col_v(static_cast<std::size_t>(cols), 0.0);
    for (int r = 0; r < rows; r++) row_v[static_cast<std::size_t>(r)] = step.row_drive[static_cast<std::size_t>(r)].value_or(0.0);
    for (int c = 0; c < cols; c++) col_v[static_cast<std::size_t>(c)] = step.col_drive[static_cast<std::size_t>(c)].value_or(0.0);

    auto series_g = [&](const ActiveCell& a) {
        double r_dev = resistance({a.x, 0}, *a.params);
        return 1.0 / (r_dev + selector_r);
    };

    // One relaxation of the floating lines.  Because a selected cell may not
    // float on both sides, every floating line connects only to driven lines
    // and the divider solution is exact in a single pass.
    auto solve = [&]() {
        for (int fr : float_rows) {
            double num = 0.0, den = 0.0;
            for (int i : float_row_members[static_cast<std::size_t>(fr)]) {
                double g = series_g(act[static_cast<std::size_t>(i)]);
                num += col_v[static_cast<std::size_t>(act[static_cast<std::size_t>(i)].c)] * g;
                den += g;
            }
            row_v[static_cast<std::size_t>(fr)] = den > 0.0 ? num / den : 0.0;
        }
        for (int fc : float_cols) {
            double num = 0.0, den = 0.0;
            for (int i : float_col_members[static_cast<std::size_t>(fc)]) {
                double g = series_g(act[static_cast<std::size_t>(i)]);
                num += row_v[static_cast<std::size_t>(act[static_cast<std::size_t>(i)].r)] * g;
                den += g;
            }
            col_v[static_cast<std::size_t>(fc)] = den > 0.0 ? num / den : 0.0;
        }
        for (ActiveCell& a : act) {
            double v_series = row_v[static_cast<std::size_t>(a.r)] - col_v[static_cast<std::size_t>(a.c)];
            double r_dev = resistance({a.x, 0}, *a.params);
            double i_cell = v_series / (r_dev + selector_r);
            a.v_dev = i_cell * r_dev;
            a.power = a.v_dev * i_cell;
        }
    };

    solve();
    for (ActiveCell& a : act) {
        a.p_prev = a.power;
        double v_series = row_v[static_cast<std::size_t>(a.r)] - col_v[static_cast<std::size_t>(a.c)];
        a.pulse_event = std::abs(v_series) > 1e-12;
    }

    double t = 0.0;
    while (t < step.width) {
        double h = std::min(dt, step.width - t);
        for (ActiveCell& a : act) {
            double rate = switching_rate(a.v_dev, a.x, a.eff, *a.params);
            if (rate != 0.0) {
                a.x += rate * h;
                if (a.x < 0.0) a.x = 0.0;
                if (a.x > 1.0) a.x = 1.0;
                a.switched = true;
            }
        }
        t += h;
        solve();
        for (ActiveCell& a : act) {
            a.energy += 0.5 * (a.p_prev + a.power) * h;
            a.p_prev = a.power;
        }
    }

    int ph = static_cast<int>(step.phase);
    for (const ActiveCell& a : act) {
        DeviceState& st = xb.state(a.r, a.c);
        st.x = a.x;
        if (a.pulse_event) st.cycle_count++;
        tr.per_device[a.lin] += a.energy;
        tr.per_op[step.op_id] += a.energy;
        tr.per_phase[static_cast<std::size_t>(ph)] += a.energy;
        tr.per_cell_op_phase[{a.r, a.c, step.op_id, ph}] += a.energy;
        tr.total_energy += a.energy;
    }
    tr.steps_executed++;
    tr.total_time += step.width;
}

void run_program(Crossbar& xbar, const PulseProgram& program) {
    program.validate();
    if (program.rows != xbar.rows_ || program.cols != xbar.cols_)
        throw_runtime("program: dimensions " + std::to_string(program.rows) + "x" +
                      std::to_string(program.cols) + " do not match the " +
                      std::to_string(xbar.rows_) + "x" + std::to_string(xbar.cols_) + " array");
    for (const Step& st : program.steps)
        execute_step(xbar, st, program.dt, xbar.selector_r_, xbar.trace_);
}

// ---------------------------------------------------------------------------
// Single-cell access
// ---------------------------------------------------------------------------

void write_bit(Crossbar& xbar, int r, int c, bool bit, Phase phase, int op_id,
               const AccessSpec& spec) {
    xbar.check_cell(r, c);
    PulseProgram prog;
    prog.rows = xbar.rows();
    prog.cols = xbar.cols();
    prog.dt = spec.dt;
    Step& st = prog.add_step(bit ? spec.set_w : spec.reset_w, phase, op_id);
    st.row_drive[static_cast<std::size_t>(r)] = bit ? spec.set_v : spec.reset_v;
    st.col_drive[static_cast<std::size_t>(c)] = 0.0;
    st.select.push_back({r, c});
    run_program(xbar, prog);
}

bool read_bit(Crossbar& xbar, int r, int c, Phase phase, int op_id, const AccessSpec& spec) {
    xbar.check_cell(r, c);
    PulseProgram prog;
    prog.rows = xbar.rows();
    prog.cols = xbar.cols();
    prog.dt = spec.dt;
    Step& st = prog.add_step(spec.read_w, phase, op_id);
    st.row_drive[static_cast<std::size_t>(r)] = spec.read_v;
    st.col_drive[static_cast<std::size_t>(c)] = 0.0;
    st.select.push_back({r, c});
    run_program(xbar, prog);
    const DeviceParams& p = xbar.params(r, c);
    return xbar.cell_resistance(r, c) < std::sqrt(p.r_on * p.r_off);
}

namespace {

// Copy one bit between two cells sharing a row or a column: clear dst, let
// the shared floating line divide src's drive onto dst, then snap dst to the
// full rail with a sensed conditional SET.
void clone_leg(Crossbar& xbar, CellRef src, CellRef dst, Phase phase, int op_id,
               const AccessSpec& spec) {
    const double copy_v = 1.8;
    const double copy_w = 5e-6;
    PulseProgram prog;
    prog.rows = xbar.rows();
    prog.cols = xbar.cols();
    prog.dt = spec.dt;

    Step& clr = prog.add_step(spec.reset_w, phase, op_id);
    clr.row_drive[static_cast<std::size_t>(dst.row)] = spec.reset_v;
    clr.col_drive[static_cast<std::size_t>(dst.col)] = 0.0;
    clr.select.push_back(dst);

    Step& div = prog.add_step(copy_w, phase, op_id);
    if (src.col == dst.col) {
        div.row_drive[static_cast<std::size_t>(src.row)] = -copy_v;
        div.row_drive[static_cast<std::size_t>(dst.row)] = 0.0;
        // shared column floats
    } else {
        div.col_drive[static_cast<std::size_t>(src.col)] = copy_v;
        div.col_drive[static_cast<std::size_t>(dst.col)] = 0.0;
        // shared row floats
    }
    div.select.push_back(src);
    div.select.push_back(dst);

    Step& sense = prog.add_step(spec.read_w, phase, op_id);
    sense.row_drive[static_cast<std::size_t>(dst.row)] = spec.read_v;
    sense.col_drive[static_cast<std::size_t>(dst.col)] = 0.0;
    sense.select.push_back(dst);

    const DeviceParams& dp = xbar.params(dst.row, dst.col);
    Step& fix = prog.add_step(spec.set_w, phase, op_id);
    fix.row_drive[static_cast<std::size_t>(dst.row)] = spec.set_v;
    fix.col_drive[static_cast<std::size_t>(dst.col)] = 0.0;
    fix.select.push_back(dst);
    fix.condition = StepCondition{dst, true, std::sqrt(dp.r_on * dp.r_off)};

    run_program(xbar, prog);
}

} // namespace

void clone_cell(Crossbar& xbar, CellRef src, CellRef dst, Phase phase, int op_id,
                const AccessSpec& spec) {
    xbar.check_cell(src.row, src.col);
    xbar.check_cell(dst.row, dst.col);
    if (src == dst) throw_runtime("clone: source and destination are the same cell");
    if (src.row == dst.row || src.col == dst.col) {
        clone_leg(xbar, src, dst, phase, op_id, spec);
        return;
    }
    CellRef corner{src.row, dst.col};
    clone_leg(xbar, src, corner, phase, op_id, spec);
    clone_leg(xbar, corner, dst, phase, op_id, spec);
}

// ---------------------------------------------------------------------------
// Multi-level access
// ---------------------------------------------------------------------------

namespace {

// Trapezoid energy of a device-path pulse, folded into the trace.
void fold_samples(ExecutionTrace& tr, std::size_t lin, int r, int c, int op_id, Phase phase,
                  const std::vector<PulseSample>& samples, double width) {
    double e = 0.0;
    for (std::size_t i = 0; i + 1 < samples.size(); i++) {
        double p0 = samples[i].v * samples[i].i;
        double p1 = samples[i + 1].v * samples[i + 1].i;
        e += 0.5 * (p0 + p1) * (samples[i + 1].t - samples[i].t);
    }
    int ph = static_cast<int>(phase);
    tr.per_device[lin] += e;
    tr.per_op[op_id] += e;
    tr.per_phase[static_cast<std::size_t>(ph)] += e;
    tr.per_cell_op_phase[{r, c, op_id, ph}] += e;
    tr.total_energy += e;
    tr.steps_executed++;
    tr.total_time += width;
}

} // namespace

void program_cell_level(Crossbar& xbar, int r, int c, const LevelConfig& cfg, int level,
                        Phase phase, int op_id) {
    xbar.check_cell(r, c);
    if (level < 0 || level >= cfg.n_levels)
        throw_runtime("levels: level " + std::to_string(level) + " out of range");
    const DeviceParams& p = xbar.params(r, c);
    std::size_t lin = static_cast<std::size_t>(r) * static_cast<std::size_t>(xbar.cols()) + c;
    // The per-cell write driver compensates the selector drop, so pulses land
    // directly across the device.  Jitter draws anchor at the entry cycle.
    RngStream rng = xbar.pulse_stream(r, c);
    bool c2c = xbar.variation().c2c_enabled;
    PulseResult res = apply_pulse(xbar.state(r, c), p, {cfg.set_amplitude, cfg.set_width, cfg.dt},
                                  xbar.variation(), c2c, rng);
    fold_samples(xbar.trace(), lin, r, c, op_id, phase, res.samples, cfg.set_width);
    xbar.state(r, c) = res.state;
    if (level > 0) {
        res = apply_pulse(xbar.state(r, c), p,
                          {cfg.reset_amplitudes[static_cast<std::size_t>(level - 1)],
                           cfg.reset_width, cfg.dt},
                          xbar.variation(), c2c, rng);
        fold_samples(xbar.trace(), lin, r, c, op_id, phase, res.samples, cfg.reset_width);
        xbar.state(r, c) = res.state;
    }
}

int read_cell_level(Crossbar& xbar, int r, int c, const LevelConfig& cfg, Phase phase, int op_id) {
    xbar.check_cell(r, c);
    AccessSpec spec;
    spec.dt = cfg.dt;
    PulseProgram prog;
    prog.rows = xbar.rows();
    prog.cols = xbar.cols();
    prog.dt = spec.dt;
    Step& st = prog.add_step(spec.read_w, phase, op_id);
    st.row_drive[static_cast<std::size_t>(r)] = spec.read_v;
    st.col_drive[static_cast<std::size_t>(c)] = 0.0;
    st.select.push_back({r, c});
    run_program(xbar, prog);
    return read_level(xbar.state(r, c), xbar.params(r, c), cfg);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

namespace {

std::string fmt_g(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

std::string serialize(const Crossbar& xbar) {
    std::ostringstream out;
    out << "rxbar-crossbar v1\n";
    out << "dims " << xbar.rows_ << " " << xbar.cols_ << "\n";
    out << "seed " << xbar.seed_ << "\n";
    out << "selector " << fmt_g(xbar.selector_r_) << "\n";
    const DeviceParams& n = xbar.nominal_;
    out << "nominal " << fmt_g(n.r_on) << " " << fmt_g(n.r_off) << " " << fmt_g(n.v_set_th) << " "
        << fmt_g(n.v_reset_th) << " " << fmt_g(n.k_set) << " " << fmt_g(n.k_reset) << " "
        << fmt_g(n.alpha_set) << " " << fmt_g(n.alpha_reset) << " " << fmt_g(n.reset_rate_floor)
        << "\n";
    const VariationSpec& v = xbar.var_;
    out << "variation " << (v.d2d_enabled ? 1 : 0) << " " << (v.c2c_enabled ? 1 : 0) << " "
        << fmt_g(v.d2d_sigma_r) << " " << fmt_g(v.d2d_sigma_th) << " " << fmt_g(v.c2c_sigma_th)
        << " " << fmt_g(v.c2c_sigma_rate) << "\n";
    for (int r = 0; r < xbar.rows_; r++) {
        for (int c = 0; c < xbar.cols_; c++) {
            const auto& cell = xbar.cells_[xbar.idx(r, c)];
            const DeviceParams& p = cell.params;
            out << "cell " << r << " " << c << " " << fmt_g(cell.state.x) << " "
                << cell.state.cycle_count << " " << fmt_g(p.r_on) << " " << fmt_g(p.r_off) << " "
                << fmt_g(p.v_set_th) << " " << fmt_g(p.v_reset_th) << " " << fmt_g(p.k_set) << " "
                << fmt_g(p.k_reset) << " " << fmt_g(p.alpha_set) << " " << fmt_g(p.alpha_reset)
                << " " << fmt_g(p.reset_rate_floor) << "\n";
        }
    }
    out << "end\n";
    return out.str();
}

Crossbar deserialize(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    auto next_line = [&](const char* what) {
        if (!std::getline(in, line)) throw_parse(std::string("serialized state: missing ") + what);
        return line;
    };
    if (next_line("header") != "rxbar-crossbar v1")
        throw_parse("serialized state: unrecognized header");

    int rows = 0, cols = 0;
    std::uint64_t seed = 0;
    double selector = 0.0;
    {
        std::istringstream ls(next_line("dims"));
        std::string tag;
        if (!(ls >> tag >> rows >> cols) || tag != "dims")
            throw_parse("serialized state: bad dims line");
    }
    {
        std::istringstream ls(next_line("seed"));
        std::string tag;
        if (!(ls >> tag >> seed) || tag != "seed") throw_parse("serialized state: bad seed line");
    }
    {
        std::istringstream ls(next_line("selector"));
        std::string tag;
        if (!(ls >> tag >> selector) || tag != "selector")
            throw_parse("serialized state: bad selector line");
    }
    DeviceParams nominal;
    {
        std::istringstream ls(next_line("nominal"));
        std::string tag;
        if (!(ls >> tag >> nominal.r_on >> nominal.r_off >> nominal.v_set_th >>
              nominal.v_reset_th >> nominal.k_set >> nominal.k_reset >> nominal.alpha_set >>
              nominal.alpha_reset >> nominal.reset_rate_floor) ||
            tag != "nominal")
            throw_parse("serialized state: bad nominal line");
    }
    VariationSpec var;
    {
        std::istringstream ls(next_line("variation"));
        std::string tag;
        int d2d = 0, c2c = 0;
        if (!(ls >> tag >> d2d >> c2c >> var.d2d_sigma_r >> var.d2d_sigma_th >> var.c2c_sigma_th >>
              var.c2c_sigma_rate) ||
            tag != "variation")
            throw_parse("serialized state: bad variation line");
        var.d2d_enabled = d2d != 0;
        var.c2c_enabled = c2c != 0;
    }

    // Build with d2d sampling suppressed (every cell is overwritten below).
    VariationSpec quiet = var;
    quiet.d2d_enabled = false;
    Crossbar xb(rows, cols, nominal, quiet, seed, selector);
    xb.var_ = var;

    for (int r = 0; r < rows; r++) {
        for (int c = 0; c < cols; c++) {
            std::istringstream ls(next_line("cell"));
            std::string tag;
            int rr = 0, cc = 0;
            auto& cell = xb.cells_[xb.idx(r, c)];
            DeviceParams& p = cell.params;
            if (!(ls >> tag >> rr >> cc >> cell.state.x >> cell.state.cycle_count >> p.r_on >>
                  p.r_off >> p.v_set_th >> p.v_reset_th >> p.k_set >> p.k_reset >> p.alpha_set >>
                  p.alpha_reset >> p.reset_rate_floor) ||
                tag != "cell" || rr != r || cc != c)
                throw_parse("serialized state: bad cell line for (" + std::to_string(r) + ", " +
                            std::to_string(c) + ")");
        }
    }
    if (next_line("trailer") != "end") throw_parse("serialized state: missing end marker");
    return xb;
}

} // namespace rxbar
