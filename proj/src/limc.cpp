#include "rxbar/limc.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "rxbar/errors.hpp"

namespace rxbar {

// ---------------------------------------------------------------------------
// Technology mapping
// ---------------------------------------------------------------------------

namespace {

struct Mapper {
    const LogicNetlist& net;
    GateGraph g;
    std::map<std::string, int> id_of;
    std::map<int, int> not_cache; // signal -> its complement (both directions)
    int tmp_counter = 0;

    explicit Mapper(const LogicNetlist& n) : net(n) {}

    int intern(const std::string& name) {
        auto it = id_of.find(name);
        if (it != id_of.end()) return it->second;
        int id = static_cast<int>(g.signal_names.size());
        g.signal_names.push_back(name);
        id_of.emplace(name, id);
        return id;
    }

    int fresh() { return intern("$t" + std::to_string(tmp_counter++)); }

    int emit_not(int a) {
        if (auto it = not_cache.find(a); it != not_cache.end()) return it->second;
        int y = fresh();
        g.gates.push_back({GateKind::NOT, a, -1, y});
        not_cache[a] = y;
        not_cache[y] = a;
        return y;
    }

    int emit_or(int a, int b) {
        int y = fresh();
        g.gates.push_back({GateKind::OR2, a, b, y});
        return y;
    }

    int emit_and(int a, int b) { return emit_not(emit_or(emit_not(a), emit_not(b))); }

    // Route the value of `produced` into the named signal `out`.  If the
    // last emitted gate created `produced` as a temp, retarget it in place;
    // otherwise emit a COPY.
    void finalize_into(int produced, int out) {
        if (!g.gates.empty() && g.gates.back().out == produced &&
            produced == static_cast<int>(g.signal_names.size()) - 1 && out < produced) {
            g.gates.back().out = out;
            for (auto& [k, v] : not_cache)
                if (v == produced) v = out;
            if (auto it = not_cache.find(produced); it != not_cache.end()) {
                not_cache[out] = it->second;
                not_cache.erase(it);
            }
            id_of.erase(g.signal_names.back());
            g.signal_names.pop_back();
            tmp_counter--;
            return;
        }
        g.gates.push_back({GateKind::COPY, produced, -1, out});
    }

    void map_node(const LogicNode& node) {
        if (node.inputs.size() > 16)
            throw_runtime("tech map: node '" + node.output + "' has fan-in " +
                          std::to_string(node.inputs.size()) + "; at most 16 is supported");
        int out = intern(node.output);
        std::vector<int> in_ids;
        in_ids.reserve(node.inputs.size());
        for (const std::string& s : node.inputs) in_ids.push_back(intern(s));

        std::vector<int> terms;
        for (const std::string& pat : node.covers) {
            int term = -1;
            for (std::size_t i = 0; i < pat.size(); i++) {
                if (pat[i] == '-') continue;
                int lit = pat[i] == '1' ? in_ids[i] : emit_not(in_ids[i]);
                term = (term < 0) ? lit : emit_and(term, lit);
            }
            terms.push_back(term);
        }
        int acc = terms[0];
        for (std::size_t i = 1; i < terms.size(); i++) acc = emit_or(acc, terms[i]);
        finalize_into(acc, out);
    }
};

} // namespace

std::vector<bool> gate_sim(const GateGraph& graph, const std::vector<bool>& input_values) {
    if (input_values.size() != graph.inputs.size())
        throw_runtime("gate_sim: expected " + std::to_string(graph.inputs.size()) +
                      " input values, got " + std::to_string(input_values.size()));
    std::vector<char> val(graph.signal_names.size(), 0);
    for (std::size_t i = 0; i < graph.inputs.size(); i++)
        val[static_cast<std::size_t>(graph.inputs[i])] = input_values[i] ? 1 : 0;
    for (const Gate& gate : graph.gates) {
        bool a = val[static_cast<std::size_t>(gate.a)] != 0;
        bool r = false;
        switch (gate.kind) {
            case GateKind::OR2: r = a || (val[static_cast<std::size_t>(gate.b)] != 0); break;
            case GateKind::NOT: r = !a; break;
            case GateKind::COPY: r = a; break;
        }
        val[static_cast<std::size_t>(gate.out)] = r ? 1 : 0;
    }
    std::vector<bool> out;
    out.reserve(graph.outputs.size());
    for (int sig : graph.outputs) out.push_back(val[static_cast<std::size_t>(sig)] != 0);
    return out;
}

GateGraph tech_map(const LogicNetlist& net) {
    Mapper m(net);
    for (const std::string& in : net.inputs) m.g.inputs.push_back(m.intern(in));
    for (const LogicNode& node : net.nodes) m.map_node(node);
    for (const std::string& out : net.outputs) m.g.outputs.push_back(m.intern(out));

    // Exhaustive equivalence check against the reference evaluator while the
    // input space is small enough to enumerate.
    if (net.inputs.size() <= 10) {
        std::size_t n = net.inputs.size();
        for (std::size_t v = 0; v < (std::size_t{1} << n); v++) {
            std::vector<bool> bits(n);
            for (std::size_t i = 0; i < n; i++) bits[i] = (v >> i) & 1;
            if (gate_sim(m.g, bits) != logical_sim(net, bits))
                throw_runtime("tech map: internal error, mapped graph disagrees with the "
                              "reference evaluation");
        }
    }
    return m.g;
}

// ---------------------------------------------------------------------------
// Scheduling
// ---------------------------------------------------------------------------

namespace {

struct Builder {
    const GateGraph& g;
    GateRecipes r;
    int rows, cols;
    bool staging;
    int cstar; // staging column (staging mode only)

    PulseProgram prog;
    std::vector<CellRef> home;
    std::vector<std::pair<std::size_t, int>> load_steps;
    std::set<std::pair<int, int>> touched;
    std::vector<char> written;
    bool used_behavioral = false;

    std::size_t n_load = 0, n_eval = 0, n_read = 0;

    Builder(const GateGraph& graph, const GateRecipes& rec, int nr, int nc)
        : g(graph), r(rec), rows(nr), cols(nc) {
        staging = rows >= 3 && cols >= 2;
        cstar = cols - 1;
        prog.rows = rows;
        prog.cols = cols;
        prog.dt = r.dt;
        written.assign(g.signal_names.size(), 0);
    }

    Step& add(double w, Phase ph, int op) { return prog.add_step(w, ph, op); }

    void sel(Step& st, CellRef c) {
        st.select.push_back(c);
        touched.insert({c.row, c.col});
    }

    void emit_write(CellRef c, bool bit, Phase ph, int op) {
        Step& st = add(r.write_w, ph, op);
        st.row_drive[static_cast<std::size_t>(c.row)] = bit ? r.set_v : r.reset_v;
        st.col_drive[static_cast<std::size_t>(c.col)] = 0.0;
        sel(st, c);
    }

    void emit_sense(CellRef c, Phase ph, int op) {
        Step& st = add(r.sense_w, ph, op);
        st.row_drive[static_cast<std::size_t>(c.row)] = r.sense_v;
        st.col_drive[static_cast<std::size_t>(c.col)] = 0.0;
        sel(st, c);
    }

    // Write `bit` into `target` only if `watch` is low-ohmic (R below the
    // sense threshold).  The sense amp behind the conditional is behavioral;
    // the preceding emit_sense supplies its read energy.
    void emit_cond_write(CellRef target, CellRef watch, bool bit, Phase ph, int op) {
        Step& st = add(r.write_w, ph, op);
        st.row_drive[static_cast<std::size_t>(target.row)] = bit ? r.set_v : r.reset_v;
        st.col_drive[static_cast<std::size_t>(target.col)] = 0.0;
        sel(st, target);
        st.condition = StepCondition{watch, true, r.sense_threshold};
    }

    // Divider copy along a shared line, then restore the destination to the
    // full rail.  src and dst must share a row or a column.
    void emit_copy(CellRef src, CellRef dst, Phase ph, int op) {
        if (src.row != dst.row && src.col != dst.col)
            throw_runtime("schedule: internal error, copy endpoints share no line");
        emit_write(dst, false, ph, op);
        Step& div = add(r.copy_w, ph, op);
        if (src.col == dst.col) {
            div.row_drive[static_cast<std::size_t>(src.row)] = -r.copy_v;
            div.row_drive[static_cast<std::size_t>(dst.row)] = 0.0;
        } else {
            div.col_drive[static_cast<std::size_t>(src.col)] = r.copy_v;
            div.col_drive[static_cast<std::size_t>(dst.col)] = 0.0;
        }
        sel(div, src);
        sel(div, dst);
        emit_sense(dst, ph, op);
        emit_cond_write(dst, dst, true, ph, op);
    }

    void require_written(int sig) const {
        if (!written[static_cast<std::size_t>(sig)])
            throw_runtime("schedule: internal error, signal '" +
                          g.signal_names[static_cast<std::size_t>(sig)] + "' used before defined");
    }

    // --- staging-mode gates ---------------------------------------------

    int pick_row(std::initializer_list<int> avoid) const {
        for (int row = 0; row < rows; row++)
            if (std::find(avoid.begin(), avoid.end(), row) == avoid.end()) return row;
        throw_runtime("schedule: internal error, no free staging row");
    }

    void gate_or2(const Gate& gate, int op) {
        require_written(gate.a);
        require_written(gate.b);
        int ra = home[static_cast<std::size_t>(gate.a)].row;
        emit_copy(home[static_cast<std::size_t>(gate.a)], {ra, cstar}, Phase::evaluate, op);
        int rb = home[static_cast<std::size_t>(gate.b)].row;
        if (rb == ra) {
            // The entry slot is occupied by operand a; shuffle a out of the way.
            int ra2 = pick_row({ra});
            emit_copy({ra, cstar}, {ra2, cstar}, Phase::evaluate, op);
            ra = ra2;
        }
        emit_copy(home[static_cast<std::size_t>(gate.b)], {rb, cstar}, Phase::evaluate, op);
        int ry = pick_row({ra, rb});
        emit_write({ry, cstar}, false, Phase::evaluate, op);

        Step& st = add(r.or_w, Phase::evaluate, op);
        st.row_drive[static_cast<std::size_t>(ra)] = -r.or_v;
        st.row_drive[static_cast<std::size_t>(rb)] = -r.or_v;
        st.row_drive[static_cast<std::size_t>(ry)] = 0.0;
        sel(st, {ra, cstar});
        sel(st, {rb, cstar});
        sel(st, {ry, cstar});
        emit_sense({ry, cstar}, Phase::evaluate, op);
        emit_cond_write({ry, cstar}, {ry, cstar}, true, Phase::evaluate, op);

        deliver(ry, gate.out, op);
    }

    void gate_not(const Gate& gate, int op) {
        require_written(gate.a);
        int ri = home[static_cast<std::size_t>(gate.a)].row;
        emit_copy(home[static_cast<std::size_t>(gate.a)], {ri, cstar}, Phase::evaluate, op);
        int ry = pick_row({ri});
        int rk = pick_row({ri, ry});
        emit_write({ry, cstar}, true, Phase::evaluate, op); // output starts low-ohmic
        emit_write({rk, cstar}, true, Phase::evaluate, op); // keeper is always low-ohmic

        Step& st = add(r.not_w, Phase::evaluate, op);
        st.row_drive[static_cast<std::size_t>(ri)] = r.not_v_in;
        st.row_drive[static_cast<std::size_t>(ry)] = r.not_v_out;
        st.row_drive[static_cast<std::size_t>(rk)] = r.not_v_keep;
        sel(st, {ri, cstar});
        sel(st, {ry, cstar});
        sel(st, {rk, cstar});
        // The NOT lands on full rails by itself (deep RESET or untouched SET);
        // no restore needed.
        deliver(ry, gate.out, op);
    }

    void gate_copy(const Gate& gate, int op) {
        require_written(gate.a);
        CellRef src = home[static_cast<std::size_t>(gate.a)];
        CellRef dst = home[static_cast<std::size_t>(gate.out)];
        if (src.row == dst.row || src.col == dst.col) {
            emit_copy(src, dst, Phase::evaluate, op);
            return;
        }
        int ra = src.row;
        emit_copy(src, {ra, cstar}, Phase::evaluate, op);
        if (dst.row != ra) {
            emit_copy({ra, cstar}, {dst.row, cstar}, Phase::evaluate, op);
            ra = dst.row;
        }
        emit_copy({ra, cstar}, dst, Phase::evaluate, op);
    }

    // Move the result from its staging slot to the signal's home cell.
    void deliver(int ry, int out_sig, int op) {
        CellRef dst = home[static_cast<std::size_t>(out_sig)];
        if (ry != dst.row) {
            // Stale operand copies in the target slot are cleared by the
            // copy's own leading RESET.
            emit_copy({ry, cstar}, {dst.row, cstar}, Phase::evaluate, op);
            ry = dst.row;
        }
        emit_copy({ry, cstar}, dst, Phase::evaluate, op);
        written[static_cast<std::size_t>(out_sig)] = 1;
    }

    // --- behavioral fallback gates (tiny arrays) --------------------------

    void gate_or2_behavioral(const Gate& gate, int op) {
        require_written(gate.a);
        require_written(gate.b);
        CellRef y = home[static_cast<std::size_t>(gate.out)];
        emit_write(y, false, Phase::evaluate, op);
        emit_sense(home[static_cast<std::size_t>(gate.a)], Phase::evaluate, op);
        emit_cond_write(y, home[static_cast<std::size_t>(gate.a)], true, Phase::evaluate, op);
        emit_sense(home[static_cast<std::size_t>(gate.b)], Phase::evaluate, op);
        emit_cond_write(y, home[static_cast<std::size_t>(gate.b)], true, Phase::evaluate, op);
        written[static_cast<std::size_t>(gate.out)] = 1;
        used_behavioral = true;
    }

    void gate_not_behavioral(const Gate& gate, int op) {
        require_written(gate.a);
        CellRef y = home[static_cast<std::size_t>(gate.out)];
        emit_write(y, true, Phase::evaluate, op);
        emit_sense(home[static_cast<std::size_t>(gate.a)], Phase::evaluate, op);
        emit_cond_write(y, home[static_cast<std::size_t>(gate.a)], false, Phase::evaluate, op);
        written[static_cast<std::size_t>(gate.out)] = 1;
        used_behavioral = true;
    }

    void gate_copy_behavioral(const Gate& gate, int op) {
        require_written(gate.a);
        CellRef y = home[static_cast<std::size_t>(gate.out)];
        emit_write(y, false, Phase::evaluate, op);
        emit_sense(home[static_cast<std::size_t>(gate.a)], Phase::evaluate, op);
        emit_cond_write(y, home[static_cast<std::size_t>(gate.a)], true, Phase::evaluate, op);
        written[static_cast<std::size_t>(gate.out)] = 1;
        used_behavioral = true;
    }
};

} // namespace

LimSchedule build_schedule(const GateGraph& graph, int rows, int cols,
                           const GateRecipes& recipes) {
    if (rows <= 0 || cols <= 0) throw_config("schedule: array dimensions must be positive");

    Builder b(graph, recipes, rows, cols);

    // Placement: first-fit row-major in signal-id order.  Staging mode keeps
    // the rightmost column free for gate evaluation.
    int home_cols = b.staging ? cols - 1 : cols;
    std::size_t capacity = static_cast<std::size_t>(rows) * static_cast<std::size_t>(home_cols);
    std::size_t need = graph.signal_names.size();
    if (need > capacity) {
        std::string msg = "placement capacity exceeded: " + std::to_string(need) +
                          " signals need " + std::to_string(need) + " cells, " +
                          std::to_string(rows) + "x" + std::to_string(home_cols) + " = " +
                          std::to_string(capacity) + " available";
        if (b.staging) msg += " (rightmost column reserved for staging)";
        throw_capacity(msg);
    }
    b.home.resize(need);
    for (std::size_t s = 0; s < need; s++)
        b.home[s] = {static_cast<int>(s) / home_cols, static_cast<int>(s) % home_cols};

    LimSchedule sched;
    sched.rows = rows;
    sched.cols = cols;
    sched.graph = graph;
    sched.recipes = recipes;
    sched.read_op = 1 + static_cast<int>(graph.inputs.size() + graph.gates.size());

    // Load segment: one write per primary input, default value 0 (patched per
    // vector by execute_schedule).
    for (std::size_t i = 0; i < graph.inputs.size(); i++) {
        int sig = graph.inputs[i];
        b.load_steps.emplace_back(b.prog.steps.size(), sig);
        b.emit_write(b.home[static_cast<std::size_t>(sig)], false, Phase::init,
                     sched.load_op(i));
        b.written[static_cast<std::size_t>(sig)] = 1;
        b.n_load += 1;
    }

    // Evaluate segment.
    std::size_t eval_begin = b.prog.steps.size();
    for (std::size_t gi = 0; gi < graph.gates.size(); gi++) {
        const Gate& gate = graph.gates[gi];
        int op = sched.gate_op(gi);
        if (b.staging) {
            switch (gate.kind) {
                case GateKind::OR2: b.gate_or2(gate, op); break;
                case GateKind::NOT: b.gate_not(gate, op); break;
                case GateKind::COPY: b.gate_copy(gate, op); break;
            }
            b.written[static_cast<std::size_t>(gate.out)] = 1;
        } else {
            switch (gate.kind) {
                case GateKind::OR2: b.gate_or2_behavioral(gate, op); break;
                case GateKind::NOT: b.gate_not_behavioral(gate, op); break;
                case GateKind::COPY: b.gate_copy_behavioral(gate, op); break;
            }
        }
    }
    b.n_eval = b.prog.steps.size() - eval_begin;

    // Read segment: sense every output home.
    std::size_t read_begin = b.prog.steps.size();
    for (int sig : graph.outputs) {
        b.require_written(sig);
        b.emit_sense(b.home[static_cast<std::size_t>(sig)], Phase::read, sched.read_op);
    }
    b.n_read = b.prog.steps.size() - read_begin;

    // Init segment, prepended: form every touched cell (SET + full RESET) so
    // the logic starts from one uniform high-resistance state.
    PulseProgram final_prog;
    final_prog.rows = rows;
    final_prog.cols = cols;
    final_prog.dt = recipes.dt;
    for (const auto& [row, col] : b.touched) {
        Step& set = final_prog.add_step(recipes.write_w, Phase::init, 0);
        set.row_drive[static_cast<std::size_t>(row)] = recipes.set_v;
        set.col_drive[static_cast<std::size_t>(col)] = 0.0;
        set.select.push_back({row, col});
        Step& rst = final_prog.add_step(recipes.write_w, Phase::init, 0);
        rst.row_drive[static_cast<std::size_t>(row)] = recipes.reset_v;
        rst.col_drive[static_cast<std::size_t>(col)] = 0.0;
        rst.select.push_back({row, col});
    }
    std::size_t n_init = final_prog.steps.size();
    for (Step& st : b.prog.steps) final_prog.steps.push_back(std::move(st));

    sched.home = std::move(b.home);
    sched.program = std::move(final_prog);
    sched.behavioral_fallback = b.used_behavioral;
    for (auto& [idx, sig] : b.load_steps) sched.load_steps.emplace_back(idx + n_init, sig);

    std::size_t at = 0;
    auto push_seg = [&](const char* label, std::size_t n) {
        if (n > 0) sched.segments.push_back({label, at, n});
        at += n;
    };
    push_seg("init", n_init);
    push_seg("load", b.n_load);
    push_seg("evaluate", b.n_eval);
    push_seg("read", b.n_read);

    sched.program.validate();
    return sched;
}

std::vector<bool> execute_schedule(Crossbar& xbar, LimSchedule& schedule,
                                   const std::vector<bool>& input_values) {
    if (xbar.rows() != schedule.rows || xbar.cols() != schedule.cols)
        throw_runtime("schedule: array is " + std::to_string(xbar.rows()) + "x" +
                      std::to_string(xbar.cols()) + " but the schedule wants " +
                      std::to_string(schedule.rows) + "x" + std::to_string(schedule.cols));
    if (input_values.size() != schedule.graph.inputs.size())
        throw_runtime("schedule: expected " + std::to_string(schedule.graph.inputs.size()) +
                      " input values, got " + std::to_string(input_values.size()));

    std::map<int, bool> value_of;
    for (std::size_t i = 0; i < schedule.graph.inputs.size(); i++)
        value_of[schedule.graph.inputs[i]] = input_values[i];
    for (const auto& [idx, sig] : schedule.load_steps) {
        Step& st = schedule.program.steps[idx];
        CellRef cell = schedule.home[static_cast<std::size_t>(sig)];
        st.row_drive[static_cast<std::size_t>(cell.row)] =
            value_of.at(sig) ? schedule.recipes.set_v : schedule.recipes.reset_v;
    }

    run_program(xbar, schedule.program);

    std::vector<bool> out;
    out.reserve(schedule.graph.outputs.size());
    for (int sig : schedule.graph.outputs) {
        CellRef cell = schedule.home[static_cast<std::size_t>(sig)];
        out.push_back(xbar.cell_resistance(cell.row, cell.col) < schedule.recipes.sense_threshold);
    }
    return out;
}

} // namespace rxbar
