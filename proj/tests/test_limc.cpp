#include <doctest.h>

#include <string>
#include <vector>

#include "rxbar/blif.hpp"
#include "rxbar/errors.hpp"
#include "rxbar/limc.hpp"
#include "rxbar/spice.hpp"

using namespace rxbar;

namespace {

const char* kFullAdder = R"(
# one-bit full adder
.model fa
.inputs a b cin
.outputs sum cout
.names a b cin sum
100 1
010 1
001 1
111 1
.names a b cin cout
11- 1
1-1 1
-11 1
.end
)";

VariationSpec nominal_corner() {
    VariationSpec v;
    v.d2d_enabled = false;
    v.c2c_enabled = false;
    return v;
}

// Run every input vector through the array and compare with logical_sim.
void check_exhaustive(const std::string& blif, int rows, int cols) {
    LogicNetlist net = parse_netlist(blif);
    GateGraph graph = tech_map(net);
    LimSchedule sched = build_schedule(graph, rows, cols);
    std::size_t n = net.inputs.size();
    for (std::size_t v = 0; v < (std::size_t{1} << n); v++) {
        std::vector<bool> bits(n);
        for (std::size_t i = 0; i < n; i++) bits[i] = (v >> i) & 1;
        Crossbar xb(rows, cols, DeviceParams{}, nominal_corner(), 7);
        auto got = execute_schedule(xb, sched, bits);
        auto want = logical_sim(net, bits);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); i++) {
            INFO("vector ", v, " output ", i);
            CHECK(got[i] == want[i]);
        }
    }
}

} // namespace

// ---------------------------------------------------------------------------
// Netlist parsing
// ---------------------------------------------------------------------------

TEST_CASE("blif: full adder parses and simulates") {
    LogicNetlist net = parse_netlist(kFullAdder);
    CHECK(net.model == "fa");
    REQUIRE(net.inputs.size() == 3);
    REQUIRE(net.outputs.size() == 2);
    REQUIRE(net.nodes.size() == 2);
    for (int v = 0; v < 8; v++) {
        bool a = v & 1, b = v & 2, cin = v & 4;
        auto out = logical_sim(net, {a, b, cin});
        int total = int(a) + int(b) + int(cin);
        CHECK(out[0] == (total % 2 == 1));
        CHECK(out[1] == (total >= 2));
    }
}

TEST_CASE("blif: backslash continuation and comments") {
    auto net = parse_netlist(".inputs a \\\n b\n.outputs y # trailing\n.names a b y\n11 1\n");
    CHECK(net.inputs.size() == 2);
    CHECK(logical_sim(net, {true, true})[0]);
    CHECK(!logical_sim(net, {true, false})[0]);
}

TEST_CASE("blif: errors carry line numbers and reasons") {
    CHECK_THROWS_WITH_AS(parse_netlist(".inputs a\n.outputs y\n.names a y\n2 1\n"),
                         doctest::Contains("line 4"), Error);
    CHECK_THROWS_WITH_AS(parse_netlist(".inputs a\n.outputs y\n.names y\n"),
                         doctest::Contains("constant"), Error);
    CHECK_THROWS_WITH_AS(parse_netlist(".inputs a\n.outputs y\n.names a y\n- 1\n"),
                         doctest::Contains("all-dash"), Error);
    CHECK_THROWS_WITH_AS(parse_netlist(".inputs a\n.outputs y\n.names a y\n1 0\n"),
                         doctest::Contains("on-set"), Error);
    CHECK_THROWS_WITH_AS(parse_netlist(".inputs a\n.outputs y\n.latch a y\n"),
                         doctest::Contains("unsupported construct"), Error);
    CHECK_THROWS_WITH_AS(parse_netlist(".inputs a\n.outputs y\n.names a z y\n11 1\n"),
                         doctest::Contains("undefined signal 'z'"), Error);
    CHECK_THROWS_WITH_AS(
        parse_netlist(".inputs a\n.outputs y\n.names a y\n1 1\n.names a y\n0 1\n"),
        doctest::Contains("duplicate driver"), Error);
    // p = f(q), q = f(p): a cycle.
    CHECK_THROWS_WITH_AS(
        parse_netlist(".inputs a\n.outputs p\n.names q p\n1 1\n.names p q\n1 1\n"),
        doctest::Contains("cycle"), Error);
    CHECK_THROWS_WITH_AS(parse_netlist(".inputs a\n.outputs y\n.names a b\n1 1\n"),
                         doctest::Contains("never driven"), Error);
    CHECK_THROWS_WITH_AS(parse_netlist(".outputs y\n.names a y\n1 1\n"),
                         doctest::Contains("no .inputs"), Error);
}

// ---------------------------------------------------------------------------
// Technology mapping
// ---------------------------------------------------------------------------

TEST_CASE("tech map: AND becomes one OR2 and three NOTs") {
    auto net = parse_netlist(".inputs a b\n.outputs y\n.names a b y\n11 1\n");
    GateGraph g = tech_map(net);
    int n_or = 0, n_not = 0, n_copy = 0;
    for (const Gate& gate : g.gates) {
        if (gate.kind == GateKind::OR2) n_or++;
        if (gate.kind == GateKind::NOT) n_not++;
        if (gate.kind == GateKind::COPY) n_copy++;
    }
    CHECK(n_or == 1);
    CHECK(n_not == 3);
    CHECK(n_copy == 0);
}

TEST_CASE("tech map: buffer nodes become COPY gates") {
    auto net = parse_netlist(".inputs a\n.outputs y\n.names a y\n1 1\n");
    GateGraph g = tech_map(net);
    REQUIRE(g.gates.size() == 1);
    CHECK(g.gates[0].kind == GateKind::COPY);
}

TEST_CASE("tech map: NOT cache avoids duplicate inverters") {
    // XOR uses a, b, !a, !b; the complements must be built once each.
    auto net = parse_netlist(".inputs a b\n.outputs y\n.names a b y\n01 1\n10 1\n");
    GateGraph g = tech_map(net);
    int n_not_of_a = 0;
    for (const Gate& gate : g.gates)
        if (gate.kind == GateKind::NOT && gate.a == g.inputs[0]) n_not_of_a++;
    CHECK(n_not_of_a == 1);
}

TEST_CASE("tech map: fan-in above 16 is rejected") {
    std::string in = ".inputs";
    std::string names = ".names";
    std::string pat;
    for (int i = 0; i < 17; i++) {
        in += " x" + std::to_string(i);
        names += " x" + std::to_string(i);
        pat += "1";
    }
    std::string blif = in + "\n.outputs y\n" + names + " y\n" + pat + " 1\n";
    auto net = parse_netlist(blif);
    CHECK_THROWS_WITH_AS(tech_map(net), doctest::Contains("fan-in"), Error);
}

TEST_CASE("tech map: passthrough output reads straight from the input") {
    auto net = parse_netlist(".inputs a b\n.outputs a\n.names a b t\n11 1\n.outputs t\n");
    GateGraph g = tech_map(net);
    CHECK(g.outputs[0] == g.inputs[0]);
}

// ---------------------------------------------------------------------------
// Scheduling and array execution
// ---------------------------------------------------------------------------

TEST_CASE("schedule: capacity errors carry the exact numbers") {
    auto net = parse_netlist(".inputs a\n.outputs y\n.names a y\n0 1\n");
    GateGraph g = tech_map(net);
    CHECK_THROWS_WITH_AS(build_schedule(g, 1, 1),
                         doctest::Contains("2 signals need 2 cells, 1x1 = 1 available"), Error);
}

TEST_CASE("schedule: NOT on a 1x2 array uses the behavioral fallback") {
    auto net = parse_netlist(".inputs a\n.outputs y\n.names a y\n0 1\n");
    GateGraph g = tech_map(net);
    LimSchedule sched = build_schedule(g, 1, 2);
    CHECK(sched.behavioral_fallback);
    REQUIRE(sched.segments.size() == 4); // init, load, evaluate, read
    CHECK(sched.segments[0].label == "init");
    CHECK(sched.segments[1].label == "load");
    CHECK(sched.segments[2].label == "evaluate");
    CHECK(sched.segments[3].label == "read");
    for (bool a : {false, true}) {
        Crossbar xb(1, 2, DeviceParams{}, nominal_corner(), 3);
        auto out = execute_schedule(xb, sched, {a});
        CHECK(out[0] == !a);
    }
}

TEST_CASE("schedule: staging-mode gates compute exact truth tables") {
    SUBCASE("OR2") {
        check_exhaustive(".inputs a b\n.outputs y\n.names a b y\n1- 1\n-1 1\n", 16, 16);
    }
    SUBCASE("NOT") { check_exhaustive(".inputs a\n.outputs y\n.names a y\n0 1\n", 16, 16); }
    SUBCASE("AND") { check_exhaustive(".inputs a b\n.outputs y\n.names a b y\n11 1\n", 16, 16); }
    SUBCASE("XOR") {
        check_exhaustive(".inputs a b\n.outputs y\n.names a b y\n01 1\n10 1\n", 16, 16);
    }
    SUBCASE("NOR") { check_exhaustive(".inputs a b\n.outputs y\n.names a b y\n00 1\n", 16, 16); }
    SUBCASE("MUX") {
        check_exhaustive(".inputs s a b\n.outputs y\n.names s a b y\n01- 1\n1-1 1\n", 16, 16);
    }
}

TEST_CASE("schedule: full adder matches on all 8 rows") { check_exhaustive(kFullAdder, 16, 16); }

TEST_CASE("schedule: small staging array with operand collisions") {
    // 3 rows force staged operands to share rows with each other and with
    // result deliveries.
    check_exhaustive(".inputs a b\n.outputs y\n.names a b y\n01 1\n10 1\n", 3, 4);
}

TEST_CASE("schedule: inputs survive evaluation (non-destructive gates)") {
    auto net = parse_netlist(".inputs a b\n.outputs y\n.names a b y\n1- 1\n-1 1\n");
    GateGraph g = tech_map(net);
    LimSchedule sched = build_schedule(g, 16, 16);
    Crossbar xb(16, 16, DeviceParams{}, nominal_corner(), 11);
    (void)execute_schedule(xb, sched, {true, false});
    CellRef ha = sched.home[static_cast<std::size_t>(g.inputs[0])];
    CellRef hb = sched.home[static_cast<std::size_t>(g.inputs[1])];
    CHECK(xb.cell_resistance(ha.row, ha.col) < 1e5);  // still the loaded 1
    CHECK(xb.cell_resistance(hb.row, hb.col) >= 1e5); // still the loaded 0
}

TEST_CASE("schedule: energy report splits init from evaluate and balances") {
    auto net = parse_netlist(kFullAdder);
    GateGraph g = tech_map(net);
    LimSchedule sched = build_schedule(g, 16, 16);
    Crossbar xb(16, 16, DeviceParams{}, nominal_corner(), 1);
    (void)execute_schedule(xb, sched, {true, true, false});
    const ExecutionTrace& t = xb.trace();
    double init_e = t.per_phase[static_cast<int>(Phase::init)];
    double eval_e = t.per_phase[static_cast<int>(Phase::evaluate)];
    CHECK(init_e > 0.0);
    CHECK(eval_e > 0.0);
    CHECK(init_e > eval_e * 0.1); // forming every cell is a visible share
    double sum_dev = 0.0;
    for (double e : t.per_device) sum_dev += e;
    double sum_op = 0.0;
    for (const auto& [op, e] : t.per_op) sum_op += e;
    double sum_ph = 0.0;
    for (double e : t.per_phase) sum_ph += e;
    CHECK(sum_dev == doctest::Approx(t.total_energy).epsilon(1e-9));
    CHECK(sum_op == doctest::Approx(t.total_energy).epsilon(1e-9));
    CHECK(sum_ph == doctest::Approx(t.total_energy).epsilon(1e-9));
}

TEST_CASE("schedule: wrong input count and wrong array size are rejected") {
    auto net = parse_netlist(".inputs a\n.outputs y\n.names a y\n0 1\n");
    GateGraph g = tech_map(net);
    LimSchedule sched = build_schedule(g, 4, 4);
    Crossbar xb(4, 4, DeviceParams{}, nominal_corner(), 1);
    CHECK_THROWS_AS((void)execute_schedule(xb, sched, {true, false}), Error);
    Crossbar small(2, 2, DeviceParams{}, nominal_corner(), 1);
    CHECK_THROWS_AS((void)execute_schedule(small, sched, {true}), Error);
}

// ---------------------------------------------------------------------------
// SPICE emission
// ---------------------------------------------------------------------------

TEST_CASE("spice: NOT program on a 2x1 array emits two row sources") {
    auto net = parse_netlist(".inputs a\n.outputs y\n.names a y\n0 1\n");
    GateGraph g = tech_map(net);
    LimSchedule sched = build_schedule(g, 2, 1);
    std::string deck = emit_spice(sched.program, DeviceParams{}, 1e3, "not gate");
    SpiceSummary sum = parse_spice_summary(deck);
    CHECK(sum.n_instances == 2);
    // Both rows swing to nonzero voltages; the single column stays at 0.
    CHECK(sum.pwl_points.count("Vrow0") == 1);
    CHECK(sum.pwl_points.count("Vrow1") == 1);
    CHECK(sum.pwl_points.count("Vcol0") == 0); // DC ground tie, not PWL
    CHECK(deck.find("col0 never driven above 0 V") != std::string::npos);
    // Two breakpoints per step on every PWL source.
    int n_steps = static_cast<int>(sched.program.steps.size());
    CHECK(sum.pwl_points.at("Vrow0") == 2 * n_steps);
    CHECK(sum.pwl_points.at("Vrow1") == 2 * n_steps);
    // Transient window equals the schedule duration.
    double total = 0.0;
    for (const Step& st : sched.program.steps) total += st.width;
    CHECK(sum.tran_stop == total); // %.17g round-trip is exact
    CHECK(sum.tran_step == sched.program.dt);
    // Conditional steps are annotated.
    CHECK(deck.find("conditional: fires when R(") != std::string::npos);
}

TEST_CASE("spice: floating lines are annotated, not invented") {
    auto net = parse_netlist(".inputs a b\n.outputs y\n.names a b y\n1- 1\n-1 1\n");
    GateGraph g = tech_map(net);
    LimSchedule sched = build_schedule(g, 3, 2);
    std::string deck = emit_spice(sched.program, DeviceParams{}, 1e3, "or gate");
    CHECK(deck.find("floats during step") != std::string::npos);
    SpiceSummary sum = parse_spice_summary(deck);
    CHECK(sum.n_instances == 6);
    for (const auto& [name, pts] : sum.pwl_points)
        CHECK(pts == 2 * static_cast<int>(sched.program.steps.size()));
}

TEST_CASE("spice: empty program emits header and .end only") {
    PulseProgram prog;
    prog.rows = 2;
    prog.cols = 2;
    std::string deck = emit_spice(prog, DeviceParams{}, 1e3, "empty");
    CHECK(deck.find(".end") != std::string::npos);
    CHECK(deck.find("Xr0c0") == std::string::npos);
    SpiceSummary sum = parse_spice_summary(deck);
    CHECK(sum.n_instances == 0);
    CHECK(sum.n_pwl_sources == 0);
}

TEST_CASE("spice: malformed decks are rejected") {
    CHECK_THROWS_WITH_AS(parse_spice_summary("V1 a 0 PWL(1 0 0.5 1)\n.end\n"),
                         doctest::Contains("strictly increasing"), Error);
    CHECK_THROWS_WITH_AS(parse_spice_summary("* deck without terminator\n"),
                         doctest::Contains("missing .end"), Error);
}
