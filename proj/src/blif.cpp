#include "rxbar/blif.hpp"

#include <map>
#include <set>
#include <sstream>

#include "rxbar/errors.hpp"

namespace rxbar {

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
    throw_parse("netlist line " + std::to_string(line) + ": " + msg);
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

// Physical lines -> logical statements: strip comments, join continuations.
struct Statement {
    std::vector<std::string> tokens;
    int line; // first physical line
};

std::vector<Statement> lex(const std::string& text) {
    std::vector<Statement> stmts;
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::string pending;
    int pending_line = 0;
    while (std::getline(in, raw)) {
        lineno++;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        bool cont = false;
        while (!raw.empty() && (raw.back() == '\r' || raw.back() == ' ' || raw.back() == '\t'))
            raw.pop_back();
        if (!raw.empty() && raw.back() == '\\') {
            raw.pop_back();
            cont = true;
        }
        if (pending.empty()) pending_line = lineno;
        pending += raw;
        if (cont) {
            pending += ' ';
            continue;
        }
        auto toks = split_ws(pending);
        if (!toks.empty()) stmts.push_back({std::move(toks), pending_line});
        pending.clear();
    }
    if (!pending.empty()) {
        auto toks = split_ws(pending);
        if (!toks.empty()) stmts.push_back({std::move(toks), pending_line});
    }
    return stmts;
}

} // namespace

LogicNetlist parse_netlist(const std::string& text) {
    LogicNetlist net;
    auto stmts = lex(text);

    LogicNode* open_node = nullptr;
    bool saw_end = false;
    for (const Statement& st : stmts) {
        if (saw_end) break;
        const std::string& head = st.tokens[0];
        if (head[0] == '.') {
            open_node = nullptr;
            if (head == ".model") {
                if (st.tokens.size() != 2) fail(st.line, ".model takes exactly one name");
                if (!net.model.empty()) fail(st.line, "duplicate .model");
                net.model = st.tokens[1];
            } else if (head == ".inputs") {
                net.inputs.insert(net.inputs.end(), st.tokens.begin() + 1, st.tokens.end());
            } else if (head == ".outputs") {
                net.outputs.insert(net.outputs.end(), st.tokens.begin() + 1, st.tokens.end());
            } else if (head == ".names") {
                if (st.tokens.size() < 2) fail(st.line, ".names needs at least an output");
                if (st.tokens.size() == 2)
                    fail(st.line, "constant nodes (zero-input .names) are not supported");
                LogicNode node;
                node.output = st.tokens.back();
                node.inputs.assign(st.tokens.begin() + 1, st.tokens.end() - 1);
                node.line = st.line;
                net.nodes.push_back(std::move(node));
                open_node = &net.nodes.back();
            } else if (head == ".end") {
                saw_end = true;
            } else {
                fail(st.line, "unsupported construct '" + head + "'");
            }
            continue;
        }
        // Cover row.
        if (!open_node) fail(st.line, "cover row outside a .names block");
        if (st.tokens.size() != 2) fail(st.line, "cover row must be '<pattern> <value>'");
        const std::string& pat = st.tokens[0];
        if (pat.size() != open_node->inputs.size())
            fail(st.line, "pattern width " + std::to_string(pat.size()) + " does not match the " +
                              std::to_string(open_node->inputs.size()) + " node inputs");
        bool all_dash = true;
        for (char ch : pat) {
            if (ch != '0' && ch != '1' && ch != '-')
                fail(st.line, std::string("invalid pattern character '") + ch + "'");
            if (ch != '-') all_dash = false;
        }
        if (all_dash) fail(st.line, "all-dash cover rows (constants) are not supported");
        if (st.tokens[1] != "1")
            fail(st.line, "only on-set covers (output value 1) are supported");
        open_node->covers.push_back(pat);
    }

    if (net.inputs.empty()) throw_parse("netlist: no .inputs declared");
    if (net.outputs.empty()) throw_parse("netlist: no .outputs declared");

    // Signal bookkeeping: drivers and uses.
    std::set<std::string> input_set(net.inputs.begin(), net.inputs.end());
    if (input_set.size() != net.inputs.size()) throw_parse("netlist: duplicate input name");
    std::map<std::string, const LogicNode*> driver;
    for (const LogicNode& node : net.nodes) {
        if (node.covers.empty())
            fail(node.line, "node '" + node.output + "' has no cover rows");
        if (input_set.count(node.output))
            fail(node.line, "node drives primary input '" + node.output + "'");
        if (!driver.emplace(node.output, &node).second)
            fail(node.line, "duplicate driver for '" + node.output + "'");
    }
    for (const LogicNode& node : net.nodes)
        for (const std::string& sig : node.inputs)
            if (!input_set.count(sig) && !driver.count(sig))
                fail(node.line, "undefined signal '" + sig + "'");
    for (const std::string& out : net.outputs)
        if (!input_set.count(out) && !driver.count(out))
            throw_parse("netlist: output '" + out + "' is never driven");

    // Cycle check + topological order (DFS, explicit colors).
    std::map<std::string, int> color; // 0 new, 1 active, 2 done
    std::vector<LogicNode> sorted;
    sorted.reserve(net.nodes.size());
    auto visit = [&](auto&& self, const std::string& sig) -> void {
        if (input_set.count(sig)) return;
        auto it = driver.find(sig);
        if (it == driver.end()) return;
        int& c = color[sig];
        if (c == 2) return;
        if (c == 1)
            fail(it->second->line, "combinational cycle through '" + sig + "'");
        c = 1;
        for (const std::string& dep : it->second->inputs) self(self, dep);
        c = 2;
        sorted.push_back(*it->second);
    };
    for (const LogicNode& node : net.nodes) visit(visit, node.output);
    net.nodes = std::move(sorted);
    return net;
}

std::vector<bool> logical_sim(const LogicNetlist& net, const std::vector<bool>& input_values) {
    if (input_values.size() != net.inputs.size())
        throw_runtime("logical_sim: expected " + std::to_string(net.inputs.size()) +
                      " input values, got " + std::to_string(input_values.size()));
    std::map<std::string, bool> val;
    for (std::size_t i = 0; i < net.inputs.size(); i++) val[net.inputs[i]] = input_values[i];
    for (const LogicNode& node : net.nodes) {
        bool out = false;
        for (const std::string& pat : node.covers) {
            bool term = true;
            for (std::size_t i = 0; i < pat.size(); i++) {
                if (pat[i] == '-') continue;
                bool want = pat[i] == '1';
                if (val.at(node.inputs[i]) != want) {
                    term = false;
                    break;
                }
            }
            if (term) {
                out = true;
                break;
            }
        }
        val[node.output] = out;
    }
    std::vector<bool> result;
    result.reserve(net.outputs.size());
    for (const std::string& out : net.outputs) result.push_back(val.at(out));
    return result;
}

} // namespace rxbar
