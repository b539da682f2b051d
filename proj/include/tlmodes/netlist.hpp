#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <deque>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "tlmodes/errors.hpp"

namespace tlmodes {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct Capacitor {
    double farad;
};
struct Inductor {
    double henry;
};
struct Junction {
    double ej_hz;     // Josephson energy as ordinary frequency E_J / h
    double cj_farad;  // junction capacitance, may be zero
};
using ElementKind = std::variant<Capacitor, Inductor, Junction>;

struct Branch {
    std::string id;
    std::string node_plus;
    std::string node_minus;
    ElementKind kind;

    [[nodiscard]] bool is_junction() const { return std::holds_alternative<Junction>(kind); }
};

/// A three-junction loop declaration: the listed branches are the loop's
/// dynamical junctions in chain order, the middle one being the alpha
/// junction. The loop closes through at least one further branch of the
/// circuit between the chain endpoints.
struct FluxLoopDecl {
    std::string id;
    std::array<std::string, 3> branch_ids;
    double phi_ext = 0.0;         // external flux in units of Phi_0
    int coupling_sign = 1;        // +1 or -1, set by the loop geometry
    double shunt_cap_minus = 0.0; // F
    double shunt_cap_plus = 0.0;  // F
    double lc = 0.0;              // shared coupling inductance, H (0 if uncoupled)
};

struct CircuitNetlist {
    std::vector<std::string> nodes;  // declaration order
    std::vector<Branch> branches;    // file order
    std::string ground;
    std::string port_in;
    std::string port_out;
    std::vector<FluxLoopDecl> flux_loops;

    [[nodiscard]] std::size_t node_index(std::string_view name) const {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            if (nodes[i] == name) return i;
        throw UnknownNodeError("unknown node '" + std::string(name) + "'");
    }

    [[nodiscard]] const Branch& branch(std::string_view id) const {
        for (const auto& b : branches)
            if (b.id == id) return b;
        throw UnknownNodeError("unknown branch '" + std::string(id) + "'");
    }

    /// True if no branch touches the ground node (two-port floating circuit).
    [[nodiscard]] bool floating() const {
        for (const auto& b : branches)
            if (b.node_plus == ground || b.node_minus == ground) return false;
        return true;
    }
};

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> tokenize(const std::string& line) {
    std::vector<std::string> toks;
    std::string cur;
    for (char c : line) {
        if (c == '#') break;
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) toks.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    if (!cur.empty()) toks.push_back(std::move(cur));
    return toks;
}

inline double parse_number(const std::string& tok, int line) {
    double v = 0.0;
    const char* first = tok.data();
    const char* last = tok.data() + tok.size();
    if (first != last && *first == '+') ++first;  // from_chars accepts '-' but not '+'
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || first == last)
        throw SyntaxError(line, "malformed number '" + tok + "'");
    return v;
}

/// Splits "key=value", returning value for an expected key.
inline std::string expect_kv(const std::string& tok, std::string_view key, int line) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos || tok.substr(0, eq) != key)
        throw SyntaxError(line, "expected '" + std::string(key) + "=<value>', got '" + tok + "'");
    return tok.substr(eq + 1);
}

inline std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') out.push_back(cur), cur.clear();
        else cur.push_back(c);
    }
    out.push_back(cur);
    return out;
}

}  // namespace detail

/// Parses the line-oriented netlist grammar:
///
///   node     <id> [<id> ...]
///   ground   <node>
///   port_in  <node>
///   port_out <node>
///   C  <id> <node+> <node-> <farad>
///   L  <id> <node+> <node-> <henry>
///   JJ <id> <node+> <node-> ej=<hertz> cj=<farad>
///   fluxloop <id> branches=<id1>,<id2>,<id3> ext=<phi0_units> sign=<+1|-1>
///            cs_minus=<farad> cs_plus=<farad> lc=<henry>
///
/// '#' starts a comment. ground/port_in/port_out implicitly declare their
/// node. Branch order in the file defines branch order in the result.
inline CircuitNetlist parse_netlist(const std::string& text) {
    CircuitNetlist net;
    std::vector<std::string> declared;
    auto is_declared = [&](const std::string& n) {
        return std::find(declared.begin(), declared.end(), n) != declared.end();
    };
    auto declare = [&](const std::string& n, int line) {
        if (is_declared(n)) throw DuplicateIdError(line, "node '" + n + "' already declared");
        declared.push_back(n);
    };
    auto declare_if_new = [&](const std::string& n) {
        if (!is_declared(n)) declared.push_back(n);
    };
    auto branch_exists = [&](const std::string& id) {
        return std::any_of(net.branches.begin(), net.branches.end(),
                           [&](const Branch& b) { return b.id == id; });
    };
    auto check_node = [&](const std::string& n, int line) {
        if (!is_declared(n)) throw UnknownNodeError(line, "undeclared node '" + n + "'");
    };
    auto add_branch = [&](Branch b, int line) {
        if (branch_exists(b.id)) throw DuplicateIdError(line, "branch '" + b.id + "' already declared");
        check_node(b.node_plus, line);
        check_node(b.node_minus, line);
        if (b.node_plus == b.node_minus)
            throw SyntaxError(line, "branch '" + b.id + "' connects a node to itself");
        net.branches.push_back(std::move(b));
    };

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto toks = detail::tokenize(line);
        if (toks.empty()) continue;
        const std::string& kw = toks[0];

        if (kw == "node") {
            if (toks.size() < 2) throw SyntaxError(lineno, "node statement needs at least one id");
            for (std::size_t i = 1; i < toks.size(); ++i) declare(toks[i], lineno);
        } else if (kw == "ground" || kw == "port_in" || kw == "port_out") {
            if (toks.size() != 2) throw SyntaxError(lineno, kw + " takes exactly one node id");
            std::string& slot = kw == "ground" ? net.ground : kw == "port_in" ? net.port_in : net.port_out;
            if (!slot.empty()) throw DuplicateIdError(lineno, kw + " already declared");
            declare_if_new(toks[1]);
            slot = toks[1];
        } else if (kw == "C" || kw == "L") {
            if (toks.size() != 5) throw SyntaxError(lineno, kw + " statement needs <id> <node+> <node-> <value>");
            const double v = detail::parse_number(toks[4], lineno);
            if (!(v > 0.0)) throw SyntaxError(lineno, kw + " value must be positive");
            ElementKind kind = kw == "C" ? ElementKind{Capacitor{v}} : ElementKind{Inductor{v}};
            add_branch(Branch{toks[1], toks[2], toks[3], kind}, lineno);
        } else if (kw == "JJ") {
            if (toks.size() != 6) throw SyntaxError(lineno, "JJ statement needs <id> <node+> <node-> ej=<hz> cj=<farad>");
            const double ej = detail::parse_number(detail::expect_kv(toks[4], "ej", lineno), lineno);
            const double cj = detail::parse_number(detail::expect_kv(toks[5], "cj", lineno), lineno);
            if (!(ej > 0.0)) throw SyntaxError(lineno, "ej must be positive");
            if (cj < 0.0) throw SyntaxError(lineno, "cj must be non-negative");
            add_branch(Branch{toks[1], toks[2], toks[3], Junction{ej, cj}}, lineno);
        } else if (kw == "fluxloop") {
            if (toks.size() != 8)
                throw SyntaxError(lineno, "fluxloop needs <id> branches= ext= sign= cs_minus= cs_plus= lc=");
            FluxLoopDecl d;
            d.id = toks[1];
            for (const auto& fl : net.flux_loops)
                if (fl.id == d.id) throw DuplicateIdError(lineno, "fluxloop '" + d.id + "' already declared");
            auto ids = detail::split_csv(detail::expect_kv(toks[2], "branches", lineno));
            if (ids.size() != 3) throw SyntaxError(lineno, "fluxloop needs exactly three branch ids");
            std::copy(ids.begin(), ids.end(), d.branch_ids.begin());
            d.phi_ext = detail::parse_number(detail::expect_kv(toks[3], "ext", lineno), lineno);
            const double sgn = detail::parse_number(detail::expect_kv(toks[4], "sign", lineno), lineno);
            if (sgn != 1.0 && sgn != -1.0) throw SyntaxError(lineno, "sign must be +1 or -1");
            d.coupling_sign = static_cast<int>(sgn);
            d.shunt_cap_minus = detail::parse_number(detail::expect_kv(toks[5], "cs_minus", lineno), lineno);
            d.shunt_cap_plus = detail::parse_number(detail::expect_kv(toks[6], "cs_plus", lineno), lineno);
            d.lc = detail::parse_number(detail::expect_kv(toks[7], "lc", lineno), lineno);
            if (d.shunt_cap_minus < 0 || d.shunt_cap_plus < 0 || d.lc < 0)
                throw SyntaxError(lineno, "fluxloop capacitances and lc must be non-negative");
            net.flux_loops.push_back(std::move(d));
        } else {
            throw SyntaxError(lineno, "unknown statement '" + kw + "'");
        }
    }

    net.nodes = declared;
    if (net.ground.empty()) throw MissingDeclError("missing ground declaration");
    if (net.port_in.empty()) throw MissingDeclError("missing port_in declaration");
    if (net.port_out.empty()) throw MissingDeclError("missing port_out declaration");

    //      Connectivity: every non-ground node must be reachable from port_in
    // through branches; the ground node must be in the same component unless
    // it is entirely unused (floating two-port circuit).
    {
        std::vector<bool> seen(net.nodes.size(), false);
        std::deque<std::size_t> queue{net.node_index(net.port_in)};
        seen[queue.front()] = true;
        while (!queue.empty()) {
            const std::size_t cur = queue.front();
            queue.pop_front();
            for (const auto& b : net.branches) {
                const std::size_t p = net.node_index(b.node_plus);
                const std::size_t m = net.node_index(b.node_minus);
                if (p == cur && !seen[m]) seen[m] = true, queue.push_back(m);
                if (m == cur && !seen[p]) seen[p] = true, queue.push_back(p);
            }
        }
        const bool ground_isolated = net.floating();
        for (std::size_t i = 0; i < net.nodes.size(); ++i) {
            if (seen[i]) continue;
            if (net.nodes[i] == net.ground && ground_isolated) continue;
            throw DisconnectedGraphError("node '" + net.nodes[i] + "' is not connected to port_in");
        }
    }

    // Flux loop validation: three junction branches forming a chain, closed by
    // at least one other branch between the chain endpoints.
    for (const auto& d : net.flux_loops) {
        std::array<const Branch*, 3> bs{};
        for (int i = 0; i < 3; ++i) {
            bs[i] = &net.branch(d.branch_ids[i]);
            if (!bs[i]->is_junction())
                throw SyntaxError("fluxloop '" + d.id + "': branch '" + d.branch_ids[i] + "' is not a junction");
        }
        // chain order: b0 and b1 share a node, b1 and b2 share a different node
        auto shares = [](const Branch* a, const Branch* b) -> std::optional<std::string> {
            for (const auto& n : {a->node_plus, a->node_minus})
                if (n == b->node_plus || n == b->node_minus) return n;
            return std::nullopt;
        };
        auto j01 = shares(bs[0], bs[1]);
        auto j12 = shares(bs[1], bs[2]);
        if (!j01 || !j12 || *j01 == *j12)
            throw SyntaxError("fluxloop '" + d.id + "': branches do not form a chain");
        const std::string start = bs[0]->node_plus == *j01 ? bs[0]->node_minus : bs[0]->node_plus;
        const std::string end = bs[2]->node_plus == *j12 ? bs[2]->node_minus : bs[2]->node_plus;
        const bool closed = std::any_of(net.branches.begin(), net.branches.end(), [&](const Branch& b) {
            if (b.id == d.branch_ids[0] || b.id == d.branch_ids[1] || b.id == d.branch_ids[2]) return false;
            return (b.node_plus == start && b.node_minus == end) ||
                   (b.node_plus == end && b.node_minus == start);
        });
        if (!closed)
            throw SyntaxError("fluxloop '" + d.id + "': no closure branch between '" + start + "' and '" + end + "'");
    }
    return net;
}

/// Serializes back to the input grammar; parse(serialize(net)) == net.
inline std::string serialize_netlist(const CircuitNetlist& net) {
    std::ostringstream os;
    os.precision(17);
    for (const auto& n : net.nodes) {
        if (n == net.ground || n == net.port_in || n == net.port_out) continue;
        os << "node " << n << "\n";
    }
    os << "ground " << net.ground << "\n";
    os << "port_in " << net.port_in << "\n";
    os << "port_out " << net.port_out << "\n";
    for (const auto& b : net.branches) {
        if (const auto* c = std::get_if<Capacitor>(&b.kind)) {
            os << "C " << b.id << " " << b.node_plus << " " << b.node_minus << " " << c->farad << "\n";
        } else if (const auto* l = std::get_if<Inductor>(&b.kind)) {
            os << "L " << b.id << " " << b.node_plus << " " << b.node_minus << " " << l->henry << "\n";
        } else {
            const auto& j = std::get<Junction>(b.kind);
            os << "JJ " << b.id << " " << b.node_plus << " " << b.node_minus
               << " ej=" << j.ej_hz << " cj=" << j.cj_farad << "\n";
        }
    }
    for (const auto& d : net.flux_loops) {
        os << "fluxloop " << d.id << " branches=" << d.branch_ids[0] << "," << d.branch_ids[1] << ","
           << d.branch_ids[2] << " ext=" << d.phi_ext << " sign=" << (d.coupling_sign > 0 ? "+1" : "-1")
           << " cs_minus=" << d.shunt_cap_minus << " cs_plus=" << d.shunt_cap_plus << " lc=" << d.lc << "\n";
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// Spanning tree and incidence matrix
// ---------------------------------------------------------------------------

struct SpanningTree {
    // For each non-root node: the branch used to reach it and the traversal
    // direction (+1 when the branch was crossed from its minus to its plus
    // node, so that the node flux gains +delta_b along the path).
    struct Step {
        std::string branch_id;
        int direction;
    };
    std::string root;
    std::vector<std::string> tree_branches;
    std::vector<std::string> closure_branches;
    std::map<std::string, std::string> parent;      // node -> parent node
    std::map<std::string, Step> reach;              // node -> step from parent

    /// Ordered steps from the root to `node`.
    [[nodiscard]] std::vector<Step> path(const std::string& node) const {
        std::vector<Step> steps;
        std::string cur = node;
        while (cur != root) {
            auto it = reach.find(cur);
            if (it == reach.end()) throw UnknownNodeError("node '" + node + "' not reached by tree");
            steps.push_back(it->second);
            cur = parent.at(cur);
        }
        std::reverse(steps.begin(), steps.end());
        return steps;
    }
};

/// Breadth-first tree from the ground node, branches considered in file
/// order, which makes the result deterministic. For a floating two-port the
/// root falls back to port_in (the gauge node).
inline SpanningTree build_spanning_tree(const CircuitNetlist& net) {
    SpanningTree tree;
    tree.root = net.floating() ? net.port_in : net.ground;
    std::vector<std::string> visited{tree.root};
    auto is_visited = [&](const std::string& n) {
        return std::find(visited.begin(), visited.end(), n) != visited.end();
    };
    std::deque<std::string> queue{tree.root};
    std::vector<bool> in_tree(net.branches.size(), false);
    while (!queue.empty()) {
        const std::string cur = queue.front();
        queue.pop_front();
        for (std::size_t i = 0; i < net.branches.size(); ++i) {
            const auto& b = net.branches[i];
            std::string other;
            int direction = 0;
            if (b.node_plus == cur) other = b.node_minus, direction = -1;
            else if (b.node_minus == cur) other = b.node_plus, direction = +1;
            else continue;
            if (is_visited(other)) continue;
            visited.push_back(other);
            in_tree[i] = true;
            tree.tree_branches.push_back(b.id);
            tree.parent[other] = cur;
            tree.reach[other] = SpanningTree::Step{b.id, direction};
            queue.push_back(other);
        }
    }
    for (std::size_t i = 0; i < net.branches.size(); ++i)
        if (!in_tree[i]) tree.closure_branches.push_back(net.branches[i].id);
    return tree;
}

struct IncidenceMatrix {
    Eigen::MatrixXd entries;             // M branches x N non-ground nodes
    std::vector<std::string> row_order;  // branch ids
    std::vector<std::string> col_order;  // node ids
};

/// K with the ground column omitted (ground flux is gauge-fixed to zero):
/// K(b, j) = +1 when branch b has node j at its + end, -1 at its - end.
inline IncidenceMatrix build_incidence_matrix(const CircuitNetlist& net) {
    IncidenceMatrix k;
    for (const auto& n : net.nodes)
        if (n != net.ground) k.col_order.push_back(n);
    k.entries = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(net.branches.size()),
                                      static_cast<Eigen::Index>(k.col_order.size()));
    auto col = [&](const std::string& n) -> std::ptrdiff_t {
        auto it = std::find(k.col_order.begin(), k.col_order.end(), n);
        return it == k.col_order.end() ? -1 : it - k.col_order.begin();
    };
    for (std::size_t i = 0; i < net.branches.size(); ++i) {
        const auto& b = net.branches[i];
        k.row_order.push_back(b.id);
        if (auto c = col(b.node_plus); c >= 0) k.entries(static_cast<Eigen::Index>(i), c) = 1.0;
        if (auto c = col(b.node_minus); c >= 0) k.entries(static_cast<Eigen::Index>(i), c) = -1.0;
    }
    return k;
}

}  // namespace tlmodes
