#ifndef KMGAME_IO_HPP
#define KMGAME_IO_HPP

// JSON round trips and Graphviz rendering for pairs, domains, classes, and
// D-nestings.

#include <json.hpp>
#include <sstream>

#include "dtree.hpp"

namespace kmgame {

using json = nlohmann::json;

inline json to_json(const SignMap& s) {
    json arr = json::array();
    for (int j = 2; j <= s.k + 1; ++j) arr.push_back(std::string(1, sign_char(s.sgn(j))));
    return arr;
}

inline SignMap sign_map_from_json(const json& arr) {
    std::vector<Sign> v;
    for (const auto& e : arr) {
        std::string s = e.get<std::string>();
        if (s != "+" && s != "-") throw std::invalid_argument("sign_map_from_json: expected \"+\" or \"-\"");
        v.push_back(s == "+" ? Sign::plus : Sign::minus);
    }
    return SignMap(std::move(v));
}

inline json pair_to_json(const CollapseMap& mu, const SignMap& sgn) {
    SignedTree t = mu_to_tree(mu, &sgn);
    json edges = json::array();
    for (int j = 1; j <= mu.k + 1; ++j) {
        if (t.left[j]) edges.push_back({j, t.left[j]});
        if (t.right[j]) edges.push_back({j, t.right[j]});
    }
    return json{{"k", mu.k}, {"mu", mu.v}, {"sgn", to_json(sgn)}, {"edges", edges}};
}

inline std::pair<CollapseMap, SignMap> pair_from_json(const json& j) {
    CollapseMap mu(j.at("mu").get<std::vector<int>>());
    if (!validate_collapse_map(mu)) throw std::invalid_argument("pair_from_json: invalid collapse map");
    SignMap sgn = j.contains("sgn") ? sign_map_from_json(j.at("sgn")) : SignMap::all_plus(mu.k);
    if (sgn.k != mu.k) throw std::invalid_argument("pair_from_json: sign length mismatch");
    return {mu, sgn};
}

inline json domain_to_json(const DomainPoset& d) {
    json covers = json::array();
    for (const auto& [p, c] : d.covers()) covers.push_back({p, c});
    return json{{"k", d.k}, {"covers", covers}};
}

inline DomainPoset domain_from_json(const json& j) {
    DomainPoset d(j.at("k").get<int>());
    for (const auto& e : j.at("covers")) d.set_parent(e.at(1).get<int>(), e.at(0).get<int>());
    if (!validate_domain(d)) throw std::invalid_argument("domain_from_json: invalid domain");
    return d;
}

inline json permutation_to_json(const TimePermutation& p) {
    json arr = json::array();
    for (int j = 2; j <= p.k + 1; ++j) arr.push_back(p.of(j));
    return arr;
}

inline json classes_to_json(const std::vector<ReferenceClass>& classes) {
    json out = json::array();
    for (const auto& rc : classes) {
        json members = json::array();
        for (const auto& [mu, sgn, rho] : rc.members)
            members.push_back({{"mu", mu.v}, {"sgn", to_json(sgn)}, {"rho", permutation_to_json(rho)}});
        json sources = json::array();
        for (const auto& [mu, sgn, sigma] : rc.sources)
            sources.push_back({{"mu", mu.v}, {"sgn", to_json(sgn)}, {"sigma", permutation_to_json(sigma)}});
        out.push_back({{"reference", {{"mu", rc.ref_mu.v}, {"sgn", to_json(rc.ref_sgn)}}},
                       {"members", members},
                       {"sources", sources}});
    }
    return out;
}

inline json limits_to_json(const std::vector<IterationLimit>& lims) {
    auto var_name = [](int v) { return v == 0 ? std::string("0") : "t" + std::to_string(v); };
    json out = json::array();
    for (const auto& l : lims)
        out.push_back({{"var", var_name(l.var)}, {"lower", var_name(l.lower)}, {"upper", var_name(l.upper)}});
    return out;
}

inline json dtree_to_json(const DTree& d) {
    auto child = [&](const DTree::Child& c) -> json {
        switch (c.kind) {
            case DTree::ChildKind::free_leaf: return "F";
            case DTree::ChildKind::terminal: return "C" + std::to_string(c.index);
            case DTree::ChildKind::dnode: return "D" + std::to_string(c.index);
        }
        return nullptr;
    };
    json nodes = json::array();
    for (const auto& [j, node] : d.nodes) {
        json entry{{"node", j},
                   {"rplus", child(node.rplus)},
                   {"rminus", child(node.rminus)}};
        if (node.ls) entry["ls"] = child(*node.ls);
        nodes.push_back(entry);
    }
    return json{{"k", d.k}, {"nodes", nodes}};
}

// Graphviz rendering of the labeled signed tree; left edges are emitted
// before right edges so the layout matches reading order.
inline std::string tree_to_dot(const CollapseMap& mu, const SignMap& sgn) {
    SignedTree t = mu_to_tree(mu, &sgn);
    std::ostringstream os;
    os << "digraph tree {\n  node [shape=circle];\n";
    os << "  n1 [label=\"1\"];\n";
    for (int j = 2; j <= mu.k + 1; ++j)
        os << "  n" << j << " [label=\"" << j << sign_char(sgn.sgn(j)) << "\"];\n";
    for (int j = 1; j <= mu.k + 1; ++j) {
        if (t.left[j]) os << "  n" << j << " -> n" << t.left[j] << " [label=\"L\"];\n";
        if (t.right[j]) os << "  n" << j << " -> n" << t.right[j] << " [label=\"R\"];\n";
    }
    os << "}\n";
    return os.str();
}

inline std::string dtree_to_dot(const DTree& d) {
    std::ostringstream os;
    os << "digraph dnesting {\n  node [shape=box];\n";
    int next_leaf = 0;
    for (const auto& [j, node] : d.nodes) os << "  d" << j << " [label=\"D" << j << "\"];\n";
    std::ostringstream edges;
    auto emit = [&](int from, const DTree::Child& c, const char* slot) {
        std::string target;
        if (c.kind == DTree::ChildKind::free_leaf) {
            target = "f" + std::to_string(next_leaf++);
            os << "  " << target << " [label=\"F\", shape=plaintext];\n";
        } else if (c.kind == DTree::ChildKind::terminal) {
            target = "c" + std::to_string(c.index);
            os << "  " << target << " [label=\"C" << c.index << "\"];\n";
        } else {
            target = "d" + std::to_string(c.index);
        }
        edges << "  d" << from << " -> " << target << " [label=\"" << slot << "\"];\n";
    };
    for (const auto& [j, node] : d.nodes) {
        if (node.ls) emit(j, *node.ls, "ls");
        emit(j, node.rplus, "r+");
        emit(j, node.rminus, "r-");
    }
    os << edges.str() << "}\n";
    return os.str();
}

}  // namespace kmgame

#endif  // KMGAME_IO_HPP
