#ifndef KMGAME_DTREE_HPP
#define KMGAME_DTREE_HPP

// Factorized nesting of a signed pair: each collapse node D^{(j)} owns three
// slots (same-sign left continuation, first plus collapse onto j, first
// minus collapse onto j). Free slots hold F; the node k+1 becomes the
// terminal cubic C^{(k+1)}.

#include <optional>

#include "domains.hpp"

namespace kmgame {

enum class DSlot { ls, rplus, rminus };

struct DTree {
    enum class ChildKind { dnode, free_leaf, terminal };
    struct Child {
        ChildKind kind = ChildKind::free_leaf;
        int index = 0;        // D-node or terminal label
        bool conjugated = false;
    };
    struct Node {
        std::optional<Child> ls;  // absent only for D^{(1)}
        Child rplus, rminus;
        Sign sign = Sign::plus;
    };
    int k = 0;
    std::map<int, Node> nodes;  // keys 1..k
};

namespace detail {

// Builds the nesting for an arbitrary signed pair. Nodes that are not the
// first of their sign within their branch and whose branch predecessor has
// the opposite sign end up unattached; their labels are reported in
// `orphans`. For reference pairs the orphan list is always empty.
inline DTree build_dtree_impl(const CollapseMap& mu, const SignMap& sgn, std::vector<int>* orphans) {
    SignedTree t = mu_to_tree(mu, &sgn);
    DTree d;
    d.k = mu.k;
    std::vector<bool> attached(static_cast<size_t>(mu.k) + 2, false);
    attached[1] = true;
    auto child_of = [&](int label, bool conj) {
        DTree::Child c;
        c.conjugated = conj;
        if (label == 0) {
            c.kind = DTree::ChildKind::free_leaf;
        } else if (label == mu.k + 1) {
            c.kind = DTree::ChildKind::terminal;
            c.index = label;
            attached[static_cast<size_t>(label)] = true;
        } else {
            c.kind = DTree::ChildKind::dnode;
            c.index = label;
            attached[static_cast<size_t>(label)] = true;
        }
        return c;
    };
    for (int j = 1; j <= mu.k; ++j) {
        DTree::Node node;
        if (j >= 2) {
            node.sign = sgn.sgn(j);
            int l = t.left[j];
            node.ls = child_of(l != 0 && sgn.sgn(l) == sgn.sgn(j) ? l : 0, false);
        }
        // First plus and first minus label of the right child's left branch.
        int rp = 0, rm = 0;
        for (int c = t.right[j]; c != 0; c = t.left[c]) {
            if (sgn.sgn(c) == Sign::plus && rp == 0) rp = c;
            if (sgn.sgn(c) == Sign::minus && rm == 0) rm = c;
        }
        bool host_plus = j == 1 || sgn.sgn(j) == Sign::plus;
        node.rplus = child_of(rp, !host_plus);
        node.rminus = child_of(rm, host_plus);
        d.nodes[j] = node;
    }
    if (orphans) {
        orphans->clear();
        for (int j = 2; j <= mu.k + 1; ++j)
            if (!attached[static_cast<size_t>(j)]) orphans->push_back(j);
    }
    return d;
}

}  // namespace detail

inline DTree build_dtree(const CollapseMap& mu, const SignMap& sgn) {
    if (!is_reference(mu, sgn)) throw std::invalid_argument("build_dtree: input not a reference pair");
    std::vector<int> orphans;
    DTree d = detail::build_dtree_impl(mu, sgn, &orphans);
    if (!orphans.empty()) throw std::logic_error("build_dtree: reference pair produced orphans");
    return d;
}

// Coupling l (1 <= l < k) is realized by node D^{(l+1)}. It is unclogged
// when the node keeps at least one free slot, and contracts the rough
// terminal when C^{(k+1)} sits somewhere below it.
struct CouplingMarking {
    int k = 0;
    std::vector<int> unclogged;        // couplings l with a free slot at D^{(l+1)}
    std::vector<int> contracts_rough;  // couplings whose node dominates C^{(k+1)}
};

inline CouplingMarking mark_couplings(const DTree& d) {
    CouplingMarking m;
    m.k = d.k;
    std::map<int, bool> rough;
    for (auto it = d.nodes.rbegin(); it != d.nodes.rend(); ++it) {
        bool r = false;
        auto scan = [&](const DTree::Child& c) {
            if (c.kind == DTree::ChildKind::terminal) r = true;
            if (c.kind == DTree::ChildKind::dnode && rough[c.index]) r = true;
        };
        if (it->second.ls) scan(*it->second.ls);
        scan(it->second.rplus);
        scan(it->second.rminus);
        rough[it->first] = r;
    }
    for (int l = 1; l < d.k; ++l) {
        const auto& node = d.nodes.at(l + 1);
        bool free_slot = (node.ls && node.ls->kind == DTree::ChildKind::free_leaf) ||
                         node.rplus.kind == DTree::ChildKind::free_leaf ||
                         node.rminus.kind == DTree::ChildKind::free_leaf;
        if (free_slot) m.unclogged.push_back(l);
        if (rough.at(l + 1)) m.contracts_rough.push_back(l);
    }
    return m;
}

// A D-node with its integration variable and bounds, for rendering the
// factorized iterated-integral expression.
struct DuhamelExpression {
    struct Factor {
        DTree::Child child;
        int time_var = 0;  // variable of the owning node
    };
    struct NodeTerm {
        int node = 0;
        IterationLimit bounds;  // integral over the node's own variable
        std::vector<Factor> factors;
    };
    int k = 0;
    int outermost = 0;
    std::vector<NodeTerm> terms;  // root term first, then by node label
};

inline DuhamelExpression duhamel_expression(const DTree& d, const DomainPoset& dom, bool exact = true) {
    DuhamelExpression e;
    e.k = d.k;
    e.outermost = d.k + 1;
    auto limits = iterated_limits(dom, d.k + 1, exact);
    std::map<int, IterationLimit> by_var;
    for (const auto& l : limits) by_var[l.var] = l;
    for (const auto& [j, node] : d.nodes) {
        DuhamelExpression::NodeTerm term;
        term.node = j;
        term.bounds = j == 1 ? IterationLimit{1, 0, 1} : by_var.at(j);
        auto add = [&](const std::optional<DTree::Child>& c) {
            if (!c) return;
            DuhamelExpression::Factor f;
            f.child = *c;
            f.time_var = j;
            term.factors.push_back(f);
        };
        add(node.ls);
        add(node.rplus);
        add(node.rminus);
        e.terms.push_back(std::move(term));
    }
    return e;
}

// Does the iterated integral over `dom` factor through the D-nesting of the
// pair? True iff the nesting has no orphan nodes and every variable's upper
// bound is its nesting parent (t_1 for children of D^{(1)}), with lower
// bounds only 0 or the hoisted outermost variable.
inline bool check_factorization(const CollapseMap& mu, const SignMap& sgn, const DomainPoset& dom) {
    std::vector<int> orphans;
    DTree d = detail::build_dtree_impl(mu, sgn, &orphans);
    if (!orphans.empty()) return false;
    std::vector<int> nest_parent(static_cast<size_t>(mu.k) + 2, 0);
    for (const auto& [j, node] : d.nodes) {
        auto note = [&](const std::optional<DTree::Child>& c) {
            if (c && c->kind != DTree::ChildKind::free_leaf)
                nest_parent[static_cast<size_t>(c->index)] = j;
        };
        note(node.ls);
        note(node.rplus);
        note(node.rminus);
    }
    std::vector<IterationLimit> limits;
    try {
        limits = iterated_limits(dom, mu.k + 1, true);
    } catch (const std::invalid_argument&) {
        return false;
    }
    for (const auto& l : limits) {
        if (l.var == mu.k + 1) continue;
        if (l.upper != nest_parent[static_cast<size_t>(l.var)]) return false;
        if (l.lower != 0 && l.lower != mu.k + 1) return false;
    }
    return true;
}

inline bool check_factorization(const CollapseMap& mu, const SignMap& sgn) {
    return check_factorization(mu, sgn, reference_domain(mu, sgn));
}

}  // namespace kmgame

#endif  // KMGAME_DTREE_HPP
