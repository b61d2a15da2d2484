#ifndef KMGAME_DOMAINS_HPP
#define KMGAME_DOMAINS_HPP

// Time-integration domains as forest posets over the variables t_1..t_{k+1}.
// A cover (p, c) means t_c <= t_p; t_1 is the global maximum.

#include <array>
#include <stdexcept>

#include "moves.hpp"

namespace kmgame {

struct DomainPoset {
    int k = 0;
    std::vector<int> parent;  // parent[j-2] for j = 2..k+1, values in 1..k+1

    DomainPoset() = default;
    explicit DomainPoset(int k_) : k(k_), parent(static_cast<size_t>(k_), 1) {}

    int parent_of(int j) const { return parent[static_cast<size_t>(j) - 2]; }
    void set_parent(int j, int p) { parent[static_cast<size_t>(j) - 2] = p; }

    std::vector<std::pair<int, int>> covers() const {
        std::vector<std::pair<int, int>> out;
        for (int j = 2; j <= k + 1; ++j) out.emplace_back(parent_of(j), j);
        return out;
    }
    bool operator==(const DomainPoset& o) const { return k == o.k && parent == o.parent; }
};

inline bool validate_domain(const DomainPoset& d) {
    if (static_cast<int>(d.parent.size()) != d.k) return false;
    for (int j = 2; j <= d.k + 1; ++j) {
        int p = d.parent_of(j);
        if (p < 1 || p > d.k + 1 || p == j) return false;
        // acyclic: walking parents must reach 1
        int cur = j, steps = 0;
        while (cur != 1 && steps <= d.k + 1) {
            cur = d.parent_of(cur);
            ++steps;
        }
        if (cur != 1) return false;
    }
    return true;
}

// T_D: each variable is bounded by its tree parent.
inline DomainPoset upper_echelon_domain(const CollapseMap& mu) {
    SignedTree t = mu_to_tree(mu);
    DomainPoset d(mu.k);
    for (int j = 1; j <= mu.k + 1; ++j) {
        if (t.left[j]) d.set_parent(t.left[j], j);
        if (t.right[j]) d.set_parent(t.right[j], j);
    }
    return d;
}

// sigma_* D: the cover (p, c) becomes (sigma(p), sigma(c)).
inline DomainPoset pushforward_domain(const TimePermutation& sigma, const DomainPoset& d) {
    if (sigma.k != d.k) throw std::invalid_argument("pushforward_domain: size mismatch");
    DomainPoset out(d.k);
    for (int j = 2; j <= d.k + 1; ++j) out.set_parent(sigma.of(j), sigma.of(d.parent_of(j)));
    return out;
}

// T_R: within each left branch hanging off z, the plus block forms a chain
// below t_z and so does the minus block.
inline DomainPoset reference_domain(const CollapseMap& mu, const SignMap& sgn) {
    if (!is_reference(mu, sgn)) throw std::invalid_argument("reference_domain: input not a reference pair");
    DomainPoset d(mu.k);
    for (const auto& [z, labels] : left_branches(mu)) {
        int prev_plus = z, prev_minus = z;
        for (int j : labels) {
            if (sgn.sgn(j) == Sign::plus) {
                d.set_parent(j, prev_plus);
                prev_plus = j;
            } else {
                d.set_parent(j, prev_minus);
                prev_minus = j;
            }
        }
    }
    return d;
}

// All sigma whose permuted simplex t_1 >= t_{sigma(2)} >= ... >= t_{sigma(k+1)}
// lies inside the domain: topological orders of the forest.
inline std::vector<TimePermutation> linear_extensions(const DomainPoset& d) {
    if (!validate_domain(d)) throw std::invalid_argument("linear_extensions: invalid domain");
    std::vector<TimePermutation> out;
    std::vector<int> order;
    std::vector<bool> placed(static_cast<size_t>(d.k) + 2, false);
    placed[1] = true;
    auto rec = [&](auto&& self) -> void {
        if (static_cast<int>(order.size()) == d.k) {
            TimePermutation s = TimePermutation::identity(d.k);
            for (int i = 0; i < d.k; ++i) s.set(i + 2, order[static_cast<size_t>(i)]);
            out.push_back(std::move(s));
            return;
        }
        for (int j = 2; j <= d.k + 1; ++j) {
            if (placed[static_cast<size_t>(j)] || !placed[static_cast<size_t>(d.parent_of(j))]) continue;
            placed[static_cast<size_t>(j)] = true;
            order.push_back(j);
            self(self);
            order.pop_back();
            placed[static_cast<size_t>(j)] = false;
        }
    };
    rec(rec);
    std::sort(out.begin(), out.end());
    return out;
}

// One bound of an iterated integral. Variables are indices 1..k+1; the
// constant lower bound 0 is encoded as variable 0.
struct IterationLimit {
    int var = 0;
    int lower = 0;  // 0 or a variable index
    int upper = 1;  // a variable index (1 = the fixed outer time)
};

// Rewrites the domain as an iterated integral with `outermost` integrated
// first over [0, t_1]. In exact mode the parent of the outermost variable
// picks up the lower bound t_outermost, reproducing the domain precisely;
// otherwise that constraint is dropped and the result only contains the
// domain (estimate-friendly enlargement).
inline std::vector<IterationLimit> iterated_limits(const DomainPoset& d, int outermost, bool exact = true) {
    if (!validate_domain(d)) throw std::invalid_argument("iterated_limits: invalid domain");
    if (outermost < 2 || outermost > d.k + 1) throw std::invalid_argument("iterated_limits: bad variable");
    for (int j = 2; j <= d.k + 1; ++j)
        if (d.parent_of(j) == outermost)
            throw std::invalid_argument("iterated_limits: outermost variable must be a leaf");
    std::vector<IterationLimit> out;
    out.push_back({outermost, 0, 1});
    int hoisted_parent = d.parent_of(outermost);
    for (int j = 2; j <= d.k + 1; ++j) {
        if (j == outermost) continue;
        IterationLimit lim;
        lim.var = j;
        lim.upper = d.parent_of(j);
        lim.lower = (exact && j == hoisted_parent && hoisted_parent != 1) ? outermost : 0;
        out.push_back(lim);
    }
    return out;
}

// Indicator of the closed domain at a point (t_1..t_{k+1}); point[i] = t_{i+1}.
inline bool domain_indicator(const DomainPoset& d, const std::vector<double>& point) {
    if (static_cast<int>(point.size()) != d.k + 1)
        throw std::invalid_argument("domain_indicator: point size mismatch");
    for (int j = 2; j <= d.k + 1; ++j)
        if (point[static_cast<size_t>(j) - 1] > point[static_cast<size_t>(d.parent_of(j)) - 1]) return false;
    return true;
}

// Checks a reference class: the accumulated source permutations must be
// exactly the linear extensions of T_R, each occurring once.
struct PartitionReport {
    bool ok = true;
    size_t source_count = 0;
    size_t extension_count = 0;
    std::vector<TimePermutation> missing;     // extensions with no source
    std::vector<TimePermutation> unexpected;  // sources outside the extension set
};

inline PartitionReport verify_class_partition(const ReferenceClass& rc) {
    PartitionReport rep;
    auto ext = linear_extensions(reference_domain(rc.ref_mu, rc.ref_sgn));
    std::vector<TimePermutation> srcs;
    for (const auto& [mu, sgn, sigma] : rc.sources) {
        (void)mu; (void)sgn;
        srcs.push_back(sigma);
    }
    std::sort(srcs.begin(), srcs.end());
    rep.source_count = srcs.size();
    rep.extension_count = ext.size();
    for (size_t i = 1; i < srcs.size(); ++i)
        if (srcs[i] == srcs[i - 1]) {
            rep.ok = false;
            rep.unexpected.push_back(srcs[i]);
        }
    std::set_difference(ext.begin(), ext.end(), srcs.begin(), srcs.end(),
                        std::back_inserter(rep.missing));
    std::set_difference(srcs.begin(), srcs.end(), ext.begin(), ext.end(),
                        std::back_inserter(rep.unexpected));
    if (!rep.missing.empty() || !rep.unexpected.empty() || srcs.size() != ext.size()) rep.ok = false;
    return rep;
}

}  // namespace kmgame

#endif  // KMGAME_DOMAINS_HPP
