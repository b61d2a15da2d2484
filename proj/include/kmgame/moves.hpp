#ifndef KMGAME_MOVES_HPP
#define KMGAME_MOVES_HPP

// Signed board-game moves on collapse-map triples: adjacent KM swaps, the
// reduction algorithms (upper-echelon and tamed), wild moves within left
// branches, and classification of all signed pairs by reference form.

#include <map>
#include <stdexcept>
#include <tuple>

#include "core.hpp"

namespace kmgame {

// (mu, sigma, sgn): sigma tracks the accumulated time-variable relabeling.
struct SignedTriple {
    CollapseMap mu;
    TimePermutation sigma;
    SignMap sgn;
};

// KM(j, j+1) is acceptable iff mu(j) != mu(j+1) and mu(j+1) < j.
inline bool km_acceptable(const CollapseMap& m, int j) {
    if (j < 2 || j + 1 > m.k + 1) return false;
    return m.mu(j) != m.mu(j + 1) && m.mu(j + 1) < j;
}

// mu' = (j,j+1) o mu o (j,j+1), sigma' = (j,j+1) o sigma, sgn' = sgn o (j,j+1).
inline SignedTriple signed_km_move(int j, const SignedTriple& in) {
    if (!km_acceptable(in.mu, j)) throw std::invalid_argument("signed_km_move: move not acceptable");
    int k = in.mu.k;
    auto swap_val = [&](int v) { return v == j ? j + 1 : (v == j + 1 ? j : v); };
    SignedTriple out = in;
    for (int a = 2; a <= k + 1; ++a) out.mu.set(a, swap_val(in.mu.mu(swap_val(a))));
    for (int a = 2; a <= k + 1; ++a) out.sigma.set(a, swap_val(in.sigma.of(a)));
    for (int a = 2; a <= k + 1; ++a) out.sgn.set(a, in.sgn.sgn(swap_val(a)));
    return out;
}

// Move-by-move record of a reduction: moves[i] = j of the i-th KM(j, j+1),
// states[i] = the triple right after it.
struct ReductionTrace {
    std::vector<int> moves;
    std::vector<SignedTriple> states;
};

namespace detail {

// Queue-driven reduction. With sign_priority the plus members of each
// finished left branch are enqueued before the minus members (tamed
// target); without it members are enqueued in label order (upper-echelon
// target).
inline SignedTriple reduce_queue(const CollapseMap& mu0, const SignMap& sgn0, bool sign_priority,
                                 ReductionTrace* trace = nullptr) {
    int k = mu0.k;
    SignedTriple cur{mu0, TimePermutation::identity(k), sgn0};
    std::vector<int> queue = {1};
    size_t qhead = 0;
    int j = 2;
    while (qhead < queue.size()) {
        int l = queue[qhead++];
        std::vector<int> branch;
        while (j <= k + 1) {
            if (cur.mu.mu(j) == l) {
                branch.push_back(j);
                ++j;
                continue;
            }
            int r = 0;
            for (int c = j + 1; c <= k + 1; ++c)
                if (cur.mu.mu(c) == l) { r = c; break; }
            if (r == 0) break;
            for (int c = r - 1; c >= j; --c) {
                cur = signed_km_move(c, cur);
                if (trace) {
                    trace->moves.push_back(c);
                    trace->states.push_back(cur);
                }
            }
        }
        if (sign_priority) {
            for (int b : branch)
                if (cur.sgn.sgn(b) == Sign::plus) queue.push_back(b);
            for (int b : branch)
                if (cur.sgn.sgn(b) == Sign::minus) queue.push_back(b);
        } else {
            for (int b : branch) queue.push_back(b);
        }
    }
    return cur;
}

}  // namespace detail

// Bubble the pair to its tamed form; returns (mu*, sigma*, sgn*).
inline SignedTriple reduce_to_tamed(const CollapseMap& mu, const SignMap& sgn,
                                    ReductionTrace* trace = nullptr) {
    if (!validate_collapse_map(mu)) throw std::invalid_argument("reduce_to_tamed: invalid collapse map");
    if (sgn.k != mu.k) throw std::invalid_argument("reduce_to_tamed: sign map size mismatch");
    return detail::reduce_queue(mu, sgn, true, trace);
}

// Unsigned reduction to the upper-echelon form of the skeleton.
inline std::pair<CollapseMap, TimePermutation> reduce_to_upper_echelon(const CollapseMap& mu) {
    if (!validate_collapse_map(mu)) throw std::invalid_argument("reduce_to_upper_echelon: invalid collapse map");
    auto r = detail::reduce_queue(mu, SignMap::all_plus(mu.k), false);
    return {r.mu, r.sigma};
}

// Full left branches of a tamed map: consecutive label runs with equal mu.
// Returned as (z, labels) sorted by the branch head.
inline std::vector<std::pair<int, std::vector<int>>> left_branches(const CollapseMap& m) {
    std::map<int, std::vector<int>> by_target;
    for (int j = 2; j <= m.k + 1; ++j) by_target[m.mu(j)].push_back(j);
    std::vector<std::pair<int, std::vector<int>>> out(by_target.begin(), by_target.end());
    std::sort(out.begin(), out.end(),
              [](const auto& a, const auto& b) { return a.second.front() < b.second.front(); });
    return out;
}

// Is rho an allowable wild permutation for the tamed pair (mu, sgn)?
// It must permute each full left branch within itself and preserve the
// relative order of same-signed members.
inline bool wild_allowable(const TimePermutation& rho, const CollapseMap& mu, const SignMap& sgn) {
    if (rho.k != mu.k || !is_tamed(mu, sgn)) return false;
    for (int j = 2; j <= mu.k + 1; ++j)
        if (mu.mu(rho.of(j)) != mu.mu(j)) return false;
    for (int q = 2; q <= mu.k + 1; ++q)
        for (int s = q + 1; s <= mu.k + 1; ++s)
            if (mu.mu(q) == mu.mu(s) && sgn.sgn(q) == sgn.sgn(s) && rho.of(q) > rho.of(s))
                return false;
    return true;
}

// W(rho): mu' = rho o mu o rho^{-1}, sigma' = rho o sigma, sgn' = sgn o rho^{-1}.
inline SignedTriple wild_move(const TimePermutation& rho, const SignedTriple& in) {
    if (!wild_allowable(rho, in.mu, in.sgn)) throw std::invalid_argument("wild_move: rho not allowable");
    int k = in.mu.k;
    SignedTriple out = in;
    TimePermutation rinv = rho.inverse();
    auto rho1 = [&](int v) { return v == 1 ? 1 : rho.of(v); };
    for (int a = 2; a <= k + 1; ++a) out.mu.set(a, rho1(in.mu.mu(rinv.of(a))));
    for (int a = 2; a <= k + 1; ++a) out.sigma.set(a, rho.of(in.sigma.of(a)));
    for (int a = 2; a <= k + 1; ++a) out.sgn.set(a, in.sgn.sgn(rinv.of(a)));
    return out;
}

inline bool is_reference(const CollapseMap& mu, const SignMap& sgn) {
    if (!is_tamed(mu, sgn)) return false;
    for (const auto& [z, labels] : left_branches(mu)) {
        (void)z;
        bool seen_minus = false;
        for (int j : labels) {
            if (sgn.sgn(j) == Sign::minus) seen_minus = true;
            else if (seen_minus) return false;
        }
    }
    return true;
}

// For a tamed pair, returns its reference form and the allowable rho with
// wild_move(rho, {ref, id, ref_sgn}).mu == mu (and matching signs).
inline std::pair<std::pair<CollapseMap, SignMap>, TimePermutation>
to_reference(const CollapseMap& mu, const SignMap& sgn) {
    if (!is_tamed(mu, sgn)) throw std::invalid_argument("to_reference: input not tamed");
    int k = mu.k;
    TimePermutation rho = TimePermutation::identity(k);
    for (const auto& [z, labels] : left_branches(mu)) {
        (void)z;
        std::vector<int> plus, minus;
        for (int j : labels)
            (sgn.sgn(j) == Sign::plus ? plus : minus).push_back(j);
        int pos = labels.front();
        for (int q : plus) rho.set(pos++, q);
        for (int n : minus) rho.set(pos++, n);
    }
    TimePermutation rinv = rho.inverse();
    CollapseMap ref = mu;
    SignMap ref_sgn = sgn;
    auto rinv1 = [&](int v) { return v == 1 ? 1 : rinv.of(v); };
    for (int a = 2; a <= k + 1; ++a) ref.set(a, rinv1(mu.mu(rho.of(a))));
    for (int a = 2; a <= k + 1; ++a) ref_sgn.set(a, sgn.sgn(rho.of(a)));
    return {{ref, ref_sgn}, rho};
}

// All allowable wild permutations of a reference pair: per branch, every
// interleaving of the plus block with the minus block.
inline std::vector<TimePermutation> allowable_permutations(const CollapseMap& mu, const SignMap& sgn) {
    if (!is_reference(mu, sgn)) throw std::invalid_argument("allowable_permutations: input not a reference pair");
    int k = mu.k;
    std::vector<TimePermutation> out = {TimePermutation::identity(k)};
    for (const auto& [z, labels] : left_branches(mu)) {
        (void)z;
        std::vector<int> plus, minus;
        for (int j : labels)
            (sgn.sgn(j) == Sign::plus ? plus : minus).push_back(j);
        int n = static_cast<int>(labels.size());
        int a = static_cast<int>(plus.size());
        // Choose the positions of the plus values among the branch slots.
        std::vector<std::vector<int>> branch_rinvs;  // each: values at slots labels[0..n-1]
        std::vector<int> pick(static_cast<size_t>(a));
        auto rec = [&](auto&& self, int idx, int from) -> void {
            if (idx == a) {
                std::vector<int> vals(static_cast<size_t>(n), 0);
                size_t pi = 0, mi = 0;
                std::vector<bool> is_plus_slot(static_cast<size_t>(n), false);
                for (int p : pick) is_plus_slot[static_cast<size_t>(p)] = true;
                for (int i = 0; i < n; ++i)
                    vals[static_cast<size_t>(i)] =
                        is_plus_slot[static_cast<size_t>(i)] ? plus[pi++] : minus[mi++];
                branch_rinvs.push_back(std::move(vals));
                return;
            }
            for (int p = from; p < n; ++p) {
                pick[static_cast<size_t>(idx)] = p;
                self(self, idx + 1, p + 1);
            }
        };
        rec(rec, 0, 0);
        std::vector<TimePermutation> next;
        for (const auto& base : out) {
            for (const auto& vals : branch_rinvs) {
                TimePermutation rinv = base;  // building rho^{-1} slotwise
                for (int i = 0; i < n; ++i)
                    rinv.set(labels[static_cast<size_t>(i)], vals[static_cast<size_t>(i)]);
                next.push_back(std::move(rinv));
            }
        }
        out = std::move(next);
    }
    for (auto& r : out) r = r.inverse();
    std::sort(out.begin(), out.end());
    return out;
}

struct ReferenceClass {
    CollapseMap ref_mu;
    SignMap ref_sgn;
    // Distinct tamed pairs of the class, each with the rho mapping the
    // reference pair onto it.
    std::vector<std::tuple<CollapseMap, SignMap, TimePermutation>> members;
    // Every signed input pair with its accumulated time permutation
    // sigma-hat relative to the reference form.
    std::vector<std::tuple<CollapseMap, SignMap, TimePermutation>> sources;
};

// Classifies all 2^k k! signed pairs by reference form.
inline std::vector<ReferenceClass> classify(int k, int cap = 7) {
    if (k < 1 || k > cap) throw std::invalid_argument("classify: k out of range");
    std::map<std::pair<std::vector<int>, std::vector<Sign>>, ReferenceClass> classes;
    auto maps = enumerate_collapse_maps(k);
    auto signs = enumerate_sign_maps(k);
    for (const auto& mu : maps) {
        for (const auto& sgn : signs) {
            SignedTriple tamed = reduce_to_tamed(mu, sgn);
            auto [ref, rho] = to_reference(tamed.mu, tamed.sgn);
            TimePermutation sigma_hat = rho.inverse().compose(tamed.sigma);
            auto key = std::make_pair(ref.first.v, ref.second.s);
            auto it = classes.find(key);
            if (it == classes.end()) {
                ReferenceClass rc;
                rc.ref_mu = ref.first;
                rc.ref_sgn = ref.second;
                it = classes.emplace(key, std::move(rc)).first;
            }
            bool have_member = false;
            for (const auto& [mm, ms, mr] : it->second.members)
                if (mm == tamed.mu && ms == tamed.sgn) { have_member = true; (void)mr; break; }
            if (!have_member) it->second.members.emplace_back(tamed.mu, tamed.sgn, rho);
            it->second.sources.emplace_back(mu, sgn, sigma_hat);
        }
    }
    std::vector<ReferenceClass> out;
    out.reserve(classes.size());
    for (auto& [key, rc] : classes) {
        (void)key;
        out.push_back(std::move(rc));
    }
    return out;
}

}  // namespace kmgame

#endif  // KMGAME_MOVES_HPP
