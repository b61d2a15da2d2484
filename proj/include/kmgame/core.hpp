#ifndef KMGAME_CORE_HPP
#define KMGAME_CORE_HPP

// Collapsing maps, sign maps, admissible binary trees, skeletons, and the
// two canonical labelings (upper-echelon and tamed) for the Duhamel
// expansion board game.

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace kmgame {

enum class Sign : std::uint8_t { plus, minus };

inline char sign_char(Sign s) { return s == Sign::plus ? '+' : '-'; }

// mu : {2..k+1} -> {1..k}, admissible iff mu(2)=1 and mu(j)<j.
struct CollapseMap {
    int k = 0;
    std::vector<int> v;  // v[j-2] = mu(j)

    CollapseMap() = default;
    explicit CollapseMap(std::vector<int> values)
        : k(static_cast<int>(values.size())), v(std::move(values)) {}

    int mu(int j) const { return v[static_cast<size_t>(j) - 2]; }
    void set(int j, int val) { v[static_cast<size_t>(j) - 2] = val; }

    bool operator==(const CollapseMap& o) const { return k == o.k && v == o.v; }
    bool operator<(const CollapseMap& o) const { return v < o.v; }
};

struct SignMap {
    int k = 0;
    std::vector<Sign> s;  // s[j-2] = sgn(j)

    SignMap() = default;
    explicit SignMap(std::vector<Sign> signs)
        : k(static_cast<int>(signs.size())), s(std::move(signs)) {}
    static SignMap all_plus(int k) { return SignMap(std::vector<Sign>(static_cast<size_t>(k), Sign::plus)); }

    Sign sgn(int j) const { return s[static_cast<size_t>(j) - 2]; }
    void set(int j, Sign x) { s[static_cast<size_t>(j) - 2] = x; }

    bool operator==(const SignMap& o) const { return k == o.k && s == o.s; }
    bool operator<(const SignMap& o) const { return s < o.s; }
};

// A bijection of {2..k+1}; entry p[j-2] = sigma(j).
struct TimePermutation {
    int k = 0;
    std::vector<int> p;

    TimePermutation() = default;
    explicit TimePermutation(std::vector<int> values)
        : k(static_cast<int>(values.size())), p(std::move(values)) {}
    static TimePermutation identity(int k) {
        std::vector<int> v(static_cast<size_t>(k));
        std::iota(v.begin(), v.end(), 2);
        return TimePermutation(std::move(v));
    }

    int of(int j) const { return j == 1 ? 1 : p[static_cast<size_t>(j) - 2]; }
    void set(int j, int val) { p[static_cast<size_t>(j) - 2] = val; }

    TimePermutation inverse() const {
        TimePermutation r = identity(k);
        for (int j = 2; j <= k + 1; ++j) r.set(of(j), j);
        return r;
    }
    // (this o other)(j) = this(other(j))
    TimePermutation compose(const TimePermutation& other) const {
        TimePermutation r = identity(k);
        for (int j = 2; j <= k + 1; ++j) r.set(j, of(other.of(j)));
        return r;
    }
    bool is_identity() const {
        for (int j = 2; j <= k + 1; ++j)
            if (of(j) != j) return false;
        return true;
    }
    bool operator==(const TimePermutation& o) const { return p == o.p; }
    bool operator<(const TimePermutation& o) const { return p < o.p; }
};

// Admissible binary tree on labels {1..k+1}. Node 1 is the root, has no
// left child and no sign; every child label exceeds its parent label.
struct SignedTree {
    int k = 0;
    bool has_signs = false;
    std::vector<int> left;    // left[label], 0 = none; size k+2
    std::vector<int> right;   // right[label]
    std::vector<Sign> sign;   // sign[label], meaningful for labels >= 2

    explicit SignedTree(int k_ = 0)
        : k(k_),
          left(static_cast<size_t>(k_) + 2, 0),
          right(static_cast<size_t>(k_) + 2, 0),
          sign(static_cast<size_t>(k_) + 2, Sign::plus) {}
};

inline bool validate_collapse_map(const CollapseMap& m) {
    if (m.k < 1 || static_cast<int>(m.v.size()) != m.k) return false;
    if (m.mu(2) != 1) return false;
    for (int j = 2; j <= m.k + 1; ++j)
        if (m.mu(j) < 1 || m.mu(j) >= j) return false;
    return true;
}

inline bool is_admissible_tree(const SignedTree& t) {
    if (t.left[1] != 0 || t.right[1] != 2) return false;
    std::vector<int> parent(static_cast<size_t>(t.k) + 2, 0);
    for (int j = 1; j <= t.k + 1; ++j) {
        for (int c : {t.left[j], t.right[j]}) {
            if (c == 0) continue;
            if (c <= j || c > t.k + 1 || parent[c] != 0) return false;
            parent[c] = j;
        }
    }
    for (int j = 2; j <= t.k + 1; ++j)
        if (parent[j] == 0) return false;
    return true;
}

// Lexicographically sorted list of all k! admissible maps.
inline std::vector<CollapseMap> enumerate_collapse_maps(int k) {
    if (k < 1) throw std::invalid_argument("enumerate_collapse_maps: k must be >= 1");
    std::vector<CollapseMap> out;
    std::vector<int> cur(static_cast<size_t>(k));
    cur[0] = 1;
    auto rec = [&](auto&& self, int j) -> void {  // j = next label to assign
        if (j > k + 1) {
            out.emplace_back(cur);
            return;
        }
        for (int val = 1; val < j; ++val) {
            cur[static_cast<size_t>(j) - 2] = val;
            self(self, j + 1);
        }
    };
    rec(rec, 3);
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<SignMap> enumerate_sign_maps(int k) {
    std::vector<SignMap> out;
    for (int mask = 0; mask < (1 << k); ++mask) {
        std::vector<Sign> s(static_cast<size_t>(k));
        for (int i = 0; i < k; ++i)
            s[static_cast<size_t>(i)] = (mask >> i) & 1 ? Sign::minus : Sign::plus;
        out.emplace_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    return out;
}

// For each node j: the minimal a>j with mu(a)=mu(j) is its left child, the
// minimal b>j with mu(b)=j is its right child.
inline SignedTree mu_to_tree(const CollapseMap& m, const SignMap* s = nullptr) {
    if (!validate_collapse_map(m)) throw std::invalid_argument("mu_to_tree: invalid collapse map");
    if (s && s->k != m.k) throw std::invalid_argument("mu_to_tree: sign map size mismatch");
    SignedTree t(m.k);
    t.right[1] = 2;
    for (int j = 2; j <= m.k + 1; ++j) {
        for (int a = j + 1; a <= m.k + 1; ++a)
            if (m.mu(a) == m.mu(j)) { t.left[j] = a; break; }
        for (int b = j + 1; b <= m.k + 1; ++b)
            if (m.mu(b) == j) { t.right[j] = b; break; }
    }
    if (s) {
        t.has_signs = true;
        for (int j = 2; j <= m.k + 1; ++j) t.sign[j] = s->sgn(j);
    }
    return t;
}

// Right children map to the parent label, left children to mu(parent).
inline std::pair<CollapseMap, SignMap> tree_to_mu(const SignedTree& t) {
    if (!is_admissible_tree(t)) throw std::invalid_argument("tree_to_mu: inadmissible tree");
    CollapseMap m(std::vector<int>(static_cast<size_t>(t.k), 0));
    // Walk top-down so mu(parent) is known before its left child is visited.
    std::vector<int> stack = {1};
    while (!stack.empty()) {
        int j = stack.back();
        stack.pop_back();
        if (int b = t.right[j]) {
            m.set(b, j);
            stack.push_back(b);
        }
        if (int a = t.left[j]) {
            m.set(a, m.mu(j));
            stack.push_back(a);
        }
    }
    SignMap s = SignMap::all_plus(t.k);
    if (t.has_signs)
        for (int j = 2; j <= t.k + 1; ++j) s.set(j, t.sign[j]);
    return {m, s};
}

// Unlabeled tree shape. Node 0 is the root slot (label 1); signs optional.
struct Skeleton {
    struct Node {
        int left = -1;
        int right = -1;
        int sign = -1;  // -1 none, 0 plus, 1 minus
    };
    std::vector<Node> nodes;  // nodes[0] = root

    int size() const { return static_cast<int>(nodes.size()) - 1; }  // non-root count

    // Canonical pre-order encoding; used as hash/equality key.
    std::string encode() const {
        std::string out;
        auto rec = [&](auto&& self, int i) -> void {
            if (i < 0) {
                out += '.';
                return;
            }
            out += '(';
            if (nodes[static_cast<size_t>(i)].sign >= 0)
                out += nodes[static_cast<size_t>(i)].sign == 0 ? '+' : '-';
            self(self, nodes[static_cast<size_t>(i)].left);
            self(self, nodes[static_cast<size_t>(i)].right);
            out += ')';
        };
        rec(rec, 0);
        return out;
    }
    bool operator==(const Skeleton& o) const { return encode() == o.encode(); }
    bool operator<(const Skeleton& o) const { return encode() < o.encode(); }
};

inline Skeleton skeleton_of(const SignedTree& t, bool keep_signs = false) {
    Skeleton sk;
    sk.nodes.emplace_back();  // root
    auto rec = [&](auto&& self, int label) -> int {
        int idx = static_cast<int>(sk.nodes.size());
        sk.nodes.emplace_back();
        if (keep_signs && label >= 2)
            sk.nodes[static_cast<size_t>(idx)].sign = t.sign[label] == Sign::plus ? 0 : 1;
        if (t.left[label]) sk.nodes[static_cast<size_t>(idx)].left = self(self, t.left[label]);
        if (t.right[label]) sk.nodes[static_cast<size_t>(idx)].right = self(self, t.right[label]);
        return idx;
    };
    if (t.right[1]) sk.nodes[0].right = rec(rec, t.right[1]);
    return sk;
}

// All bare tree shapes with k non-root nodes; count = Catalan(k).
inline std::vector<Skeleton> enumerate_skeletons(int k) {
    if (k < 1) throw std::invalid_argument("enumerate_skeletons: k must be >= 1");
    // shapes(n) = all binary tree shapes with n nodes, encoded recursively.
    auto shapes = [](auto&& self, int n) -> std::vector<Skeleton> {
        std::vector<Skeleton> out;
        if (n == 0) return out;
        for (int nl = 0; nl < n; ++nl) {
            int nr = n - 1 - nl;
            auto ls = self(self, nl);
            auto rs = self(self, nr);
            auto combine = [&](const Skeleton* l, const Skeleton* r) {
                Skeleton s;
                s.nodes.emplace_back();  // local root of the shape
                auto copy_sub = [&](auto&& cp, const Skeleton& src, int i) -> int {
                    int idx = static_cast<int>(s.nodes.size());
                    s.nodes.push_back(src.nodes[static_cast<size_t>(i)]);
                    int l = s.nodes[static_cast<size_t>(idx)].left;
                    int r = s.nodes[static_cast<size_t>(idx)].right;
                    if (l >= 0) s.nodes[static_cast<size_t>(idx)].left = cp(cp, src, l);
                    if (r >= 0) s.nodes[static_cast<size_t>(idx)].right = cp(cp, src, r);
                    return idx;
                };
                if (l) s.nodes[0].left = copy_sub(copy_sub, *l, 0);
                if (r) s.nodes[0].right = copy_sub(copy_sub, *r, 0);
                return s;
            };
            if (nl == 0 && nr == 0) {
                out.push_back(combine(nullptr, nullptr));
            } else if (nl == 0) {
                for (const auto& r : rs) out.push_back(combine(nullptr, &r));
            } else if (nr == 0) {
                for (const auto& l : ls) out.push_back(combine(&l, nullptr));
            } else {
                for (const auto& l : ls)
                    for (const auto& r : rs) out.push_back(combine(&l, &r));
            }
        }
        return out;
    };
    std::vector<Skeleton> out;
    for (auto& sub : shapes(shapes, k)) {
        Skeleton s;
        s.nodes.emplace_back();
        auto copy_sub = [&](auto&& cp, const Skeleton& src, int i) -> int {
            int idx = static_cast<int>(s.nodes.size());
            s.nodes.push_back(src.nodes[static_cast<size_t>(i)]);
            int l = s.nodes[static_cast<size_t>(idx)].left;
            int r = s.nodes[static_cast<size_t>(idx)].right;
            if (l >= 0) s.nodes[static_cast<size_t>(idx)].left = cp(cp, src, l);
            if (r >= 0) s.nodes[static_cast<size_t>(idx)].right = cp(cp, src, r);
            return idx;
        };
        s.nodes[0].right = copy_sub(copy_sub, sub, 0);
        out.push_back(std::move(s));
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace detail {

// Builds the SignedTree for a skeleton given node labels (label[i] for
// skeleton node index i; label[0] = 1).
inline SignedTree labeled_tree(const Skeleton& sk, const std::vector<int>& label, bool signed_tree) {
    SignedTree t(sk.size());
    t.has_signs = signed_tree;
    for (size_t i = 0; i < sk.nodes.size(); ++i) {
        int lab = label[i];
        if (sk.nodes[i].left >= 0) t.left[lab] = label[static_cast<size_t>(sk.nodes[i].left)];
        if (sk.nodes[i].right >= 0) t.right[lab] = label[static_cast<size_t>(sk.nodes[i].right)];
        if (signed_tree && lab >= 2) t.sign[lab] = sk.nodes[i].sign == 0 ? Sign::plus : Sign::minus;
    }
    return t;
}

}  // namespace detail

// Sequential labeling: left children first, then the smallest labeled node
// with an open right child.
inline CollapseMap upper_echelon_labeling(const Skeleton& sk) {
    int k = sk.size();
    std::vector<int> label(sk.nodes.size(), 0);
    std::vector<int> node_of(static_cast<size_t>(k) + 2, -1);
    label[0] = 1;
    node_of[1] = 0;
    if (sk.nodes[0].right < 0) throw std::invalid_argument("upper_echelon_labeling: empty skeleton");
    label[static_cast<size_t>(sk.nodes[0].right)] = 2;
    node_of[2] = sk.nodes[0].right;
    int j = 2;
    while (j <= k) {
        int cur = node_of[static_cast<size_t>(j)];
        if (sk.nodes[static_cast<size_t>(cur)].left >= 0) {
            int c = sk.nodes[static_cast<size_t>(cur)].left;
            label[static_cast<size_t>(c)] = j + 1;
            node_of[static_cast<size_t>(j) + 1] = c;
            ++j;
            continue;
        }
        int found = -1;
        for (int l = 1; l <= j; ++l) {
            int n = node_of[static_cast<size_t>(l)];
            int rc = sk.nodes[static_cast<size_t>(n)].right;
            if (rc >= 0 && label[static_cast<size_t>(rc)] == 0) { found = rc; break; }
        }
        if (found < 0) break;
        label[static_cast<size_t>(found)] = j + 1;
        node_of[static_cast<size_t>(j) + 1] = found;
        ++j;
    }
    return tree_to_mu(detail::labeled_tree(sk, label, false)).first;
}

inline bool is_upper_echelon(const CollapseMap& m) {
    for (int j = 2; j <= m.k; ++j)
        if (m.mu(j) > m.mu(j + 1)) return false;
    return true;
}

// Smallest q with mu^q(j) = 1.
inline int tier(const CollapseMap& m, int j) {
    int q = 0;
    while (j != 1) {
        j = m.mu(j);
        ++q;
    }
    return q;
}

// The four tier/parent-sign ordering requirements of the tamed form.
// Requirements that would read the sign or the mu-value of node 1 never
// fire: two same-tier nodes with mu = 1 fail every premise below.
inline bool is_tamed(const CollapseMap& m, const SignMap& s) {
    int k = m.k;
    std::vector<int> t(static_cast<size_t>(k) + 2, 0);
    for (int j = 2; j <= k + 1; ++j) t[static_cast<size_t>(j)] = tier(m, j);
    auto tt = [&](int j) { return t[static_cast<size_t>(j)]; };
    for (int l = 2; l <= k + 1; ++l) {
        for (int r = 2; r <= k + 1; ++r) {
            if (l == r) continue;
            bool must_precede = false;
            if (tt(l) < tt(r)) {
                must_precede = true;
            } else if (tt(l) == tt(r) && m.mu(l) != 1 && m.mu(r) != 1) {
                bool same_branch = m.mu(m.mu(l)) == m.mu(m.mu(r));
                if (same_branch && s.sgn(m.mu(l)) == s.sgn(m.mu(r)) && m.mu(l) < m.mu(r))
                    must_precede = true;
                if (same_branch && s.sgn(m.mu(l)) == Sign::plus && s.sgn(m.mu(r)) == Sign::minus)
                    must_precede = true;
                if (!same_branch && m.mu(l) < m.mu(r))
                    must_precede = true;
            }
            if (must_precede && l > r) return false;
        }
    }
    return true;
}

// The unique tamed enumeration of a signed skeleton: queue discipline,
// left branches labeled sequentially, plus nodes enqueued before minus.
inline std::pair<CollapseMap, SignMap> tamed_labeling(const Skeleton& sk) {
    int k = sk.size();
    std::vector<int> label(sk.nodes.size(), 0);
    std::vector<int> node_of(static_cast<size_t>(k) + 2, -1);
    label[0] = 1;
    node_of[1] = 0;
    std::vector<int> queue = {1};
    size_t qhead = 0;
    int next = 2;
    while (qhead < queue.size()) {
        int l = queue[qhead++];
        int n = node_of[static_cast<size_t>(l)];
        int rc = sk.nodes[static_cast<size_t>(n)].right;
        if (rc < 0) continue;
        std::vector<int> branch;  // labels of the left branch, top to bottom
        for (int c = rc; c >= 0; c = sk.nodes[static_cast<size_t>(c)].left) {
            label[static_cast<size_t>(c)] = next;
            node_of[static_cast<size_t>(next)] = c;
            branch.push_back(next);
            ++next;
        }
        for (int b : branch)
            if (sk.nodes[static_cast<size_t>(node_of[static_cast<size_t>(b)])].sign == 0) queue.push_back(b);
        for (int b : branch)
            if (sk.nodes[static_cast<size_t>(node_of[static_cast<size_t>(b)])].sign == 1) queue.push_back(b);
    }
    auto [m, s] = tree_to_mu(detail::labeled_tree(sk, label, true));
    return {m, s};
}

}  // namespace kmgame

#endif  // KMGAME_CORE_HPP
