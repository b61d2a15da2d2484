#ifndef KMGAME_LATTICE_HPP
#define KMGAME_LATTICE_HPP

// Small periodic 1-D lattice models used to check the collapse identities
// numerically: kernels are dense tensors over (Z/N)^{2m}, the free
// propagator e^{it Laplacian} acts by spectral decomposition.

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <random>

#include "dtree.hpp"

namespace kmgame {

using cd = std::complex<double>;

struct LatticeModel {
    int n = 0;
    Eigen::MatrixXd evecs;
    Eigen::VectorXd evals;

    explicit LatticeModel(int n_) : n(n_) {
        if (n_ < 2) throw std::invalid_argument("LatticeModel: n must be >= 2");
        Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(n_, n_);
        for (int i = 0; i < n_; ++i) {
            lap(i, i) = -2.0;
            lap(i, (i + 1) % n_) += 1.0;
            lap(i, (i + n_ - 1) % n_) += 1.0;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lap);
        evecs = es.eigenvectors();
        evals = es.eigenvalues();
    }

    // e^{it Laplacian}
    Eigen::MatrixXcd propagator(double t) const {
        Eigen::VectorXcd phase(n);
        for (int i = 0; i < n; ++i) phase(i) = std::exp(cd(0.0, t * evals(i)));
        return evecs.cast<cd>() * phase.asDiagonal() * evecs.transpose().cast<cd>();
    }
};

// Dense m-particle kernel gamma(x_1..x_m; x'_1..x'_m), row-major over the
// 2m axes (unprimed first).
struct KernelTensor {
    int m = 0;
    int n = 0;
    std::vector<cd> a;

    KernelTensor() = default;
    KernelTensor(int m_, int n_) : m(m_), n(n_) {
        size_t total = 1;
        for (int i = 0; i < 2 * m_; ++i) total *= static_cast<size_t>(n_);
        a.assign(total, cd(0.0, 0.0));
    }

    size_t index(const std::vector<int>& idx) const {
        size_t r = 0;
        for (int v : idx) r = r * static_cast<size_t>(n) + static_cast<size_t>(v);
        return r;
    }

    double max_abs() const {
        double r = 0.0;
        for (const cd& v : a) r = std::max(r, std::abs(v));
        return r;
    }
    double max_abs_diff(const KernelTensor& o) const {
        double r = 0.0;
        for (size_t i = 0; i < a.size(); ++i) r = std::max(r, std::abs(a[i] - o.a[i]));
        return r;
    }
};

namespace detail {

// Applies the matrix U along one axis of the 2m-axis tensor.
inline void apply_axis(KernelTensor& g, int axis, const Eigen::MatrixXcd& u) {
    int n = g.n;
    int axes = 2 * g.m;
    size_t stride = 1;
    for (int i = axis + 1; i < axes; ++i) stride *= static_cast<size_t>(n);
    size_t block = stride * static_cast<size_t>(n);
    std::vector<cd> tmp(static_cast<size_t>(n));
    for (size_t base = 0; base < g.a.size(); base += block) {
        for (size_t off = 0; off < stride; ++off) {
            for (int i = 0; i < n; ++i) {
                cd acc(0.0, 0.0);
                for (int jj = 0; jj < n; ++jj)
                    acc += u(i, jj) * g.a[base + static_cast<size_t>(jj) * stride + off];
                tmp[static_cast<size_t>(i)] = acc;
            }
            for (int i = 0; i < n; ++i) g.a[base + static_cast<size_t>(i) * stride + off] = tmp[static_cast<size_t>(i)];
        }
    }
}

}  // namespace detail

// U^{(m)}(t): e^{it Laplacian} on each unprimed axis 1..count, conjugate on
// each primed axis.
inline void apply_free(KernelTensor& g, const LatticeModel& lat, int count, double t) {
    if (count < 1 || count > g.m) throw std::invalid_argument("apply_free: bad axis count");
    Eigen::MatrixXcd u = lat.propagator(t);
    Eigen::MatrixXcd uc = u.conjugate();
    for (int i = 0; i < count; ++i) {
        detail::apply_axis(g, i, u);
        detail::apply_axis(g, g.m + i, uc);
    }
}

// B^{+-}_{j,m}: contract the last particle onto slot j, reading the shared
// coordinate from the unprimed (plus) or primed (minus) side.
inline KernelTensor apply_collapse(const KernelTensor& g, int j, Sign sign) {
    if (g.m < 2 || j < 1 || j >= g.m) throw std::invalid_argument("apply_collapse: bad slot");
    int n = g.n;
    int m2 = g.m - 1;
    KernelTensor out(m2, n);
    std::vector<int> oidx(static_cast<size_t>(2 * m2), 0);
    std::vector<int> iidx(static_cast<size_t>(2 * g.m), 0);
    size_t total = out.a.size();
    for (size_t lin = 0; lin < total; ++lin) {
        size_t rest = lin;
        for (int i = 2 * m2 - 1; i >= 0; --i) {
            oidx[static_cast<size_t>(i)] = static_cast<int>(rest % static_cast<size_t>(n));
            rest /= static_cast<size_t>(n);
        }
        int s = sign == Sign::plus ? oidx[static_cast<size_t>(j - 1)] : oidx[static_cast<size_t>(m2 + j - 1)];
        for (int i = 0; i < m2; ++i) {
            iidx[static_cast<size_t>(i)] = oidx[static_cast<size_t>(i)];
            iidx[static_cast<size_t>(g.m + i)] = oidx[static_cast<size_t>(m2 + i)];
        }
        iidx[static_cast<size_t>(g.m - 1)] = s;
        iidx[static_cast<size_t>(2 * g.m - 1)] = s;
        out.a[lin] = g.a[g.index(iidx)];
    }
    return out;
}

// A symmetric product-mixture density sum_a c_a |phi_a><phi_a|^{x m}.
struct ProductMixture {
    int n = 0;
    std::vector<double> coeff;
    std::vector<Eigen::VectorXcd> phi;

    KernelTensor kernel(int m) const {
        KernelTensor g(m, n);
        std::vector<int> idx(static_cast<size_t>(2 * m), 0);
        for (size_t lin = 0; lin < g.a.size(); ++lin) {
            size_t rest = lin;
            for (int i = 2 * m - 1; i >= 0; --i) {
                idx[static_cast<size_t>(i)] = static_cast<int>(rest % static_cast<size_t>(n));
                rest /= static_cast<size_t>(n);
            }
            cd acc(0.0, 0.0);
            for (size_t a = 0; a < coeff.size(); ++a) {
                cd term(coeff[a], 0.0);
                for (int i = 0; i < m; ++i) term *= phi[a](idx[static_cast<size_t>(i)]);
                for (int i = 0; i < m; ++i) term *= std::conj(phi[a](idx[static_cast<size_t>(m + i)]));
                acc += term;
            }
            g.a[lin] = acc;
        }
        return g;
    }
};

inline ProductMixture random_mixture(const LatticeModel& lat, std::mt19937_64& rng, int terms = 2) {
    std::normal_distribution<double> nd(0.0, 1.0);
    ProductMixture mix;
    mix.n = lat.n;
    for (int a = 0; a < terms; ++a) {
        mix.coeff.push_back(0.5 + std::abs(nd(rng)));
        Eigen::VectorXcd v(lat.n);
        for (int i = 0; i < lat.n; ++i) v(i) = cd(nd(rng), nd(rng));
        mix.phi.push_back(v);
    }
    return mix;
}

// J_{mu,sgn}(t_1, t_2..t_{k+1}) applied to the (k+1)-particle kernel f.
// All scalar prefactors are normalized to 1. times[i] = t_{i+2}.
inline KernelTensor eval_J(const CollapseMap& mu, const SignMap& sgn, const LatticeModel& lat,
                           double t1, const std::vector<double>& times, const KernelTensor& f) {
    int k = mu.k;
    if (static_cast<int>(times.size()) != k) throw std::invalid_argument("eval_J: need k times");
    if (f.m != k + 1) throw std::invalid_argument("eval_J: f must have k+1 particles");
    auto t_of = [&](int j) { return j == 1 ? t1 : times[static_cast<size_t>(j) - 2]; };
    // The innermost kernel is the free evolution of f up to t_{k+1}; the
    // time-permutation identities rely on it solving the free flow.
    KernelTensor g = f;
    apply_free(g, lat, k + 1, t_of(k + 1));
    g = apply_collapse(g, mu.mu(k + 1), sgn.sgn(k + 1));
    for (int j = k; j >= 2; --j) {
        apply_free(g, lat, j, t_of(j) - t_of(j + 1));
        g = apply_collapse(g, mu.mu(j), sgn.sgn(j));
    }
    apply_free(g, lat, 1, t1 - t_of(2));
    return g;
}

// Wavefunction-level evaluator for a single product state |phi><phi|^{x m}:
// each slot carries a pair (a_j, b_j) with kernel factor a_j(x) conj(b_j)(x').
// Collapses become cubic updates on the surviving slot.
inline KernelTensor eval_J_product(const CollapseMap& mu, const SignMap& sgn, const LatticeModel& lat,
                                   double t1, const std::vector<double>& times,
                                   const Eigen::VectorXcd& phi) {
    int k = mu.k;
    auto t_of = [&](int j) { return j == 1 ? t1 : times[static_cast<size_t>(j) - 2]; };
    // Start from the freely evolved state at t_{k+1}, matching eval_J.
    Eigen::VectorXcd phi0 = lat.propagator(t_of(k + 1)) * phi;
    std::vector<Eigen::VectorXcd> av(static_cast<size_t>(k) + 2, phi0), bv(static_cast<size_t>(k) + 2, phi0);
    auto collapse = [&](int j) {
        int z = mu.mu(j);
        if (sgn.sgn(j) == Sign::plus)
            av[static_cast<size_t>(z)] =
                av[static_cast<size_t>(z)].cwiseProduct(av[static_cast<size_t>(j)].cwiseProduct(bv[static_cast<size_t>(j)].conjugate()));
        else
            bv[static_cast<size_t>(z)] =
                bv[static_cast<size_t>(z)].cwiseProduct(bv[static_cast<size_t>(j)].cwiseProduct(av[static_cast<size_t>(j)].conjugate()));
    };
    collapse(k + 1);
    for (int j = k; j >= 2; --j) {
        Eigen::MatrixXcd u = lat.propagator(t_of(j) - t_of(j + 1));
        for (int s = 1; s <= j; ++s) {
            av[static_cast<size_t>(s)] = u * av[static_cast<size_t>(s)];
            bv[static_cast<size_t>(s)] = u * bv[static_cast<size_t>(s)];
        }
        collapse(j);
    }
    Eigen::MatrixXcd u = lat.propagator(t1 - t_of(2));
    av[1] = u * av[1];
    bv[1] = u * bv[1];
    KernelTensor g(1, lat.n);
    for (int x = 0; x < lat.n; ++x)
        for (int xp = 0; xp < lat.n; ++xp)
            g.a[static_cast<size_t>(x) * static_cast<size_t>(lat.n) + static_cast<size_t>(xp)] =
                av[1](x) * std::conj(bv[1](xp));
    return g;
}

// Evaluates the factorized D-nesting at a fixed time assignment and checks
// against eval_J by summing over the mixture terms.
inline KernelTensor eval_dtree(const DTree& d, const LatticeModel& lat, double t1,
                               const std::vector<double>& times, const Eigen::VectorXcd& phi) {
    int k = d.k;
    auto t_of = [&](int j) { return j == 1 ? t1 : times[static_cast<size_t>(j) - 2]; };
    double t_last = t_of(k + 1);
    // Child value convention: every child carries its own e^{-i t_c Lap}
    // frame; the consumer applies e^{+i t_j Lap} and conjugates if flagged.
    auto evolve = [&](const Eigen::VectorXcd& v, double t) -> Eigen::VectorXcd {
        return lat.propagator(t) * v;
    };
    // Free leaf: the initial state itself (the consumer's e^{+i t_j Lap}
    // reproduces the free evolution of phi up to t_j).  Terminal leaf: the
    // cubic self-interaction of the freely evolved state at t_{k+1}, pulled
    // back into the shared frame.
    Eigen::VectorXcd f_leaf = phi;
    Eigen::VectorXcd w = evolve(phi, t_last);
    Eigen::VectorXcd c_leaf = evolve(w.cwiseProduct(w.cwiseProduct(w.conjugate())), -t_last);
    auto value = [&](auto&& self, int j) -> Eigen::VectorXcd {
        const DTree::Node& node = d.nodes.at(j);
        double tj = t_of(j);
        auto factor = [&](const DTree::Child& c) -> Eigen::VectorXcd {
            Eigen::VectorXcd base;
            switch (c.kind) {
                case DTree::ChildKind::free_leaf: base = f_leaf; break;
                case DTree::ChildKind::terminal: base = c_leaf; break;
                case DTree::ChildKind::dnode: base = self(self, c.index); break;
            }
            Eigen::VectorXcd v = evolve(base, tj);
            return c.conjugated ? v.conjugate() : v;
        };
        Eigen::VectorXcd prod = Eigen::VectorXcd::Ones(lat.n);
        if (node.ls) prod = prod.cwiseProduct(factor(*node.ls));
        prod = prod.cwiseProduct(factor(node.rplus));
        prod = prod.cwiseProduct(factor(node.rminus));
        return evolve(prod, -tj);
    };
    // D^{(1)}: its two slots feed the two sides of the one-particle kernel.
    const DTree::Node& root = d.nodes.at(1);
    auto side = [&](const DTree::Child& c) -> Eigen::VectorXcd {
        Eigen::VectorXcd base;
        switch (c.kind) {
            case DTree::ChildKind::free_leaf: base = f_leaf; break;
            case DTree::ChildKind::terminal: base = c_leaf; break;
            case DTree::ChildKind::dnode: base = value(value, c.index); break;
        }
        return evolve(base, t1);
    };
    Eigen::VectorXcd xa = side(root.rplus);
    Eigen::VectorXcd xb = side(root.rminus);
    if (root.rplus.conjugated) xa = xa.conjugate();
    if (root.rminus.conjugated) xb = xb.conjugate();
    KernelTensor g(1, lat.n);
    for (int x = 0; x < lat.n; ++x)
        for (int xp = 0; xp < lat.n; ++xp)
            g.a[static_cast<size_t>(x) * static_cast<size_t>(lat.n) + static_cast<size_t>(xp)] =
                xa(x) * xb(xp);
    return g;
}

// Left-endpoint time grid on [0, t1), all coordinates distinct and strictly
// inside the given domain. Summation order is fixed by lexicographic grid
// order for reproducibility.
struct QuadratureSpec {
    double t1 = 1.0;
    int grid = 6;
};

namespace detail {

inline void for_each_grid_point(int k, const QuadratureSpec& q,
                                const std::function<void(const std::vector<double>&)>& fn) {
    std::vector<int> idx(static_cast<size_t>(k), 0);
    std::vector<double> pt(static_cast<size_t>(k) + 1, q.t1);  // pt[0] = t1
    double h = q.t1 / q.grid;
    auto rec = [&](auto&& self, int pos) -> void {
        if (pos == k) {
            bool distinct = true;
            for (int i = 0; i < k && distinct; ++i)
                for (int j = i + 1; j < k; ++j)
                    if (idx[static_cast<size_t>(i)] == idx[static_cast<size_t>(j)]) { distinct = false; break; }
            if (!distinct) return;
            for (int i = 0; i < k; ++i) pt[static_cast<size_t>(i) + 1] = idx[static_cast<size_t>(i)] * h;
            fn(pt);
            return;
        }
        for (int g = 0; g < q.grid; ++g) {
            idx[static_cast<size_t>(pos)] = g;
            self(self, pos + 1);
        }
    };
    rec(rec, 0);
}

inline bool strict_indicator(const DomainPoset& d, const std::vector<double>& pt) {
    for (int j = 2; j <= d.k + 1; ++j)
        if (pt[static_cast<size_t>(j) - 1] >= pt[static_cast<size_t>(d.parent_of(j)) - 1]) return false;
    return true;
}

}  // namespace detail

// Grid sum of the full expansion: over all signed pairs and the strict
// standard simplex t_1 > t_2 > ... > t_{k+1}.
inline KernelTensor quadrature_gamma1_raw(int k, const LatticeModel& lat, const ProductMixture& mix,
                                          const QuadratureSpec& q) {
    KernelTensor f = mix.kernel(k + 1);
    KernelTensor acc(1, lat.n);
    DomainPoset simplex(k);
    for (int j = 3; j <= k + 1; ++j) simplex.set_parent(j, j - 1);
    auto maps = enumerate_collapse_maps(k);
    auto signs = enumerate_sign_maps(k);
    detail::for_each_grid_point(k, q, [&](const std::vector<double>& pt) {
        if (!detail::strict_indicator(simplex, pt)) return;
        std::vector<double> times(pt.begin() + 1, pt.end());
        for (const auto& mu : maps)
            for (const auto& sgn : signs) {
                KernelTensor g = eval_J(mu, sgn, lat, q.t1, times, f);
                for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += g.a[i];
            }
    });
    return acc;
}

// The same sum reorganized by reference class: one J per class, integrated
// over the strict reference domain.
inline KernelTensor quadrature_gamma1_grouped(int k, const LatticeModel& lat, const ProductMixture& mix,
                                              const QuadratureSpec& q) {
    KernelTensor f = mix.kernel(k + 1);
    KernelTensor acc(1, lat.n);
    for (const auto& rc : classify(k)) {
        DomainPoset dom = reference_domain(rc.ref_mu, rc.ref_sgn);
        detail::for_each_grid_point(k, q, [&](const std::vector<double>& pt) {
            if (!detail::strict_indicator(dom, pt)) return;
            std::vector<double> times(pt.begin() + 1, pt.end());
            KernelTensor g = eval_J(rc.ref_mu, rc.ref_sgn, lat, q.t1, times, f);
            for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += g.a[i];
        });
    }
    return acc;
}

// Grid sum of a single J over one strict domain.
inline KernelTensor quadrature_single(const CollapseMap& mu, const SignMap& sgn, const DomainPoset& dom,
                                      const LatticeModel& lat, const ProductMixture& mix,
                                      const QuadratureSpec& q) {
    KernelTensor f = mix.kernel(mu.k + 1);
    KernelTensor acc(1, lat.n);
    detail::for_each_grid_point(mu.k, q, [&](const std::vector<double>& pt) {
        if (!detail::strict_indicator(dom, pt)) return;
        std::vector<double> times(pt.begin() + 1, pt.end());
        KernelTensor g = eval_J(mu, sgn, lat, q.t1, times, f);
        for (size_t i = 0; i < acc.a.size(); ++i) acc.a[i] += g.a[i];
    });
    return acc;
}

}  // namespace kmgame

#endif  // KMGAME_LATTICE_HPP
