#include <catch2/catch_amalgamated.hpp>

#include <kmgame/lattice.hpp>

using namespace kmgame;

namespace {

SignMap signs(const std::string& s) {
    std::vector<Sign> v;
    for (char c : s) v.push_back(c == '+' ? Sign::plus : Sign::minus);
    return SignMap(std::move(v));
}

std::vector<std::pair<CollapseMap, SignMap>> reference_pairs(int k) {
    std::vector<std::pair<CollapseMap, SignMap>> out;
    for (const auto& m : enumerate_collapse_maps(k))
        for (const auto& s : enumerate_sign_maps(k))
            if (is_reference(m, s)) out.emplace_back(m, s);
    return out;
}

double rel_diff(const KernelTensor& a, const KernelTensor& b) {
    double scale = std::max({a.max_abs(), b.max_abs(), 1e-300});
    return a.max_abs_diff(b) / scale;
}

std::vector<double> descending_times(std::mt19937_64& rng, int k, double t1) {
    std::uniform_real_distribution<double> ud(0.05, 0.95);
    std::vector<double> t(static_cast<size_t>(k));
    for (auto& v : t) v = ud(rng) * t1;
    std::sort(t.rbegin(), t.rend());
    return t;
}

}  // namespace

TEST_CASE("two-site propagator closed form") {
    LatticeModel lat(2);
    CHECK(lat.evals.minCoeff() == Catch::Approx(-4.0));
    CHECK(lat.evals.maxCoeff() == Catch::Approx(0.0).margin(1e-12));
    double t = 0.37;
    Eigen::MatrixXcd p = lat.propagator(t);
    cd e = std::exp(cd(0.0, -4.0 * t));
    CHECK(std::abs(p(0, 0) - (1.0 + e) / 2.0) < 1e-12);
    CHECK(std::abs(p(0, 1) - (1.0 - e) / 2.0) < 1e-12);
    CHECK(std::abs(p(1, 0) - p(0, 1)) < 1e-12);
}

TEST_CASE("propagator is unitary and a one-parameter group") {
    LatticeModel lat(3);
    Eigen::MatrixXcd p = lat.propagator(0.4);
    CHECK((p * p.adjoint() - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-12);
    CHECK((lat.propagator(0.4) * lat.propagator(0.3) - lat.propagator(0.7)).norm() < 1e-12);
    CHECK((lat.propagator(0.0) - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-12);
}

TEST_CASE("apply_collapse reads the shared coordinate from the right side") {
    LatticeModel lat(2);
    KernelTensor g(2, 2);
    // fill with distinguishable entries g(x1,x2;x1',x2') = x1 + 2 x2 + 4 x1' + 8 x2' + 1
    std::vector<int> idx(4);
    for (size_t lin = 0; lin < g.a.size(); ++lin) {
        size_t rest = lin;
        for (int i = 3; i >= 0; --i) { idx[static_cast<size_t>(i)] = static_cast<int>(rest % 2); rest /= 2; }
        g.a[lin] = cd(idx[0] + 2 * idx[1] + 4 * idx[2] + 8 * idx[3] + 1, 0.0);
    }
    KernelTensor plus = apply_collapse(g, 1, Sign::plus);
    KernelTensor minus = apply_collapse(g, 1, Sign::minus);
    // plus: out(x1;x1') = g(x1, x1; x1', x1)
    CHECK(plus.a[plus.index({1, 0})] == cd(1 + 2 + 0 + 8 + 1, 0.0));
    // minus: out(x1;x1') = g(x1, x1'; x1', x1')
    CHECK(minus.a[minus.index({1, 0})] == cd(1 + 0 + 0 + 0 + 1, 0.0));
}

TEST_CASE("kernel-level and wavefunction-level evaluators agree") {
    LatticeModel lat(3);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int k = 1; k <= 3; ++k) {
        auto maps = enumerate_collapse_maps(k);
        auto sgns = enumerate_sign_maps(k);
        for (int trial = 0; trial < 5; ++trial) {
            const auto& m = maps[rng() % maps.size()];
            const auto& s = sgns[rng() % sgns.size()];
            Eigen::VectorXcd phi(3);
            for (int i = 0; i < 3; ++i) phi(i) = cd(nd(rng), nd(rng));
            ProductMixture mix{3, {1.0}, {phi}};
            auto times = descending_times(rng, k, 1.0);
            KernelTensor a = eval_J(m, s, lat, 1.0, times, mix.kernel(k + 1));
            KernelTensor b = eval_J_product(m, s, lat, 1.0, times, phi);
            CHECK(rel_diff(a, b) < 1e-11);
        }
    }
}

TEST_CASE("adjacent move identity on the permuted times") {
    LatticeModel lat(3);
    std::mt19937_64 rng(23);
    for (int k = 2; k <= 4; ++k) {
        auto maps = enumerate_collapse_maps(k);
        auto sgns = enumerate_sign_maps(k);
        ProductMixture mix = random_mixture(lat, rng);
        KernelTensor f = mix.kernel(k + 1);
        for (int trial = 0; trial < 5; ++trial) {
            const auto& m = maps[rng() % maps.size()];
            const auto& s = sgns[rng() % sgns.size()];
            std::vector<int> acceptable;
            for (int j = 2; j <= k; ++j)
                if (km_acceptable(m, j)) acceptable.push_back(j);
            if (acceptable.empty()) continue;
            int j = acceptable[rng() % acceptable.size()];
            SignedTriple moved = signed_km_move(j, {m, TimePermutation::identity(k), s});
            auto times = descending_times(rng, k, 1.0);
            TimePermutation inv = moved.sigma.inverse();
            std::vector<double> permuted(times.size());
            for (int a = 2; a <= k + 1; ++a)
                permuted[static_cast<size_t>(a) - 2] = times[static_cast<size_t>(inv.of(a)) - 2];
            KernelTensor lhs = eval_J(moved.mu, moved.sgn, lat, 1.0, permuted, f);
            KernelTensor rhs = eval_J(m, s, lat, 1.0, times, f);
            CHECK(rel_diff(lhs, rhs) < 1e-9);
        }
    }
}

TEST_CASE("full reduction identity on the permuted times") {
    LatticeModel lat(3);
    std::mt19937_64 rng(31);
    int k = 3;
    auto maps = enumerate_collapse_maps(k);
    auto sgns = enumerate_sign_maps(k);
    ProductMixture mix = random_mixture(lat, rng);
    KernelTensor f = mix.kernel(k + 1);
    for (int trial = 0; trial < 10; ++trial) {
        const auto& m = maps[rng() % maps.size()];
        const auto& s = sgns[rng() % sgns.size()];
        SignedTriple tamed = reduce_to_tamed(m, s);
        auto [ref, rho] = to_reference(tamed.mu, tamed.sgn);
        TimePermutation sigma_hat = rho.inverse().compose(tamed.sigma);
        TimePermutation inv = sigma_hat.inverse();
        auto times = descending_times(rng, k, 1.0);
        std::vector<double> permuted(times.size());
        for (int a = 2; a <= k + 1; ++a)
            permuted[static_cast<size_t>(a) - 2] = times[static_cast<size_t>(inv.of(a)) - 2];
        KernelTensor lhs = eval_J(ref.first, ref.second, lat, 1.0, permuted, f);
        KernelTensor rhs = eval_J(m, s, lat, 1.0, times, f);
        CHECK(rel_diff(lhs, rhs) < 1e-9);
    }
}

TEST_CASE("two-collapse wild identity") {
    LatticeModel lat(3);
    std::mt19937_64 rng(47);
    ProductMixture mix = random_mixture(lat, rng);
    KernelTensor f = mix.kernel(3);
    double t2 = 0.8, t3 = 0.35;
    // plus-then-minus order versus minus-then-plus order with swapped times
    KernelTensor lhs = eval_J(CollapseMap({1, 1}), signs("-+"), lat, 1.0, {t2, t3}, f);
    KernelTensor rhs = eval_J(CollapseMap({1, 1}), signs("+-"), lat, 1.0, {t3, t2}, f);
    CHECK(rel_diff(lhs, rhs) < 1e-9);
}

TEST_CASE("wild identity fails on a non-symmetric kernel") {
    LatticeModel lat(3);
    std::mt19937_64 rng(59);
    std::normal_distribution<double> nd(0.0, 1.0);
    // product of three different wavefunctions: not permutation symmetric
    KernelTensor f(3, 3);
    std::vector<Eigen::VectorXcd> w(3, Eigen::VectorXcd(3));
    for (auto& v : w)
        for (int i = 0; i < 3; ++i) v(i) = cd(nd(rng), nd(rng));
    std::vector<int> idx(6);
    for (size_t lin = 0; lin < f.a.size(); ++lin) {
        size_t rest = lin;
        for (int i = 5; i >= 0; --i) { idx[static_cast<size_t>(i)] = static_cast<int>(rest % 3); rest /= 3; }
        cd v(1.0, 0.0);
        for (int i = 0; i < 3; ++i) v *= w[static_cast<size_t>(i)](idx[static_cast<size_t>(i)]);
        for (int i = 0; i < 3; ++i) v *= std::conj(w[static_cast<size_t>(i)](idx[static_cast<size_t>(i) + 3]));
        f.a[lin] = v;
    }
    double t2 = 0.8, t3 = 0.35;
    KernelTensor lhs = eval_J(CollapseMap({1, 1}), signs("-+"), lat, 1.0, {t2, t3}, f);
    KernelTensor rhs = eval_J(CollapseMap({1, 1}), signs("+-"), lat, 1.0, {t3, t2}, f);
    CHECK(rel_diff(lhs, rhs) > 1e-3);
}

TEST_CASE("factorized nesting matches the direct evaluation") {
    LatticeModel lat(3);
    std::mt19937_64 rng(71);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int k = 1; k <= 3; ++k) {
        for (const auto& [m, s] : reference_pairs(k)) {
            Eigen::VectorXcd phi(3);
            for (int i = 0; i < 3; ++i) phi(i) = cd(nd(rng), nd(rng));
            auto times = descending_times(rng, k, 1.0);
            DTree d = build_dtree(m, s);
            KernelTensor a = eval_dtree(d, lat, 1.0, times, phi);
            KernelTensor b = eval_J_product(m, s, lat, 1.0, times, phi);
            CHECK(rel_diff(a, b) < 1e-10);
        }
    }
}

TEST_CASE("raw and grouped quadratures agree at k=2") {
    LatticeModel lat(2);
    std::mt19937_64 rng(83);
    ProductMixture mix = random_mixture(lat, rng);
    QuadratureSpec q{1.0, 4};
    KernelTensor raw = quadrature_gamma1_raw(2, lat, mix, q);
    KernelTensor grouped = quadrature_gamma1_grouped(2, lat, mix, q);
    CHECK(rel_diff(raw, grouped) < 1e-10);
}

TEST_CASE("hoisted-domain split: two terms recombine into one") {
    // J over {t4<t3<t1, t2<t1} equals the same J over {t4<t3<t2<t1} plus the
    // swapped-variable term over {t4<t2<t1, t3<t2}.
    LatticeModel lat(3);
    std::mt19937_64 rng(97);
    ProductMixture mix = random_mixture(lat, rng);
    QuadratureSpec q{1.0, 5};
    CollapseMap m2({1, 1, 3});
    SignMap s2 = signs("+-+");
    CollapseMap m1({1, 1, 2});
    SignMap s1 = signs("-++");

    DomainPoset combined(3);  // t3 <= t1, t4 <= t3, t2 <= t1
    combined.set_parent(4, 3);
    DomainPoset chain(3);  // t2 <= t1, t3 <= t2, t4 <= t3
    chain.set_parent(3, 2);
    chain.set_parent(4, 3);
    DomainPoset hooked(3);  // t2 <= t1, t3 <= t2, t4 <= t2
    hooked.set_parent(3, 2);
    hooked.set_parent(4, 2);

    KernelTensor whole = quadrature_single(m2, s2, combined, lat, mix, q);
    KernelTensor part_a = quadrature_single(m2, s2, chain, lat, mix, q);
    KernelTensor part_b = quadrature_single(m1, s1, hooked, lat, mix, q);
    KernelTensor sum(1, lat.n);
    for (size_t i = 0; i < sum.a.size(); ++i) sum.a[i] = part_a.a[i] + part_b.a[i];
    CHECK(rel_diff(whole, sum) < 1e-10);
}
