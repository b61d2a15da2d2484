// kmg: enumerate, reduce, classify, and verify Duhamel board-game terms.
//
// Examples:
//   kmg enumerate --k 5 --kind skeletons
//   echo '{"mu":[1,1,3],"sgn":["+","-","+"]}' | kmg dtree --format dot
//   kmg verify --suite all --k 3 --lattice-n 3 --grid 6 --out report.json

#include <CLI11.hpp>

#include <kmgame/io.hpp>
#include <kmgame/lattice.hpp>

#include <fstream>
#include <iostream>

using namespace kmgame;

namespace {

constexpr int kCombinatoricsCap = 6;
constexpr int kQuadratureCap = 3;

struct Output {
    std::string path;
    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            if (text.empty() || text.back() != '\n') std::cout << '\n';
            return;
        }
        std::ofstream f(path);
        if (!f) throw CLI::ValidationError("--out", "cannot open " + path);
        f << text;
        if (text.empty() || text.back() != '\n') f << '\n';
    }
};

json read_input_json(const std::string& in_path) {
    if (!in_path.empty()) {
        std::ifstream f(in_path);
        if (!f) throw std::runtime_error("cannot open " + in_path);
        return json::parse(f);
    }
    return json::parse(std::cin);
}

std::string inequalities_text(const DomainPoset& d) {
    std::string out;
    for (const auto& [p, c] : d.covers()) {
        if (!out.empty()) out += ", ";
        out += "t" + std::to_string(c) + " <= t" + std::to_string(p);
    }
    return out;
}

double rel_diff(const KernelTensor& a, const KernelTensor& b) {
    double scale = std::max({a.max_abs(), b.max_abs(), 1e-300});
    return a.max_abs_diff(b) / scale;
}

std::vector<double> descending_times(std::mt19937_64& rng, int k) {
    std::uniform_real_distribution<double> ud(0.05, 0.95);
    std::vector<double> t(static_cast<size_t>(k));
    for (auto& v : t) v = ud(rng);
    std::sort(t.rbegin(), t.rend());
    return t;
}

struct VerifyContext {
    int k = 3;
    int lattice_n = 3;
    int grid = 6;
    std::uint64_t seed = 20240901;
    double tol_identity = 1e-9;
    double tol_quadrature = 1e-10;
    bool fail_fast = false;
    json checks = json::array();
    bool all_pass = true;

    bool record(const std::string& test, int kk, int n, double residual, bool pass) {
        checks.push_back({{"test", test}, {"k", kk}, {"N", n}, {"residual", residual}, {"pass", pass}});
        if (!pass) all_pass = false;
        return pass || !fail_fast;
    }
};

bool run_partition_suite(VerifyContext& ctx) {
    for (int k = 2; k <= std::min(ctx.k, kCombinatoricsCap); ++k) {
        long total = 0;
        bool ok = true;
        for (const auto& rc : classify(k)) {
            if (!verify_class_partition(rc).ok) ok = false;
            total += static_cast<long>(rc.sources.size());
        }
        long expected = 1;
        for (int i = 2; i <= k; ++i) expected *= i;
        expected <<= k;
        ok = ok && total == expected;
        if (!ctx.record("partition_k" + std::to_string(k), k, 0, ok ? 0.0 : 1.0, ok)) return false;
    }
    return true;
}

bool run_identities_suite(VerifyContext& ctx) {
    LatticeModel lat(ctx.lattice_n);
    std::mt19937_64 rng(ctx.seed);
    // k starts at 3: no adjacent move is acceptable at k=2
    for (int k = 3; k <= std::max(3, std::min(ctx.k, 4)); ++k) {
        auto maps = enumerate_collapse_maps(k);
        auto sgn_all = enumerate_sign_maps(k);
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            ProductMixture mix = random_mixture(lat, rng);
            KernelTensor f = mix.kernel(k + 1);
            CollapseMap m = maps[rng() % maps.size()];
            SignMap s = sgn_all[rng() % sgn_all.size()];
            std::vector<int> acceptable;
            for (int j = 2; j <= k; ++j)
                if (km_acceptable(m, j)) acceptable.push_back(j);
            if (acceptable.empty()) continue;
            int j = acceptable[rng() % acceptable.size()];
            SignedTriple moved = signed_km_move(j, {m, TimePermutation::identity(k), s});
            auto times = descending_times(rng, k);
            TimePermutation inv = moved.sigma.inverse();
            std::vector<double> permuted(times.size());
            for (int a = 2; a <= k + 1; ++a)
                permuted[static_cast<size_t>(a) - 2] = times[static_cast<size_t>(inv.of(a)) - 2];
            worst = std::max(worst, rel_diff(eval_J(moved.mu, moved.sgn, lat, 1.0, permuted, f),
                                             eval_J(m, s, lat, 1.0, times, f)));
        }
        if (!ctx.record("km_move_identity_k" + std::to_string(k), k, ctx.lattice_n, worst,
                        worst <= ctx.tol_identity))
            return false;
    }
    // two-collapse wild identity
    {
        double worst = 0.0;
        std::uniform_real_distribution<double> ud(0.05, 0.95);
        for (int trial = 0; trial < 20; ++trial) {
            ProductMixture mix = random_mixture(lat, rng);
            KernelTensor f = mix.kernel(3);
            double t2 = ud(rng), t3 = ud(rng);
            SignMap mp({Sign::minus, Sign::plus}), pm({Sign::plus, Sign::minus});
            worst = std::max(worst, rel_diff(eval_J(CollapseMap({1, 1}), mp, lat, 1.0, {t2, t3}, f),
                                             eval_J(CollapseMap({1, 1}), pm, lat, 1.0, {t3, t2}, f)));
        }
        if (!ctx.record("wild_identity", 2, ctx.lattice_n, worst, worst <= ctx.tol_identity)) return false;
    }
    return true;
}

bool run_factorization_suite(VerifyContext& ctx) {
    for (int k = 1; k <= std::min(ctx.k, kCombinatoricsCap); ++k) {
        bool ok = true;
        for (const auto& m : enumerate_collapse_maps(k))
            for (const auto& s : enumerate_sign_maps(k))
                if (is_reference(m, s) && !check_factorization(m, s)) ok = false;
        if (!ctx.record("factorization_reference_k" + std::to_string(k), k, 0, ok ? 0.0 : 1.0, ok))
            return false;
    }
    DomainPoset raw(3);
    raw.set_parent(3, 2);
    raw.set_parent(4, 2);
    SignMap s({Sign::minus, Sign::plus, Sign::plus});
    bool rejected = !check_factorization(CollapseMap({1, 1, 2}), s, raw);
    return ctx.record("factorization_rejects_entangled_raw_term", 3, 0, rejected ? 0.0 : 1.0, rejected);
}

bool run_quadrature_suite(VerifyContext& ctx) {
    LatticeModel lat(ctx.lattice_n);
    std::mt19937_64 rng(ctx.seed);
    for (int k = 2; k <= std::min(ctx.k, kQuadratureCap); ++k) {
        ProductMixture mix = random_mixture(lat, rng);
        QuadratureSpec q{1.0, ctx.grid};
        double r = rel_diff(quadrature_gamma1_raw(k, lat, mix, q),
                            quadrature_gamma1_grouped(k, lat, mix, q));
        if (!ctx.record("quadrature_regroup_k" + std::to_string(k), k, ctx.lattice_n, r,
                        r <= ctx.tol_quadrature))
            return false;
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"board-game combinatorics of the Gross-Pitaevskii hierarchy"};
    app.require_subcommand(1);

    int k = 3;
    int lattice_n = 3;
    int grid = 6;
    std::uint64_t seed = 20240901;
    double tol = 0.0;
    std::string format = "text";
    std::string kind = "maps";
    std::string suite = "all";
    std::string in_path, out_path;
    bool fail_fast = false;

    auto add_common = [&](CLI::App* cmd, bool with_lattice) {
        cmd->add_option("--k", k, "coupling order");
        cmd->add_option("--format", format, "output format: text|json|dot");
        cmd->add_option("--out", out_path, "write output to FILE instead of stdout");
        if (with_lattice) {
            cmd->add_option("--lattice-n", lattice_n, "lattice sites");
            cmd->add_option("--grid", grid, "time grid points");
            cmd->add_option("--seed", seed, "RNG seed");
            cmd->add_option("--tol", tol, "override residual tolerance");
            cmd->add_flag("--fail-fast", fail_fast, "stop at the first failing check");
        }
    };

    CLI::App* c_enum = app.add_subcommand("enumerate", "list maps, skeletons, or classes");
    c_enum->add_option("--kind", kind, "maps|skeletons|classes");
    add_common(c_enum, false);

    CLI::App* c_reduce = app.add_subcommand("reduce", "reduce a signed pair to tamed and reference form");
    c_reduce->add_option("--in", in_path, "input JSON file (default stdin)");
    add_common(c_reduce, false);

    CLI::App* c_classify = app.add_subcommand("classify", "group all signed pairs by reference form");
    add_common(c_classify, false);

    CLI::App* c_domains = app.add_subcommand("domains", "time-integration domains of a pair");
    c_domains->add_option("--in", in_path, "input JSON file (default stdin)");
    add_common(c_domains, false);

    CLI::App* c_dtree = app.add_subcommand("dtree", "factorized nesting of a reference pair");
    c_dtree->add_option("--in", in_path, "input JSON file (default stdin)");
    add_common(c_dtree, false);

    CLI::App* c_verify = app.add_subcommand("verify", "run verification suites");
    c_verify->add_option("--suite", suite, "identities|partition|factorization|quadrature|all");
    add_common(c_verify, true);

    CLI::App* c_render = app.add_subcommand("render", "DOT drawing of a signed pair's tree");
    c_render->add_option("--in", in_path, "input JSON file (default stdin)");
    add_common(c_render, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    Output out{out_path};
    try {
        if (c_enum->parsed()) {
            if (k < 1 || k > kCombinatoricsCap) throw std::runtime_error("k out of range (1..6)");
            json items = json::array();
            if (kind == "maps") {
                for (const auto& m : enumerate_collapse_maps(k)) items.push_back(m.v);
            } else if (kind == "skeletons") {
                for (const auto& s : enumerate_skeletons(k)) items.push_back(s.encode());
            } else if (kind == "classes") {
                for (const auto& rc : classify(k))
                    items.push_back({{"mu", rc.ref_mu.v},
                                     {"sgn", to_json(rc.ref_sgn)},
                                     {"sources", rc.sources.size()}});
            } else {
                throw std::runtime_error("unknown kind: " + kind);
            }
            if (format == "json") {
                out.write(json{{"k", k}, {"kind", kind}, {"items", items}, {"count", items.size()}}.dump(2));
            } else {
                std::string text;
                for (const auto& it : items) text += it.dump() + "\n";
                text += "count: " + std::to_string(items.size()) + "\n";
                out.write(text);
            }
        } else if (c_reduce->parsed()) {
            auto [mu, sgn] = pair_from_json(read_input_json(in_path));
            SignedTriple tamed = reduce_to_tamed(mu, sgn);
            auto [ref, rho] = to_reference(tamed.mu, tamed.sgn);
            DomainPoset tr = reference_domain(ref.first, ref.second);
            json rep{{"input", pair_to_json(mu, sgn)},
                     {"tamed", pair_to_json(tamed.mu, tamed.sgn)},
                     {"sigma", permutation_to_json(tamed.sigma)},
                     {"sigma_is_identity", tamed.sigma.is_identity()},
                     {"reference", pair_to_json(ref.first, ref.second)},
                     {"rho", permutation_to_json(rho)},
                     {"reference_domain", domain_to_json(tr)}};
            if (format == "json") {
                out.write(rep.dump(2));
            } else {
                std::string text;
                text += "tamed:      mu=" + json(tamed.mu.v).dump() + " sgn=" + to_json(tamed.sgn).dump() + "\n";
                text += "sigma:      " + permutation_to_json(tamed.sigma).dump() +
                        (tamed.sigma.is_identity() ? " (identity)" : "") + "\n";
                text += "reference:  mu=" + json(ref.first.v).dump() + " sgn=" + to_json(ref.second).dump() + "\n";
                text += "rho:        " + permutation_to_json(rho).dump() + "\n";
                text += "domain T_R: " + inequalities_text(tr) + "\n";
                out.write(text);
            }
        } else if (c_classify->parsed()) {
            if (k < 1 || k > kCombinatoricsCap) throw std::runtime_error("k out of range (1..6)");
            out.write(classes_to_json(classify(k)).dump(2));
        } else if (c_domains->parsed()) {
            auto [mu, sgn] = pair_from_json(read_input_json(in_path));
            auto [ue, sigma] = reduce_to_upper_echelon(mu);
            (void)sigma;
            DomainPoset td = upper_echelon_domain(ue);
            SignedTriple tamed = reduce_to_tamed(mu, sgn);
            auto [ref, rho] = to_reference(tamed.mu, tamed.sgn);
            (void)rho;
            DomainPoset tr = reference_domain(ref.first, ref.second);
            json rep{{"echelon_domain", domain_to_json(td)},
                     {"reference_domain", domain_to_json(tr)},
                     {"iterated_limits_exact", limits_to_json(iterated_limits(tr, mu.k + 1, true))},
                     {"iterated_limits_enlarged", limits_to_json(iterated_limits(tr, mu.k + 1, false))}};
            if (format == "json") {
                out.write(rep.dump(2));
            } else {
                out.write("T_D: " + inequalities_text(td) + "\nT_R: " + inequalities_text(tr) + "\n");
            }
        } else if (c_dtree->parsed()) {
            auto [mu, sgn] = pair_from_json(read_input_json(in_path));
            if (!is_reference(mu, sgn)) throw std::runtime_error("input is not a reference pair; run reduce first");
            DTree d = build_dtree(mu, sgn);
            if (format == "dot") {
                out.write(dtree_to_dot(d));
            } else {
                json rep = dtree_to_json(d);
                CouplingMarking cm = mark_couplings(d);
                rep["unclogged"] = cm.unclogged;
                rep["contracts_rough"] = cm.contracts_rough;
                out.write(rep.dump(2));
            }
        } else if (c_render->parsed()) {
            auto [mu, sgn] = pair_from_json(read_input_json(in_path));
            out.write(tree_to_dot(mu, sgn));
        } else if (c_verify->parsed()) {
            VerifyContext ctx;
            ctx.k = k;
            ctx.lattice_n = lattice_n;
            ctx.grid = grid;
            ctx.seed = seed;
            ctx.fail_fast = fail_fast;
            if (tol > 0.0) {
                ctx.tol_identity = tol;
                ctx.tol_quadrature = tol;
            }
            if (k > kCombinatoricsCap) throw std::runtime_error("k out of range (1..6)");
            bool keep = true;
            if (keep && (suite == "partition" || suite == "all")) keep = run_partition_suite(ctx);
            if (keep && (suite == "identities" || suite == "all")) keep = run_identities_suite(ctx);
            if (keep && (suite == "factorization" || suite == "all")) keep = run_factorization_suite(ctx);
            if (keep && (suite == "quadrature" || suite == "all")) keep = run_quadrature_suite(ctx);
            if (suite != "partition" && suite != "identities" && suite != "factorization" &&
                suite != "quadrature" && suite != "all")
                throw std::runtime_error("unknown suite: " + suite);
            json rep{{"suite", suite}, {"pass", ctx.all_pass}, {"checks", ctx.checks}};
            out.write(rep.dump(2));
            return ctx.all_pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
