// Command-line front end: model generation, sampling, moment estimation,
// identification, metrics, conditioning diagnostics and adversarial instance
// construction. Every subcommand echoes its resolved configuration as a
// '# config' line so runs are reproducible from logs alone.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mixprod/mixprod.hpp"

namespace {

using mixprod::json;

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

void echo_config(const std::string& cmd, const json& cfg) {
    json j = cfg;
    j["command"] = cmd;
    j["threads"] = mixprod::thread_count();
    std::cout << "# config " << j.dump() << "\n";
}

// "S;T;anchor" with comma-separated indices, e.g. "1,2;3,4;0". Empty S and T
// are allowed (";;0") for the single-component case.
mixprod::SubsetPartition parse_subset(const std::string& text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ';') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    parts.push_back(cur);
    if (parts.size() != 3)
        throw CLI::ValidationError("--subset", "expected \"S;T;anchor\" with two semicolons");
    auto parse_list = [](const std::string& s) {
        std::vector<int> out;
        std::string tok;
        std::istringstream is(s);
        while (std::getline(is, tok, ',')) {
            if (tok.empty()) continue;
            std::size_t used = 0;
            int v = std::stoi(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        }
        return out;
    };
    mixprod::SubsetPartition p;
    try {
        p.S = parse_list(parts[0]);
        p.T = parse_list(parts[1]);
        std::size_t used = 0;
        p.anchor = std::stoi(parts[2], &used);
        if (used != parts[2].size()) throw std::invalid_argument(parts[2]);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--subset", "indices must be integers");
    }
    return p;
}

std::vector<std::int64_t> parse_int_list(const std::string& text, const char* flag) {
    std::vector<std::int64_t> out;
    std::string tok;
    std::istringstream is(text);
    while (std::getline(is, tok, ',')) {
        if (tok.empty()) continue;
        try {
            out.push_back(std::stoll(tok));
        } catch (const std::exception&) {
            throw CLI::ValidationError(flag, "expected a comma-separated integer list");
        }
    }
    if (out.empty()) throw CLI::ValidationError(flag, "list must not be empty");
    return out;
}

mixprod::SubsetPartition canonical_partition(int k, int n) {
    if (n < 2 * k - 1)
        throw mixprod::PreconditionFailed("need n >= 2k-1 observables for the canonical partition");
    mixprod::SubsetPartition p;
    p.anchor = 0;
    for (int i = 1; i < k; ++i) p.S.push_back(i);
    for (int i = k; i < 2 * k - 1; ++i) p.T.push_back(i);
    return p;
}

struct IdentifyFlags {
    mixprod::IdentifyOptions opts;
    void attach(CLI::App* cmd) {
        cmd->add_option("--rank-tol", opts.rank_tol,
                        "rank cutoff, relative to sigma_1 of the pair matrix");
        cmd->add_option("--sep-tol", opts.sep_tol,
                        "eigenvalue pairing cutoff, relative to the spectrum spread");
        cmd->add_option("--row0-tol", opts.row0_tol, "empty-set row normalization cutoff");
        cmd->add_option("--pi-tol", opts.pi_tol, "smallest recovered weight divisible by");
        cmd->add_option("--imag-tol", opts.imag_tol,
                        "imaginary residual tolerance, relative to the pencil norm");
        cmd->add_flag("--project-simplex", opts.project_simplex,
                      "clamp negative recovered weights and renormalize");
        cmd->add_option("--min-subset-size", opts.min_subset_size,
                        "search: smallest |S|=|T| tried (-1: ceil(log2 k))");
        cmd->add_option("--max-candidates", opts.max_candidates,
                        "search: candidate partition limit");
    }
    json config() const {
        return json{{"rank_tol", opts.rank_tol},       {"sep_tol", opts.sep_tol},
                    {"row0_tol", opts.row0_tol},       {"pi_tol", opts.pi_tol},
                    {"imag_tol", opts.imag_tol},       {"project_simplex", opts.project_simplex},
                    {"min_subset_size", opts.min_subset_size},
                    {"max_candidates", opts.max_candidates}};
    }
};

int run_generate(int k, int n, double zeta, double pi_min, std::uint64_t seed,
                 const std::string& out) {
    echo_config("generate", {{"k", k},
                             {"n", n},
                             {"zeta", zeta},
                             {"pi_min", pi_min},
                             {"seed", seed},
                             {"out", out}});
    mixprod::MixtureModel model = mixprod::random_model(k, n, zeta, pi_min, seed);
    mixprod::save_model(model, out);
    std::cout << "wrote model k=" << k << " n=" << n << " -> " << out << "\n";
    return 0;
}

int run_sample(const std::string& model_path, std::int64_t n_samples, std::uint64_t seed,
               const std::string& out) {
    echo_config("sample", {{"model", model_path},
                           {"n_samples", n_samples},
                           {"seed", seed},
                           {"out", out}});
    mixprod::MixtureModel model = mixprod::load_model(model_path);
    mixprod::SampleBatch batch = mixprod::draw_samples(model, n_samples, seed);
    mixprod::save_samples(batch, out);
    std::cout << "wrote " << n_samples << " samples -> " << out << "\n";
    return 0;
}

int run_moments(const std::string& model_path, bool exact, const std::string& samples_path,
                const std::string& out) {
    echo_config("moments", {{"model", model_path},
                            {"exact", exact},
                            {"samples", samples_path},
                            {"out", out}});
    mixprod::MomentVector mu;
    if (exact) {
        mu = mixprod::exact_moments(mixprod::load_model(model_path));
    } else {
        mixprod::SampleBatch batch = mixprod::load_samples(samples_path);
        mu = mixprod::empirical_moments(batch.data);
    }
    mixprod::save_moments(mu, out);
    std::cout << "wrote 2^" << mu.n << " moments -> " << out << "\n";
    return 0;
}

int run_identify(const std::string& moments_path, int k, const std::string& subset,
                 bool search, const IdentifyFlags& flags, const std::string& out) {
    json cfg = flags.config();
    cfg["moments"] = moments_path;
    cfg["k"] = k;
    cfg["subset"] = subset;
    cfg["search"] = search;
    cfg["out"] = out;
    echo_config("identify", cfg);
    mixprod::MomentVector mu = mixprod::load_moments(moments_path);
    mixprod::IdentificationResult res =
        search ? mixprod::identify_search(mu, k, flags.opts)
               : mixprod::identify(mu, k, parse_subset(subset), flags.opts);
    const long used = res.m_tilde.rows();
    // The written file always covers all n observables so it composes with
    // compare and downstream model consumers; rows outside the partition are
    // solved from the recovered factors.
    res.m_tilde = mixprod::extend_to_all_observables(res, mu, flags.opts);
    mixprod::save_result(res, out);
    std::cout << "identified k=" << k << " on subset size " << used << ", fit residual "
              << fmt(res.diagnostics.fit_residual) << " -> " << out << "\n";
    return 0;
}

int run_compare(const std::string& a_path, const std::string& b_path) {
    echo_config("compare", {{"a", a_path}, {"b", b_path}});
    mixprod::MixtureModel a = mixprod::load_model(a_path, false);
    mixprod::MixtureModel b = mixprod::load_model(b_path, false);
    std::cout << "d_model " << fmt(mixprod::model_distance(a, b)) << "\n";
    return 0;
}

int run_statdist(const std::string& a_path, const std::string& b_path) {
    echo_config("statdist", {{"a", a_path}, {"b", b_path}});
    mixprod::MomentVector a = mixprod::load_moments(a_path);
    mixprod::MomentVector b = mixprod::load_moments(b_path);
    std::cout << "d_stat " << fmt(mixprod::stat_distance(a, b)) << "\n";
    return 0;
}

int run_adversarial(int k, double eps, const std::string& out) {
    echo_config("adversarial", {{"k", k}, {"eps", eps}, {"out", out}});
    mixprod::AdversarialPair pair = mixprod::lower_bound_instance(k, eps);
    mixprod::save_pair(pair, out);
    std::cout << "sigma " << fmt(pair.sigma) << " model_gap " << fmt(pair.certified_model_gap)
              << " stat_gap " << fmt(pair.certified_stat_gap) << " -> " << out << "\n";
    return 0;
}

int run_diag(const std::string& model_path, double zeta, double pi_min) {
    echo_config("diag", {{"model", model_path}, {"zeta", zeta}, {"pi_min", pi_min}});
    mixprod::MixtureModel model = mixprod::load_model(model_path);
    const int k = model.k;
    const int n = model.n;

    mixprod::MembershipReport rep = mixprod::validate_membership(model, {zeta, pi_min});
    if (!rep) std::cout << "warning: model outside class: " << rep.first_violation << "\n";
    if (rep.zeta_above_generic_cap)
        std::cout << "warning: zeta > 1/(k-1), class is empty for means in [0, 1]\n";

    double sbar = mixprod::sigma_k_lower_bound(k, zeta);
    double cbound = mixprod::sigma_k_cst_lower_bound(k, zeta, pi_min);
    std::cout << "sigma_bar " << fmt(sbar) << "\n";
    std::cout << "pair_matrix_bound " << fmt(cbound) << "\n";

    bool certified = true;
    // The closed-form bound is strict for k >= 2; the k = 1 bound is
    // attained exactly.
    auto meets = [&](double measured, double bound) {
        return k >= 2 ? measured > bound : measured >= bound;
    };

    if (k <= 12) {
        std::cout << "kruskal_rank_m " << mixprod::kruskal_rank(model.m) << "\n";
        if (n <= 12 && n >= 0) {
            mixprod::HadamardExtension H = mixprod::hadamard_extension(model.m);
            std::cout << "kruskal_rank_H " << mixprod::kruskal_rank(H.data) << "\n";
        }
    }

    if (n >= k - 1) {
        double worst = std::numeric_limits<double>::infinity();
        std::vector<int> worst_S;
        std::vector<int> pick(std::max(k - 1, 0));
        for (int i = 0; i < k - 1; ++i) pick[i] = i;
        std::uint64_t printed = 0;
        for (;;) {
            mixprod::Matrix sub(std::max(k - 1, 0), k);
            for (int i = 0; i < k - 1; ++i) sub.row(i) = model.m.row(pick[i]);
            mixprod::HadamardExtension H = mixprod::hadamard_extension(sub);
            double sk = mixprod::sigma_k(H.data, k);
            if (sk < worst) {
                worst = sk;
                worst_S = pick;
            }
            if (printed < 512) {
                std::cout << "subset";
                for (int i : pick) std::cout << " " << i;
                std::cout << " sigma_k_H " << fmt(sk) << "\n";
                ++printed;
            }
            if (k - 1 == 0) break;
            int pos = k - 2;
            while (pos >= 0 && pick[pos] == n - (k - 1) + pos) --pos;
            if (pos < 0) break;
            ++pick[pos];
            for (int i = pos + 1; i < k - 1; ++i) pick[i] = pick[i - 1] + 1;
        }
        std::cout << "min_sigma_k_H " << fmt(worst) << (meets(worst, sbar) ? " ok" : " BELOW-BOUND")
                  << "\n";
        certified = certified && meets(worst, sbar);
    }

    if (n >= 2 * k - 1) {
        mixprod::SubsetPartition p = canonical_partition(k, n);
        mixprod::MomentVector mu = mixprod::exact_moments(model);
        mixprod::PairMatrices pm = mixprod::assemble_pair_matrices(mu, p);
        double sk = mixprod::sigma_k(pm.C, k);
        bool ok = meets(sk, cbound);
        std::cout << "sigma_k_C " << fmt(sk) << (ok ? " ok" : " BELOW-BOUND") << "\n";
        certified = certified && ok;
    }

    std::cout << (certified ? "certified" : "not-certified") << "\n";
    return certified ? 0 : 1;
}

int run_eval(int k, double zeta, double pi_min, const std::string& n_list, int seeds,
             std::uint64_t seed, const std::string& out) {
    echo_config("eval", {{"k", k},
                         {"zeta", zeta},
                         {"pi_min", pi_min},
                         {"N", n_list},
                         {"seeds", seeds},
                         {"seed", seed},
                         {"out", out}});
    if (seeds < 1) throw mixprod::PreconditionFailed("eval: need seeds >= 1");
    std::vector<std::int64_t> Ns = parse_int_list(n_list, "--N");
    const int n = 2 * k - 1;
    mixprod::MixtureModel model = mixprod::random_model(k, n, zeta, pi_min, seed);
    mixprod::MomentVector mu_exact = mixprod::exact_moments(model);
    mixprod::SubsetPartition part = canonical_partition(k, n);

    std::ostringstream csv;
    csv << "N,seed,d_stat,d_model,fit_residual,runtime_ms\n";
    for (std::int64_t N : Ns) {
        if (N < 1) throw mixprod::PreconditionFailed("eval: sample sizes must be >= 1");
        for (int r = 0; r < seeds; ++r) {
            std::uint64_t sample_seed =
                mixprod::Rng::substream(seed, (static_cast<std::uint64_t>(N) << 16) ^
                                                  static_cast<std::uint64_t>(r))
                    .next();
            mixprod::SampleBatch batch = mixprod::draw_samples(model, N, sample_seed);
            mixprod::MomentVector mu = mixprod::empirical_moments(batch.data);
            double d_stat = mixprod::stat_distance(mu, mu_exact);
            double d_model = std::numeric_limits<double>::quiet_NaN();
            double fit = std::numeric_limits<double>::quiet_NaN();
            auto t0 = std::chrono::steady_clock::now();
            try {
                mixprod::IdentificationResult res = mixprod::identify(mu, k, part);
                mixprod::MixtureModel rec;
                rec.k = k;
                rec.n = n;
                rec.pi = res.pi_tilde;
                rec.m = res.m_tilde;
                d_model = mixprod::model_distance(model, rec);
                fit = res.diagnostics.fit_residual;
            } catch (const mixprod::Error&) {
                // recorded as nan
            }
            auto t1 = std::chrono::steady_clock::now();
            double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            csv << N << "," << r << "," << fmt(d_stat) << "," << fmt(d_model) << ","
                << fmt(fit) << "," << fmt(ms) << "\n";
        }
    }
    mixprod::detail::write_text(out, csv.str());
    std::cout << "wrote " << Ns.size() * static_cast<std::size_t>(seeds) << " rows -> " << out
              << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"mixture-of-product-distributions identification toolkit"};
    app.require_subcommand(1);

    // generate
    int g_k = 2, g_n = 3;
    double g_zeta = 0.2, g_pi_min = 0.1;
    std::uint64_t g_seed = 0;
    std::string g_out;
    CLI::App* generate = app.add_subcommand("generate", "draw a separated model");
    generate->add_option("--k", g_k, "components")->required();
    generate->add_option("--n", g_n, "observables")->required();
    generate->add_option("--zeta", g_zeta, "row separation");
    generate->add_option("--pi-min", g_pi_min, "smallest mixing weight");
    generate->add_option("--seed", g_seed, "rng seed");
    generate->add_option("--out", g_out, "model JSON path")->required();

    // sample
    std::string s_model, s_out;
    std::int64_t s_N = 0;
    std::uint64_t s_seed = 0;
    CLI::App* sample = app.add_subcommand("sample", "draw samples from a model");
    sample->add_option("--model", s_model, "model JSON path")->required();
    sample->add_option("--n-samples", s_N, "sample count")->required();
    sample->add_option("--seed", s_seed, "rng seed");
    sample->add_option("--out", s_out, "samples text path")->required();

    // moments
    std::string m_model, m_samples, m_out;
    bool m_exact = false;
    CLI::App* moments = app.add_subcommand("moments", "exact or estimated moments");
    moments->add_option("--model", m_model, "model JSON path (with --exact)");
    moments->add_flag("--exact", m_exact, "compute exact moments of --model");
    moments->add_option("--samples", m_samples, "samples text path");
    moments->add_option("--out", m_out, "moments JSON path")->required();

    // identify
    std::string i_moments, i_subset, i_out;
    int i_k = 0;
    bool i_search = false;
    IdentifyFlags i_flags;
    CLI::App* identify = app.add_subcommand("identify", "recover parameters from moments");
    identify->add_option("--moments", i_moments, "moments JSON path")->required();
    identify->add_option("--k", i_k, "components")->required();
    identify->add_option("--subset", i_subset, "partition \"S;T;anchor\", e.g. \"1,2;3,4;0\"");
    identify->add_flag("--search", i_search, "exhaustive partition search");
    identify->add_option("--out", i_out, "result JSON path")->required();
    i_flags.attach(identify);

    // compare
    std::string c_a, c_b;
    CLI::App* compare = app.add_subcommand("compare", "parameter distance of two models");
    compare->add_option("--a", c_a, "model JSON path")->required();
    compare->add_option("--b", c_b, "model JSON path")->required();

    // statdist
    std::string d_a, d_b;
    CLI::App* statdist = app.add_subcommand("statdist", "max moment gap of two moment files");
    statdist->add_option("--a", d_a, "moments JSON path")->required();
    statdist->add_option("--b", d_b, "moments JSON path")->required();

    // adversarial
    int a_k = 2;
    double a_eps = 0.0;
    std::string a_out;
    CLI::App* adversarial = app.add_subcommand("adversarial", "confusable pair construction");
    adversarial->add_option("--k", a_k, "components");
    adversarial->add_option("--eps", a_eps, "parameter gap (0: half the admissible cap)");
    adversarial->add_option("--out", a_out, "pair JSON path")->required();

    // diag
    std::string dg_model;
    double dg_zeta = 0.0, dg_pi_min = 0.0;
    CLI::App* diag = app.add_subcommand("diag", "conditioning certificates for a model");
    diag->add_option("--model", dg_model, "model JSON path")->required();
    diag->add_option("--zeta", dg_zeta, "row separation to certify against")->required();
    diag->add_option("--pi-min", dg_pi_min, "smallest weight to certify against")->required();

    // eval
    int e_k = 2, e_seeds = 1;
    double e_zeta = 0.2, e_pi_min = 0.1;
    std::string e_N, e_out;
    std::uint64_t e_seed = 0;
    CLI::App* eval = app.add_subcommand("eval", "sampling-accuracy sweep to CSV");
    eval->add_option("--k", e_k, "components")->required();
    eval->add_option("--zeta", e_zeta, "row separation");
    eval->add_option("--pi-min", e_pi_min, "smallest mixing weight");
    eval->add_option("--N", e_N, "comma-separated sample sizes")->required();
    eval->add_option("--seeds", e_seeds, "replicates per sample size")->required();
    eval->add_option("--seed", e_seed, "base rng seed");
    eval->add_option("--out", e_out, "CSV path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (generate->parsed())
            return run_generate(g_k, g_n, g_zeta, g_pi_min, g_seed, g_out);
        if (sample->parsed()) return run_sample(s_model, s_N, s_seed, s_out);
        if (moments->parsed()) {
            if (m_exact == !m_samples.empty()) {
                std::cerr << "error: pass exactly one of --exact (with --model) or --samples\n";
                return 2;
            }
            if (m_exact && m_model.empty()) {
                std::cerr << "error: --exact requires --model\n";
                return 2;
            }
            return run_moments(m_model, m_exact, m_samples, m_out);
        }
        if (identify->parsed()) {
            if (i_search == !i_subset.empty()) {
                std::cerr << "error: pass exactly one of --subset or --search\n";
                return 2;
            }
            return run_identify(i_moments, i_k, i_subset, i_search, i_flags, i_out);
        }
        if (compare->parsed()) return run_compare(c_a, c_b);
        if (statdist->parsed()) return run_statdist(d_a, d_b);
        if (adversarial->parsed()) return run_adversarial(a_k, a_eps, a_out);
        if (diag->parsed()) return run_diag(dg_model, dg_zeta, dg_pi_min);
        if (eval->parsed()) return run_eval(e_k, e_zeta, e_pi_min, e_N, e_seeds, e_seed, e_out);
    } catch (const mixprod::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
