#include "kscert/cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"

#include "kscert/scenario_io.hpp"

namespace kscert {

namespace {

struct GlobalOpts {
    std::string output = "table";
    double tolerance = 1e-9;
    std::size_t budget = kDefaultBudget;
    bool budget_set = false;
    int jobs = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

ScenarioDocument load_scenario(const std::string& path) {
    return scenario_from_json(parse_json_text(read_file(path)));
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) parts.push_back(item);
    return parts;
}

EpsilonMethod method_from_name(const std::string& name) {
    if (name == "auto") return EpsilonMethod::automatic;
    if (name == "dp") return EpsilonMethod::dp;
    if (name == "brute") return EpsilonMethod::brute;
    throw ValidationError("unknown method '" + name + "' (expected auto, dp or brute)");
}

// ---- certify ------------------------------------------------------------

template <class S>
int do_certify(ScenarioSpec<S> spec, const GlobalOpts& g, std::ostream& out) {
    if (g.budget_set) spec.budget = g.budget;
    Certificate cert = certify(spec, g.tolerance, ExecPolicy{g.jobs});
    if (g.output == "json")
        out << dump_json(certificate_to_json(cert));
    else
        out << render_certificate_table(cert);
    return cert.verdict == Verdict::pass ? 0 : 1;
}

// ---- epsilon-star ---------------------------------------------------------

template <class S>
void render_comparison_table(const ComparisonReport<S>& rep, const Alphabet& alphabet,
                             std::ostream& out) {
    out << "depth: " << rep.depth << "\n";
    if (rep.infinite) {
        out << "c_star: inf (support violation)\n";
        out << "witness: " << render_word(*rep.witness_infinite, alphabet) << "\n";
    } else {
        out << "c_star: " << format_float15(to_double(rep.c_star));
        if constexpr (is_exact_scalar_v<S>) out << " (= " << to_fraction_string(rep.c_star) << ")";
        out << "\n";
    }
    out << "ratio_max: " << format_float15(to_double(rep.ratio_max));
    if constexpr (is_exact_scalar_v<S>) out << " (= " << to_fraction_string(rep.ratio_max) << ")";
    out << "   witness: " << render_word(rep.witness_max, alphabet) << "\n";
    out << "ratio_min: " << format_float15(to_double(rep.ratio_min));
    if constexpr (is_exact_scalar_v<S>) out << " (= " << to_fraction_string(rep.ratio_min) << ")";
    out << "   witness: " << render_word(rep.witness_min, alphabet) << "\n";
}

template <class S>
int do_epsilon_star(ScenarioSpec<S> spec, std::size_t stage_index,
                    std::optional<std::size_t> depth_override, EpsilonMethod method,
                    const GlobalOpts& g, std::ostream& out) {
    if (g.budget_set) spec.budget = g.budget;
    if (stage_index < 1 || stage_index > spec.stages.size())
        throw ValidationError("stage index " + std::to_string(stage_index) +
                              " out of range 1.." + std::to_string(spec.stages.size()));
    const auto& stage = spec.stages[stage_index - 1];
    const std::size_t depth = depth_override ? *depth_override : stage.r;
    auto rep = epsilon_star(spec.mu0, stage.mun, depth, method, spec.budget,
                            ExecPolicy{g.jobs});
    if (g.output == "json")
        out << dump_json(comparison_to_json(rep, spec.mu0.alphabet()));
    else
        render_comparison_table(rep, spec.mu0.alphabet(), out);
    return 0;
}

// ---- entropy --------------------------------------------------------------

template <class S>
int do_entropy(ScenarioSpec<S> spec, const std::string& which, std::size_t max_depth,
               const GlobalOpts& g, std::ostream& out) {
    if (g.budget_set) spec.budget = g.budget;
    const Measure<S>* mu = nullptr;
    std::string name = which;
    if (which == "mu0") {
        mu = &spec.mu0;
    } else {
        std::size_t idx = 0;
        try {
            idx = static_cast<std::size_t>(std::stoul(which));
        } catch (...) {
            throw ValidationError("--measure expects 'mu0' or a stage index");
        }
        if (idx < 1 || idx > spec.stages.size())
            throw ValidationError("stage index " + std::to_string(idx) + " out of range 1.." +
                                  std::to_string(spec.stages.size()));
        mu = &spec.stages[idx - 1].mun;
        name = "mun[" + std::to_string(idx) + "]";
    }
    EntropyReport report = entropy_rate_profile(*mu, max_depth, spec.budget, ExecPolicy{g.jobs});
    if (g.output == "json") {
        out << dump_json(entropy_report_to_json(report, name));
        return 0;
    }
    out << "measure: " << name << "\n";
    out << "r  H_r  H_r/r  H_{r+1}-H_r\n";
    for (std::size_t r = 1; r <= report.block_entropies.size(); ++r) {
        out << r << "  " << format_float15(report.block_entropies[r - 1]) << "  "
            << format_float15(report.averages[r - 1]);
        if (r < report.block_entropies.size())
            out << "  " << format_float15(report.increments[r - 1]);
        out << "\n";
    }
    if (report.ks_exact)
        out << "ks_exact: " << format_float15(*report.ks_exact) << "\n";
    else
        out << "ks_exact: unavailable\n";
    return 0;
}

// ---- remark-grid ------------------------------------------------------------

template <class S>
int do_remark_grid(ScenarioSpec<S> spec, const std::vector<std::size_t>& m_values,
                   std::size_t depth, const GlobalOpts& g, std::ostream& out) {
    if (g.budget_set) spec.budget = g.budget;
    RemarkGrid grid = remark_grid(spec, m_values, depth, ExecPolicy{g.jobs});
    if (g.output == "json") {
        out << dump_json(remark_grid_to_json(grid));
        return 0;
    }
    out << "(1/r) H_r of coarsened stage measures, r = " << grid.block_len << "\n";
    out << "stage";
    for (std::size_t m : grid.m_values) out << "  m=" << m;
    out << "\n";
    for (std::size_t i = 0; i < grid.values.size(); ++i) {
        out << grid.stage_indices[i];
        for (double v : grid.values[i]) out << "  " << format_float15(v);
        out << "\n";
    }
    return 0;
}

// ---- lemma1-check ------------------------------------------------------------

int do_lemma1(const std::string& p_text, const std::string& q_text, const GlobalOpts& g,
              std::ostream& out) {
    auto parse_vector = [](const std::string& text, const std::string& name) {
        std::vector<double> v;
        for (const auto& part : split_list(text)) v.push_back(to_double(rational_from_text(part)));
        if (v.empty()) throw ValidationError(name + " is empty");
        return ProbVector<double>(std::move(v));
    };
    auto p = parse_vector(p_text, "--p");
    auto q = parse_vector(q_text, "--q");
    Lemma1Verdict v = check_lemma1(p, q, g.tolerance);
    if (g.output == "json") {
        out << dump_json(lemma1_to_json(v));
    } else {
        if (v.c_infinite)
            out << "c_star: inf (support violation)\n";
        else
            out << "c_star: " << format_float15(v.c_star) << "\n";
        out << "applicable: " << (v.applicable ? "yes (c_star < 1/3)" : "no (c_star >= 1/3)")
            << "\n";
        if (v.applicable) {
            out << "H(p) = " << format_float15(v.entropy_p)
                << "  <=  (1+c)H(q) + c ln3 = " << format_float15(v.bound) << "\n";
            out << "holds: " << (v.holds ? "yes" : "NO")
                << "   slack: " << format_float15(v.slack) << "\n";
        }
    }
    return v.applicable && !v.holds ? 1 : 0;
}

// ---- generate ------------------------------------------------------------

template <class S>
Measure<S> base_measure_from_file(const std::string& path) {
    Json j = parse_json_text(read_file(path));
    if (j.is_object() && j.contains("mu0"))
        return measure_from_json<S>(j.at("mu0"), "base.mu0");
    return measure_from_json<S>(j, "base");
}

template <class S>
int do_generate(const std::string& base_path, const std::string& q_path, std::size_t stages,
                const std::string& t0_text, std::size_t r0, std::optional<double> margin,
                std::optional<double> target, const std::string& mode, const GlobalOpts& g,
                const std::string& out_path, std::ostream& out) {
    Measure<S> base = base_measure_from_file<S>(base_path);
    if (base.kind() == MeasureKind::bernoulli) base = base.as_markov();
    if (base.kind() != MeasureKind::markov)
        throw ValidationError("generate needs a Bernoulli or Markov base measure");

    const std::size_t k = base.alphabet_size();
    Matrix<S> Q;
    if (q_path.empty()) {
        // uniform direction
        S u;
        if constexpr (is_exact_scalar_v<S>)
            u = Rational(1, static_cast<long>(k));
        else
            u = 1.0 / static_cast<double>(k);
        Q.assign(k, std::vector<S>(k, u));
    } else {
        Json qj = parse_json_text(read_file(q_path));
        if (!qj.is_array()) throw ValidationError("direction file must contain a matrix");
        for (std::size_t i = 0; i < qj.size(); ++i) {
            std::vector<S> row;
            for (std::size_t c = 0; c < qj[i].size(); ++c)
                row.push_back(scalar_from_json<S>(qj[i][c], "Q[" + std::to_string(i) + "][" +
                                                                std::to_string(c) + "]"));
            Q.push_back(std::move(row));
        }
    }

    S t0;
    if constexpr (is_exact_scalar_v<S>)
        t0 = rational_from_text(t0_text);
    else
        t0 = to_double(rational_from_text(t0_text));

    auto family = geometric_family(std::move(base), std::move(Q), t0, r0, stages);
    EpsPolicy policy;
    policy.margin = margin;
    ScenarioSpec<S> spec =
        build_scenario(family, stages, policy, g.budget, ExecPolicy{g.jobs}, target);
    std::string text = dump_json(scenario_to_json(spec, mode));
    if (out_path.empty()) {
        out << text;
    } else {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw ValidationError("cannot write file '" + out_path + "'");
        f << text;
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"finite-stage certification of entropy lower bounds for shift measures"};
    app.fallthrough();
    GlobalOpts g;
    app.add_option("--output", g.output, "report format")
        ->check(CLI::IsMember({"table", "json"}))
        ->capture_default_str();
    app.add_option("--tolerance", g.tolerance, "absolute tolerance on entropy comparisons (nats)")
        ->capture_default_str();
    auto* budget_opt =
        app.add_option("--budget", g.budget, "max enumerated cylinder words per operation");
    app.add_option("--jobs", g.jobs, "worker threads (0 = all); never changes any output");

    auto* c_cert = app.add_subcommand("certify", "verify a scenario and emit the certificate");
    std::string cert_file;
    c_cert->add_option("file", cert_file, "scenario file")->required();

    auto* c_eps = app.add_subcommand("epsilon-star", "minimal closeness constant for one stage");
    std::string eps_file;
    std::size_t eps_stage = 1;
    std::optional<std::size_t> eps_depth;
    std::string eps_method = "auto";
    c_eps->add_option("file", eps_file, "scenario file")->required();
    c_eps->add_option("--stage", eps_stage, "1-based stage index")->required();
    c_eps->add_option("--depth", eps_depth, "override the stage depth r");
    c_eps->add_option("--method", eps_method, "auto | dp | brute")
        ->check(CLI::IsMember({"auto", "dp", "brute"}));

    auto* c_ent = app.add_subcommand("entropy", "block-entropy profile of a scenario measure");
    std::string ent_file;
    std::string ent_measure = "mu0";
    std::size_t ent_depth = 0;
    c_ent->add_option("file", ent_file, "scenario file")->required();
    c_ent->add_option("--measure", ent_measure, "mu0 or a stage index");
    c_ent->add_option("--max-depth", ent_depth, "largest block length R")->required();

    auto* c_lem = app.add_subcommand("lemma1-check", "entropy comparison bound for two vectors");
    std::string lem_p, lem_q;
    c_lem->add_option("--p", lem_p, "comma-separated probabilities")->required();
    c_lem->add_option("--q", lem_q, "comma-separated probabilities")->required();

    auto* c_rem = app.add_subcommand("remark-grid", "coarsened entropy-rate grid over stages");
    std::string rem_file;
    std::string rem_m;
    std::size_t rem_depth = 6;
    c_rem->add_option("file", rem_file, "scenario file")->required();
    c_rem->add_option("--m", rem_m, "comma-separated coarse atom counts")->required();
    c_rem->add_option("--depth", rem_depth, "block length r")->capture_default_str();

    auto* c_gen = app.add_subcommand("generate", "emit a perturbation-family scenario file");
    std::string gen_base, gen_q, gen_t0 = "1/10", gen_mode = "rational", gen_out;
    std::size_t gen_stages = 0, gen_r0 = 1;
    std::optional<double> gen_margin, gen_target;
    c_gen->add_option("--base", gen_base, "file with the base measure (or a scenario file)")
        ->required();
    c_gen->add_option("--stages", gen_stages, "number of stages")->required();
    c_gen->add_option("--q", gen_q, "file with the direction matrix (default: uniform)");
    c_gen->add_option("--t0", gen_t0, "initial perturbation size (halves per stage)")
        ->capture_default_str();
    c_gen->add_option("--r0", gen_r0, "initial depth (grows by one per stage)")
        ->capture_default_str();
    c_gen->add_option("--eps-margin", gen_margin, "declare eps = eps* (1 + margin)");
    c_gen->add_option("--target-h", gen_target, "override the target bound (default: closed form)");
    c_gen->add_option("--mode", gen_mode, "rational | float")
        ->check(CLI::IsMember({"rational", "float"}))
        ->capture_default_str();
    c_gen->add_option("--out", gen_out, "write to file instead of stdout");

    app.require_subcommand(1);

    std::vector<std::string> argv = args;
    try {
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "invalid arguments: " << e.what() << "\n";
        return 2;
    }
    g.budget_set = budget_opt->count() > 0;

    try {
        if (*c_cert) {
            auto doc = load_scenario(cert_file);
            return std::visit([&](auto spec) { return do_certify(std::move(spec), g, out); },
                              std::move(doc.spec));
        }
        if (*c_eps) {
            auto doc = load_scenario(eps_file);
            EpsilonMethod method = method_from_name(eps_method);
            return std::visit(
                [&](auto spec) {
                    return do_epsilon_star(std::move(spec), eps_stage, eps_depth, method, g, out);
                },
                std::move(doc.spec));
        }
        if (*c_ent) {
            auto doc = load_scenario(ent_file);
            return std::visit(
                [&](auto spec) {
                    return do_entropy(std::move(spec), ent_measure, ent_depth, g, out);
                },
                std::move(doc.spec));
        }
        if (*c_lem) return do_lemma1(lem_p, lem_q, g, out);
        if (*c_rem) {
            auto doc = load_scenario(rem_file);
            std::vector<std::size_t> m_values;
            for (const auto& part : split_list(rem_m)) {
                try {
                    m_values.push_back(static_cast<std::size_t>(std::stoul(part)));
                } catch (...) {
                    throw ValidationError("--m expects comma-separated integers");
                }
            }
            if (m_values.empty()) throw ValidationError("--m expects at least one value");
            return std::visit(
                [&](auto spec) {
                    return do_remark_grid(std::move(spec), m_values, rem_depth, g, out);
                },
                std::move(doc.spec));
        }
        if (*c_gen) {
            if (gen_mode == "rational")
                return do_generate<Rational>(gen_base, gen_q, gen_stages, gen_t0, gen_r0,
                                             gen_margin, gen_target, gen_mode, g, gen_out, out);
            return do_generate<double>(gen_base, gen_q, gen_stages, gen_t0, gen_r0, gen_margin,
                                       gen_target, gen_mode, g, gen_out, out);
        }
    } catch (const ResourceError& e) {
        err << "budget exceeded: " << e.what() << "\n";
        return 3;
    } catch (const ValidationError& e) {
        err << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    err << "no subcommand given\n";
    return 2;
}

}  // namespace kscert
