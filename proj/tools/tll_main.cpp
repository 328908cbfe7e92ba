// Command-line front end: every library stage exposed as a subcommand with
// JSON input/output.  Reports are deterministic (sorted keys, shortest
// round-trip numbers) and embed the active configuration, so identical
// inputs and seeds produce byte-identical bytes.
//
// Exit codes: 0 success, 1 validation failure (structured JSON error on
// stdout), 2 usage error.

#include <CLI11.hpp>
#include <functional>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>

#include "tll/acceptance.hpp"
#include "tll/config.hpp"
#include "tll/contact_s3.hpp"
#include "tll/json_io.hpp"
#include "tll/log_trace.hpp"
#include "tll/phase_kernel.hpp"
#include "tll/projector.hpp"
#include "tll/quadrature.hpp"
#include "tll/rng.hpp"
#include "tll/symplectic.hpp"

namespace {

using tll::Config;
using tll::Json;

constexpr double kPi = 3.14159265358979323846;

// Thrown for problems that are usage errors (exit 2) rather than validation
// failures (exit 1): unknown families, missing files, bad flag combinations.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open input file: " + path);
    try {
        Json j;
        in >> j;
        return j;
    } catch (const nlohmann::json::parse_error& e) {
        // Validation failure: the file exists but does not parse.
        throw std::runtime_error("malformed JSON in " + path + ": " + e.what());
    }
}

// Print the report and, when an output directory is configured, also write
// it as <out_dir>/<kind>.json.
void emit(const std::string& kind, const Json& payload, const Config& cfg) {
    const std::string text = tll::dump_report(kind, payload, cfg);
    std::cout << text;
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream out(std::filesystem::path(cfg.out_dir) / (kind + ".json"));
        if (!out) throw std::runtime_error("cannot write report under " + cfg.out_dir);
        out << text;
    }
}

tll::ContactFormS3 form_from_flags(const std::string& family, int n, double kappa,
                                   const std::string& input) {
    if (!input.empty()) return tll::contact_from_json(read_json_file(input));
    if (family == "standard") return tll::ContactFormS3::standard_form();
    if (family == "standard_opposite") return tll::ContactFormS3::standard_opposite();
    if (family == "lambda_n") return tll::ContactFormS3::twisted(n);
    if (family == "scaled")
        return tll::ContactFormS3::scaled(tll::ContactFormS3::standard_form(), kappa);
    throw UsageError("unknown contact family \"" + family +
                     "\" (use standard, standard_opposite, lambda_n, scaled, or --input)");
}

// --- subcommand bodies -------------------------------------------------------

int run_split(const Config& cfg, const std::string& input, int dim) {
    tll::HamiltonianModel model;
    if (!input.empty()) {
        const Json j = read_json_file(input);
        model = tll::hamiltonian_map(tll::matrix_from_json(j.at("Q")),
                                     tll::matrix_from_json(j.at("omega")).real());
    } else {
        tll::Rng rng(cfg.seed);
        model = tll::random_hamiltonian_model(dim, rng);
    }
    const tll::SpectralSplitting split = tll::spectral_splitting(model.A, model.omega);
    const tll::Signature sig = tll::positivity_signature(split, model.omega);

    Json eigenvalues = Json::array();
    for (int i = 0; i < split.eigenvalues.size(); ++i)
        eigenvalues.push_back(
            Json::array({split.eigenvalues(i).real(), split.eigenvalues(i).imag()}));
    emit("split",
         Json{{"dim", model.A.rows()},
              {"model_residual", model.residual},
              {"eigenvalues", eigenvalues},
              {"lagrangian_residual", split.lagrangian_residual},
              {"duality_min_singular", split.duality_min_singular},
              {"signature",
               Json{{"plus", sig.plus},
                    {"minus", sig.minus},
                    {"margin", sig.min_abs_eigenvalue}}}},
         cfg);
    return 0;
}

int run_expand_kernel(const Config& cfg, const std::string& input, int sphere_n, int n_param) {
    tll::LaurentSymbol symbol;
    int n = n_param;
    if (!input.empty()) {
        const Json j = read_json_file(input);
        symbol = tll::laurent_from_json(j.contains("symbol") ? j.at("symbol") : j);
        if (j.contains("n")) n = j.at("n").get<int>();
    } else if (sphere_n > 0) {
        symbol = tll::sphere_szego_kernel(sphere_n, cfg.jet_order).amplitude;
        n = sphere_n;
    } else {
        throw UsageError("expand-kernel needs --input or --sphere");
    }
    if (n <= 0) throw UsageError("expand-kernel: the dimension parameter --n must be positive");
    emit("expand-kernel", tll::to_json(tll::kernel_expansion(symbol, n)), cfg);
    return 0;
}

int run_fit(const Config& cfg, const std::string& input, int max_pole, int max_taylor,
            int max_log) {
    const Json j = read_json_file(input);
    std::vector<std::pair<double, tll::Complex>> samples;
    for (const auto& row : j.at("samples")) {
        if (row.size() == 2)
            samples.push_back({row[0].get<double>(), tll::Complex(row[1].get<double>(), 0.0)});
        else
            samples.push_back({row[0].get<double>(),
                               tll::Complex(row[1].get<double>(), row[2].get<double>())});
    }
    const tll::EpsilonExpansion fit =
        tll::fit_epsilon_expansion(samples, tll::FitOptions{max_pole, max_taylor, max_log});
    emit("fit-asymptotics", tll::to_json(fit), cfg);
    return 0;
}

int run_compose(const Config& cfg, const std::string& input, int sphere_n) {
    tll::PhaseKernel first, second;
    if (!input.empty()) {
        const Json j = read_json_file(input);
        first = tll::kernel_from_json(j.at("first"));
        second = tll::kernel_from_json(j.at("second"));
    } else if (sphere_n > 0) {
        first = second = tll::sphere_szego_kernel(sphere_n, cfg.jet_order);
    } else {
        throw UsageError("compose needs --input or --sphere");
    }
    const tll::PhaseKernel composed = tll::compose_kernels(first, second, cfg.jet_order);
    Json payload{{"composed", tll::to_json(composed)}};
    if (sphere_n > 0)
        payload["idempotence"] = tll::to_json(tll::idempotence_defect(composed, first));
    emit("compose", payload, cfg);
    return 0;
}

int run_project(const Config& cfg, const std::string& input, int k_max) {
    const Json j = read_json_file(input);
    const tll::Matrix s0 =
        tll::matrix_from_json(j.contains("matrix") ? j.at("matrix") : j);
    const tll::Matrix s = tll::correct_projector(s0, k_max);
    const tll::Matrix oracle = tll::spectral_sign_projector(s0);
    emit("project",
         Json{{"projector", tll::to_json(s)},
              {"defect", (s * s - s).cwiseAbs().maxCoeff()},
              {"oracle_gap", (s - oracle).cwiseAbs().maxCoeff()},
              {"k_max", k_max}},
         cfg);
    return 0;
}

int run_deform_symbols(const Config& cfg, const std::string& input) {
    const Json j = read_json_file(input);
    const Json& g = j.at("grid");
    const tll::SymbolGrid grid{g.at("num_base").get<int>(), g.at("fiber_out").get<int>(),
                               g.at("fiber_in").get<int>()};
    auto factor = [](const Json& rows) {
        std::vector<std::vector<tll::Complex>> out;
        for (const auto& row : rows) {
            std::vector<tll::Complex> r;
            for (const auto& v : row) r.push_back({v[0].get<double>(), v[1].get<double>()});
            out.push_back(std::move(r));
        }
        return out;
    };
    const auto path = tll::deform_idempotent_symbols(
        grid, factor(j.at("f0")), factor(j.at("g0")), factor(j.at("f1")),
        factor(j.at("g1")), j.value("steps", 8));
    double max_defect = 0.0;
    for (const auto& s : path)
        max_defect = std::max(max_defect, tll::symbol_idempotence_defect(s));
    emit("deform-symbols",
         Json{{"steps", path.size()},
              {"max_idempotence_defect", max_defect},
              {"first", tll::to_json(path.front())},
              {"last", tll::to_json(path.back())}},
         cfg);
    return 0;
}

int run_contact_check(const Config& cfg, const tll::ContactFormS3& form) {
    double vmin = 1e300, vmax = -1e300;
    for (int i = 0; i <= 400; ++i) {
        const double v = tll::contact_value(form, (kPi / 2.0) * i / 400.0);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
    }
    Json payload{{"family", tll::contact_descriptor(form)},
                 {"is_contact", tll::is_contact(form)},
                 {"contact_value_min", vmin},
                 {"contact_value_max", vmax}};
    if (vmax - vmin < 1e-9) payload["contact_value"] = 0.5 * (vmin + vmax);
    emit("contact-check", payload, cfg);
    return 0;
}

int run_contact_hopf(const Config& cfg, const tll::ContactFormS3& form, bool grid_given,
                     bool with_oracle) {
    // The twisted profiles need latitude resolution rather than angular
    // resolution; default to the calibrated battery grid.
    const auto q = grid_given ? tll::S3Quadrature::make(cfg.grid_phi, cfg.grid_theta)
                              : tll::S3Quadrature::make(160, 32);
    const tll::HopfMap map = tll::trivialize(form);
    Json payload{{"family", tll::contact_descriptor(form)},
                 {"hopf", tll::to_json(tll::hopf_invariant(map, q))}};
    if (with_oracle) payload["linking_oracle"] = tll::to_json(tll::linking_number_oracle(map, q));
    emit("contact-hopf", payload, cfg);
    return 0;
}

int run_contact_volume(const Config& cfg, const tll::ContactFormS3& form) {
    const auto q = tll::S3Quadrature::make(cfg.grid_phi, cfg.grid_theta);
    emit("contact-volume",
         Json{{"family", tll::contact_descriptor(form)},
              {"volume", tll::volume_integral(form, q)},
              {"total_weight", q.total_weight()}},
         cfg);
    return 0;
}

int run_contact_glue(const Config& cfg, const std::string& first, const std::string& second) {
    const tll::ContactFormS3 f1 = first.empty() ? tll::ContactFormS3::standard_form()
                                                : tll::contact_from_json(read_json_file(first));
    const tll::ContactFormS3 f2 = second.empty() ? tll::ContactFormS3::standard_form()
                                                 : tll::contact_from_json(read_json_file(second));
    const tll::ContactFormS3 glued = tll::glue_forms(f1, f2);
    emit("contact-glue",
         Json{{"glued", tll::contact_descriptor(glued)}, {"is_contact", tll::is_contact(glued)}},
         cfg);
    return 0;
}

Json run_scenario(const Config& cfg, const Json& scenario) {
    const std::string name = scenario.at("scenario").get<std::string>();
    const int grid_phi = scenario.value("grid_phi", 32);
    const int grid_theta = scenario.value("grid_theta", 16);
    const int jet_order = scenario.value("jet_order", 4);
    const auto q = tll::S3Quadrature::make(grid_phi, grid_theta);

    if (name == "sphere-log-trace") {
        const tll::PhaseKernel k = tll::sphere_szego_kernel(2, jet_order);
        const tll::GridField density(q.num_nodes(), tll::diagonal_log_density(k));
        return Json{{"scenario", name},
                    {"log_density", tll::diagonal_log_density(k)},
                    {"log_trace", tll::log_trace(density, q)}};
    }
    if (name == "invariance") {
        std::vector<double> ts =
            scenario.value("t_values", std::vector<double>{0.0, 0.05, 0.10, 0.15, 0.20});
        tll::InvarianceOptions opt;
        opt.tolerance = scenario.value("tolerance", cfg.tolerance);
        tll::KernelFamily family =
            scenario.contains("broken_t")
                ? tll::broken_sphere_family(jet_order, scenario.at("broken_t").get<double>(),
                                            scenario.value("perturbation", 0.05))
                : tll::conformal_sphere_family(jet_order);
        Json out = tll::to_json(tll::invariance_experiment(family, ts, q, opt));
        out["scenario"] = name;
        return out;
    }
    if (name == "vanishing-chain") {
        const std::vector<int> ns = scenario.value("n_values", std::vector<int>{1, 2, 3, 4});
        const double modulation = scenario.value("modulation", 0.3);
        auto seed = [modulation](double phi, double t1, double t2) {
            const double s = std::sin(2.0 * phi);
            return s * s * (1.0 + modulation * std::cos(t1 + t2));
        };
        Json out = tll::to_json(tll::s3_vanishing_chain(seed, ns, q));
        out["scenario"] = name;
        return out;
    }
    throw std::runtime_error("unknown scenario \"" + name +
                             "\" (sphere-log-trace, invariance, vanishing-chain)");
}

int run_logtrace_run(const Config& cfg, const std::string& scenario_path) {
    emit("logtrace-run", run_scenario(cfg, read_json_file(scenario_path)), cfg);
    return 0;
}

int run_logtrace_suite(const Config& cfg) {
    Json scenarios = Json::array();
    for (const char* name : {"sphere-log-trace", "invariance", "vanishing-chain"})
        scenarios.push_back(run_scenario(cfg, Json{{"scenario", name}}));
    emit("logtrace-suite", Json{{"scenarios", scenarios}}, cfg);
    return 0;
}

int run_suite(const Config& cfg) {
    const auto rows = tll::run_acceptance_battery(cfg);
    bool all = true;
    Json report = Json::array();
    for (const auto& r : rows) {
        std::cout << "[" << (r.index < 10 ? " " : "") << r.index << "/11] "
                  << (r.pass ? "PASS" : "FAIL") << "  " << r.name << " -- " << r.detail
                  << "\n";
        report.push_back(
            Json{{"index", r.index}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
        all = all && r.pass;
    }
    std::cout << (all ? "all criteria passed" : "FAILURES present") << "\n";
    if (!cfg.out_dir.empty()) {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream out(std::filesystem::path(cfg.out_dir) / "suite.json");
        out << tll::dump_report("suite", Json{{"criteria", report}, {"all_pass", all}}, cfg);
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"symbolic-numeric laboratory for logarithmic traces of projector kernels"};
    app.require_subcommand(1);
    // Let `tll <subcommand> --order 4 --seed 7` reach the shared flags below.
    std::function<void(CLI::App*)> inherit_shared_flags = [&](CLI::App* a) {
        a->fallthrough();
        for (CLI::App* sub : a->get_subcommands([](const CLI::App*) { return true; }))
            inherit_shared_flags(sub);
    };

    Config cfg;
    try {
        cfg = tll::default_config();
    } catch (const std::exception& e) {
        std::cerr << "error in TLL_CONFIG: " << e.what() << "\n";
        return 2;
    }

    // Shared flags (values applied after parsing so TLL_CONFIG stays weakest).
    int flag_order = -1, flag_grid = -1;
    double flag_tol = -1.0;
    std::int64_t flag_seed = -1;
    std::string flag_out;
    app.add_option("--order", flag_order, "jet truncation order");
    app.add_option("--grid", flag_grid, "quadrature resolution (latitude and angles)");
    app.add_option("--tol", flag_tol, "comparison tolerance");
    app.add_option("--seed", flag_seed, "seed for randomized checks");
    app.add_option("--out", flag_out, "directory for JSON report files");

    // split
    auto* split = app.add_subcommand("split", "eigen-splitting of a quadratic model");
    std::string split_input;
    int split_dim = 4;
    split->add_option("--input", split_input, "JSON file with Q and omega matrices");
    split->add_option("--dim", split_dim, "dimension of a random seeded model");

    // expand-kernel
    auto* expand = app.add_subcommand("expand-kernel", "pole/log data of a scale symbol");
    std::string expand_input;
    int expand_sphere = 0, expand_n = 0;
    expand->add_option("--input", expand_input, "JSON file with a Laurent symbol");
    expand->add_option("--sphere", expand_sphere, "use the sphere model kernel of this dimension");
    expand->add_option("--n", expand_n, "dimension parameter of the expansion");

    // fit-asymptotics
    auto* fit = app.add_subcommand("fit-asymptotics", "fit a mixed pole/log/Taylor expansion");
    std::string fit_input;
    int fit_pole = 2, fit_taylor = 2, fit_log = 1;
    fit->add_option("--input", fit_input, "JSON file with samples [[eps, re, im?], ...]")
        ->required();
    fit->add_option("--max-pole", fit_pole, "highest pole order");
    fit->add_option("--max-taylor", fit_taylor, "highest Taylor order");
    fit->add_option("--max-log", fit_log, "highest eps^k Log eps column");

    // compose
    auto* compose = app.add_subcommand("compose", "stationary-phase composition of two kernels");
    std::string compose_input;
    int compose_sphere = 0;
    compose->add_option("--input", compose_input, "JSON file with kernels `first`, `second`");
    compose->add_option("--sphere", compose_sphere, "self-compose the sphere kernel");

    // project
    auto* project = app.add_subcommand("project", "correct an approximate projector matrix");
    std::string project_input;
    int project_kmax = 40;
    project->add_option("--input", project_input, "JSON file with the matrix")->required();
    project->add_option("--kmax", project_kmax, "series truncation");

    // deform-symbols
    auto* deform = app.add_subcommand("deform-symbols", "idempotent path between product symbols");
    std::string deform_input;
    deform->add_option("--input", deform_input, "JSON file with grid and factors")->required();

    // contact
    auto* contact = app.add_subcommand("contact", "contact forms on the three-sphere");
    contact->require_subcommand(1);
    std::string contact_family = "standard", contact_input, glue_first, glue_second;
    int contact_n = 0;
    double contact_kappa = 1.0;
    bool hopf_oracle = false;
    for (auto* sub : {contact->add_subcommand("check", "contact condition and value range"),
                      contact->add_subcommand("hopf", "degree class of the trivialization"),
                      contact->add_subcommand("volume", "volume integral of the form")}) {
        sub->add_option("--family", contact_family,
                        "standard | standard_opposite | lambda_n | scaled");
        sub->add_option("--n", contact_n, "twist index for lambda_n");
        sub->add_option("--kappa", contact_kappa, "scale factor for the scaled family");
        sub->add_option("--input", contact_input, "JSON descriptor file (overrides --family)");
    }
    contact->get_subcommand("hopf")->add_flag("--oracle", hopf_oracle,
                                              "also run the linking-number oracle");
    auto* glue = contact->add_subcommand("glue", "collar-glue two forms");
    glue->add_option("--first", glue_first, "JSON descriptor of the inner form");
    glue->add_option("--second", glue_second, "JSON descriptor of the outer form");

    // logtrace
    auto* logtrace = app.add_subcommand("logtrace", "logarithmic-trace scenarios");
    logtrace->require_subcommand(1);
    auto* lt_run = logtrace->add_subcommand("run", "run one scenario file");
    std::string scenario_path;
    lt_run->add_option("scenario", scenario_path, "scenario JSON file")->required();
    logtrace->add_subcommand("suite", "run all library scenarios");

    // suite
    app.add_subcommand("suite", "full acceptance battery with a pass/fail table");

    inherit_shared_flags(&app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return 2;
    }

    try {
        if (flag_order > 0) cfg.jet_order = flag_order;
        if (flag_grid > 0) cfg.grid_phi = cfg.grid_theta = flag_grid;
        if (flag_tol > 0.0) cfg.tolerance = flag_tol;
        if (flag_seed >= 0) cfg.seed = static_cast<std::uint64_t>(flag_seed);
        if (!flag_out.empty()) cfg.out_dir = flag_out;
        cfg.validate();

        if (split->parsed()) return run_split(cfg, split_input, split_dim);
        if (expand->parsed()) return run_expand_kernel(cfg, expand_input, expand_sphere, expand_n);
        if (fit->parsed()) return run_fit(cfg, fit_input, fit_pole, fit_taylor, fit_log);
        if (compose->parsed()) return run_compose(cfg, compose_input, compose_sphere);
        if (project->parsed()) return run_project(cfg, project_input, project_kmax);
        if (deform->parsed()) return run_deform_symbols(cfg, deform_input);
        if (contact->parsed()) {
            if (contact->get_subcommand("glue")->parsed())
                return run_contact_glue(cfg, glue_first, glue_second);
            const tll::ContactFormS3 form =
                form_from_flags(contact_family, contact_n, contact_kappa, contact_input);
            if (contact->get_subcommand("check")->parsed()) return run_contact_check(cfg, form);
            if (contact->get_subcommand("hopf")->parsed())
                return run_contact_hopf(cfg, form, flag_grid > 0, hopf_oracle);
            return run_contact_volume(cfg, form);
        }
        if (logtrace->parsed()) {
            if (lt_run->parsed()) return run_logtrace_run(cfg, scenario_path);
            return run_logtrace_suite(cfg);
        }
        return run_suite(cfg);
    } catch (const UsageError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << "run with --help for usage\n";
        return 2;
    } catch (const std::exception& e) {
        // Structured validation failure: machine-readable, still on stdout.
        std::cout << tll::dump_report("error", Json{{"message", e.what()}}, cfg);
        return 1;
    }
}
