#include "tll/json_io.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

namespace tll {

namespace {

Json complex_to_json(const Complex& z) { return Json::array({z.real(), z.imag()}); }

Complex complex_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 2)
        throw std::runtime_error("expected a complex number as [re, im]");
    return {j[0].get<double>(), j[1].get<double>()};
}

const Json& require(const Json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::runtime_error(std::string("missing JSON key \"") + key + "\"");
    return *it;
}

}  // namespace

// --- config --------------------------------------------------------------------

void Config::validate() const {
    if (jet_order <= 0 || jet_order > 12)
        throw std::invalid_argument("config: jet_order must be in 1..12");
    if (grid_phi <= 0 || grid_theta <= 0)
        throw std::invalid_argument("config: grid resolutions must be positive");
    if (!(tolerance > 0.0) || !(tolerance < 1.0))
        throw std::invalid_argument("config: tolerance must lie in (0, 1)");
}

Json to_json(const Config& c) {
    return Json{{"jet_order", c.jet_order}, {"grid_phi", c.grid_phi},
                {"grid_theta", c.grid_theta}, {"tolerance", c.tolerance},
                {"seed", c.seed}, {"out_dir", c.out_dir}};
}

Config config_from_json(const Json& j, Config base) {
    if (!j.is_object()) throw std::runtime_error("config JSON must be an object");
    if (j.contains("jet_order")) base.jet_order = j["jet_order"].get<int>();
    if (j.contains("grid_phi")) base.grid_phi = j["grid_phi"].get<int>();
    if (j.contains("grid_theta")) base.grid_theta = j["grid_theta"].get<int>();
    if (j.contains("tolerance")) base.tolerance = j["tolerance"].get<double>();
    if (j.contains("seed")) base.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("out_dir")) base.out_dir = j["out_dir"].get<std::string>();
    base.validate();
    return base;
}

Config load_config_file(const std::string& path, Config base) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    Json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("config parse error in " + path + ": " + e.what());
    }
    return config_from_json(j, base);
}

Config default_config() {
    Config c;
    if (const char* env = std::getenv("TLL_CONFIG"); env && *env)
        c = load_config_file(env, c);
    return c;
}

// --- jets ------------------------------------------------------------------------

Json to_json(const Jet& jet) {
    Json terms = Json::array();
    for (const auto& [key, coeff] : jet.terms()) {
        terms.push_back(Json{{"exp", mono_unpack(key, jet.num_vars())},
                             {"re", coeff.real()},
                             {"im", coeff.imag()}});
    }
    return Json{{"vars", jet.num_vars()}, {"order", jet.order()}, {"terms", terms}};
}

Jet jet_from_json(const Json& j) {
    const int nvars = require(j, "vars").get<int>();
    const int order = require(j, "order").get<int>();
    std::vector<Jet::Term> terms;
    for (const auto& t : require(j, "terms")) {
        auto exps = require(t, "exp").get<std::vector<int>>();
        if (static_cast<int>(exps.size()) != nvars)
            throw std::runtime_error("jet term exponent length != vars");
        terms.push_back({mono_pack(exps),
                         Complex(require(t, "re").get<double>(),
                                 require(t, "im").get<double>())});
    }
    return Jet::from_terms(nvars, order, std::move(terms));
}

// --- Laurent symbols ----------------------------------------------------------------

Json to_json(const LaurentSymbol& s) {
    Json terms = Json::array();
    for (const auto& [degree, jet] : s.terms)
        terms.push_back(Json{{"degree", degree}, {"jet", to_json(jet)}});
    return Json{{"vars", s.nvars}, {"order", s.order}, {"terms", terms}};
}

LaurentSymbol laurent_from_json(const Json& j) {
    LaurentSymbol s;
    s.nvars = require(j, "vars").get<int>();
    s.order = require(j, "order").get<int>();
    for (const auto& t : require(j, "terms"))
        s.set(require(t, "degree").get<int>(), jet_from_json(require(t, "jet")));
    return s;
}

// --- phase kernels -------------------------------------------------------------------

Json to_json(const PhaseKernel& k) {
    return Json{{"phase", to_json(k.phase)},     {"amplitude", to_json(k.amplitude)},
                {"dims", k.dims},                {"n", k.n},
                {"measure", to_json(k.measure)}, {"half_power_shift", k.half_power_shift}};
}

PhaseKernel kernel_from_json(const Json& j) {
    PhaseKernel k;
    k.phase = jet_from_json(require(j, "phase"));
    k.amplitude = laurent_from_json(require(j, "amplitude"));
    k.dims = require(j, "dims").get<int>();
    k.n = require(j, "n").get<int>();
    k.measure = jet_from_json(require(j, "measure"));
    k.half_power_shift = j.value("half_power_shift", 0);
    return k;
}

// --- matrices --------------------------------------------------------------------------

Json to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", rows}};
}

Matrix matrix_from_json(const Json& j) {
    const auto rows = require(j, "rows").get<Eigen::Index>();
    const auto cols = require(j, "cols").get<Eigen::Index>();
    const Json& data = require(j, "data");
    if (static_cast<Eigen::Index>(data.size()) != rows)
        throw std::runtime_error("matrix row count mismatch");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        if (static_cast<Eigen::Index>(data[i].size()) != cols)
            throw std::runtime_error("matrix column count mismatch");
        for (Eigen::Index k = 0; k < cols; ++k) m(i, k) = complex_from_json(data[i][k]);
    }
    return m;
}

// --- symbols on the fiber product ----------------------------------------------------------

Json to_json(const SymbolOnC& s) {
    Json values = Json::array();
    for (int b = 0; b < s.grid.num_base; ++b) {
        Json block = Json::array();
        for (int i = 0; i < s.grid.fiber_out; ++i) {
            Json row = Json::array();
            for (int k = 0; k < s.grid.fiber_in; ++k) row.push_back(complex_to_json(s.at(b, i, k)));
            block.push_back(std::move(row));
        }
        values.push_back(std::move(block));
    }
    return Json{{"grid",
                 Json{{"num_base", s.grid.num_base},
                      {"fiber_out", s.grid.fiber_out},
                      {"fiber_in", s.grid.fiber_in}}},
                {"normalized_frame", s.normalized_frame},
                {"values", values}};
}

SymbolOnC symbol_from_json(const Json& j) {
    const Json& g = require(j, "grid");
    SymbolGrid grid{require(g, "num_base").get<int>(), require(g, "fiber_out").get<int>(),
                    require(g, "fiber_in").get<int>()};
    SymbolOnC s = SymbolOnC::constant(grid, Complex(0.0, 0.0),
                                      j.value("normalized_frame", true));
    const Json& values = require(j, "values");
    if (static_cast<int>(values.size()) != grid.num_base)
        throw std::runtime_error("symbol base-label count mismatch");
    for (int b = 0; b < grid.num_base; ++b)
        for (int i = 0; i < grid.fiber_out; ++i)
            for (int k = 0; k < grid.fiber_in; ++k)
                s.at(b, i, k) = complex_from_json(values[b][i][k]);
    return s;
}

// --- expansion reports ------------------------------------------------------------------------

Json to_json(const EpsilonExpansion& e) {
    auto dump_map = [](const std::map<int, Complex>& m) {
        Json arr = Json::array();
        for (const auto& [k, v] : m)
            arr.push_back(Json{{"k", k}, {"value", complex_to_json(v)}});
        return arr;
    };
    return Json{{"pole", dump_map(e.pole)},     {"log", dump_map(e.log)},
                {"taylor", dump_map(e.taylor)}, {"residual", e.residual},
                {"condition", e.condition}};
}

Json to_json(const HolonomicSingularity& s) {
    auto dump_map = [](const std::map<int, Jet>& m) {
        Json arr = Json::array();
        for (const auto& [k, jet] : m) arr.push_back(Json{{"k", k}, {"jet", to_json(jet)}});
        return arr;
    };
    return Json{{"n", s.n}, {"alpha", dump_map(s.alpha)}, {"beta", dump_map(s.beta)}};
}

// --- contact forms -------------------------------------------------------------------------------

Json contact_descriptor(const ContactFormS3& form) {
    const std::string& name = form.name;
    if (name == "standard") return Json{{"family", "standard"}};
    if (name == "standard-opposite") return Json{{"family", "standard_opposite"}};
    if (name.rfind("twisted-", 0) == 0)
        return Json{{"family", "lambda_n"}, {"n", std::stoi(name.substr(8))}};
    // General forms are serialized by sampling the coefficient pair on a
    // uniform latitude grid; round-trip goes through the spline constructor.
    constexpr int kSamples = 257;
    std::vector<double> phi(kSamples), a(kSamples), b(kSamples);
    for (int i = 0; i < kSamples; ++i) {
        phi[i] = (M_PI / 2.0) * i / (kSamples - 1);
        a[i] = form.a(phi[i]);
        b[i] = form.b(phi[i]);
    }
    return Json{{"family", "samples"}, {"label", name}, {"phi", phi}, {"a", a}, {"b", b}};
}

ContactFormS3 contact_from_json(const Json& j) {
    const std::string family = require(j, "family").get<std::string>();
    if (family == "standard") return ContactFormS3::standard_form();
    if (family == "standard_opposite") return ContactFormS3::standard_opposite();
    if (family == "lambda_n") return ContactFormS3::twisted(require(j, "n").get<int>());
    if (family == "scaled")
        return ContactFormS3::scaled(contact_from_json(require(j, "base")),
                                     require(j, "kappa").get<double>());
    if (family == "samples")
        return ContactFormS3::from_samples(require(j, "phi").get<std::vector<double>>(),
                                           require(j, "a").get<std::vector<double>>(),
                                           require(j, "b").get<std::vector<double>>());
    throw std::runtime_error("unknown contact family \"" + family + "\"");
}

// --- geometry / scenario reports -------------------------------------------------------------------

Json to_json(const HopfReport& r) {
    return Json{{"degree", r.degree},
                {"value", r.value},
                {"certificate", r.certificate},
                {"winding1", r.winding1},
                {"winding2", r.winding2},
                {"equivariance_residual", r.equivariance_residual},
                {"cos_start", r.cos_start},
                {"cos_end", r.cos_end}};
}

Json to_json(const LinkingReport& r) {
    return Json{{"linking", r.linking}, {"value", r.value}, {"certificate", r.certificate}};
}

Json to_json(const PhaseReport& r) {
    return Json{{"ok", r.ok},
                {"positivity_margin", r.c},
                {"diagonal_residual", r.diagonal_residual},
                {"gradient_residual", r.gradient_residual},
                {"message", r.message}};
}

Json to_json(const IdempotenceReport& r) {
    return Json{{"phase_defect", r.phase_defect},
                {"amplitude_defect", r.amplitude_defect},
                {"unit_constant_gap", r.unit_constant_gap}};
}

Json to_json(const InvarianceReport& r) {
    return Json{{"t_values", r.t_values},
                {"beta0_bar", r.beta0_bar},
                {"mean", r.mean},
                {"max_deviation", r.max_deviation},
                {"grid_stability", r.grid_stability},
                {"member_defect", r.member_defect},
                {"flagged", r.flagged},
                {"flag_reason", r.flag_reason},
                {"differenced_log_coefficient", r.differenced_log_coefficient},
                {"differenced_fit_residual", r.differenced_fit_residual}};
}

Json to_json(const VanishingChainReport& r) {
    return Json{{"n_values", r.n_values},
                {"trace_values", r.trace_values},
                {"slope", r.slope},
                {"fit_residual", r.fit_residual},
                {"even_constraint_input", r.even_constraint_input},
                {"constrained_slope", r.constrained_slope},
                {"constrained_values", r.constrained_values}};
}

Json to_json(const PeriodicDensityReport& r) {
    return Json{{"n", r.n},
                {"copies", r.copies},
                {"seed_integral", r.seed_integral},
                {"integral", r.integral}};
}

Json to_json(const HomotopyReport& r) {
    return Json{{"n", r.n},
                {"min_triple_norm", r.min_triple_norm},
                {"start_class", r.start_class},
                {"end_class", r.end_class},
                {"parity_consistent", r.parity_consistent}};
}

// --- sampled fields ------------------------------------------------------------------------------------

void write_field_csv(std::ostream& out, const S3Quadrature& q, const GridField& field) {
    if (field.size() != q.num_nodes())
        throw std::invalid_argument("field length does not match the quadrature grid");
    out << "phi,theta1,theta2,value\n";
    std::ostringstream line;
    line.precision(17);
    for (int i = 0; i < q.n_phi; ++i)
        for (int j1 = 0; j1 < q.n_theta; ++j1)
            for (int j2 = 0; j2 < q.n_theta; ++j2) {
                line.str("");
                line << q.phi[i] << ',' << q.theta[j1] << ',' << q.theta[j2] << ','
                     << field[q.index(i, j1, j2)] << '\n';
                out << line.str();
            }
}

GridField read_field_csv(std::istream& in, const S3Quadrature& q) {
    std::string header;
    if (!std::getline(in, header) || header.rfind("phi,theta1,theta2,value", 0) != 0)
        throw std::runtime_error("field CSV must start with header phi,theta1,theta2,value");
    GridField field(q.num_nodes(), 0.0);
    std::string row;
    std::size_t count = 0;
    while (std::getline(in, row)) {
        if (row.empty()) continue;
        if (count >= field.size()) throw std::runtime_error("field CSV has too many rows");
        const auto last_comma = row.find_last_of(',');
        if (last_comma == std::string::npos)
            throw std::runtime_error("malformed field CSV row: " + row);
        field[count++] = std::stod(row.substr(last_comma + 1));
    }
    if (count != field.size())
        throw std::runtime_error("field CSV row count does not match the grid");
    return field;
}

// --- report envelope -------------------------------------------------------------------------------------

std::string dump_report(const std::string& kind, const Json& payload, const Config& c) {
    Json envelope{{"config", to_json(c)}, {"kind", kind}, {"report", payload}};
    return envelope.dump(2) + "\n";
}

}  // namespace tll
