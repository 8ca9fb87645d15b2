#pragma once

#include "sublin/axioms.hpp"
#include "sublin/centering.hpp"
#include "sublin/credal.hpp"
#include "sublin/dependence.hpp"
#include "sublin/independence.hpp"
#include "sublin/io.hpp"
#include "sublin/lln.hpp"
#include "sublin/strong.hpp"

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <map>
#include <vector>

namespace sublin {

inline constexpr const char* kToolVersion = "0.1.0";

inline const std::vector<std::string>& command_names() {
    static const std::vector<std::string> names{"check-axioms", "markov",   "uncorrelated", "independence", "center",
                                                "lln-weak",     "lln-strong", "ottaviani",  "tail-capacity"};
    return names;
}

/// One-line help text per subcommand.
inline std::string command_summary(const std::string& name) {
    static const std::map<std::string, std::string> text{
        {"check-axioms", "randomized check of the sublinear-expectation axioms"},
        {"markov", "Markov inequality for capacities over an r grid"},
        {"uncorrelated", "pairwise uncorrelatedness certificates over the credal set"},
        {"independence", "sequential independence of a product model"},
        {"center", "centering intervals and selected lambdas"},
        {"lln-weak", "exact deviation capacities against the Chebyshev-type bound"},
        {"lln-strong", "Cauchy capacities, bound chain and Kronecker trajectories"},
        {"ottaviani", "maximal inequality over s, t grids"},
        {"tail-capacity", "finite-horizon tail oscillation capacities"}};
    auto it = text.find(name);
    return it == text.end() ? std::string() : it->second;
}

/// Exit status contract of the command-line tool.
enum ExitCode : int { exit_ok = 0, exit_error = 1, exit_violation = 2 };

/**
 * Parsed experiment config. Paths are resolved against the config file's
 * directory. Type errors found while parsing are kept in `parse_errors`
 * and surface through validate().
 */
struct ExperimentConfig {
    std::string command;
    std::filesystem::path model;
    std::vector<std::size_t> n_list;
    std::optional<double> epsilon;
    std::optional<double> p;
    std::vector<double> s;
    std::vector<double> t;
    std::vector<double> r;
    std::vector<double> moments{1.0, 2.0};
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<std::size_t> bases;
    std::size_t split = 0;
    std::size_t trials = 1000;
    std::size_t horizon = 0;  // 0 = product horizon
    std::optional<std::vector<double>> x;
    std::optional<std::vector<double>> y;
    std::vector<std::vector<double>> variables;
    bool center = false;            // ottaviani: subtract centering constants
    std::string method = "exact";   // lln-weak: exact | dp-bound
    std::uint64_t seed = 0;
    double guard = kDefaultGuard;
    std::size_t mc_samples = 0;
    std::filesystem::path output;
    std::vector<std::string> parse_errors;
};

namespace detail {

template <class T>
void read_field(const json& j, const char* key, T& out, std::vector<std::string>& errors) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        errors.push_back(std::string("field \"") + key + "\" has the wrong type");
    }
}

template <class T>
void read_field(const json& j, const char* key, std::optional<T>& out, std::vector<std::string>& errors) {
    if (!j.contains(key)) return;
    T v{};
    read_field(j, key, v, errors);
    out = v;
}

/// Accepts a scalar or a list.
inline void read_grid(const json& j, const char* key, std::vector<double>& out, std::vector<std::string>& errors) {
    if (!j.contains(key)) return;
    if (j.at(key).is_number()) {
        out = {j.at(key).get<double>()};
        return;
    }
    read_field(j, key, out, errors);
}

}  // namespace detail

inline ExperimentConfig parse_config(const json& j, const std::filesystem::path& base_dir = {}) {
    ExperimentConfig c;
    auto& e = c.parse_errors;
    if (!j.is_object()) {
        e.push_back("config must be a JSON object");
        return c;
    }
    using detail::read_field;
    read_field(j, "command", c.command, e);
    std::string model;
    read_field(j, "model", model, e);
    if (!model.empty()) c.model = base_dir / model;
    read_field(j, "n_list", c.n_list, e);
    read_field(j, "epsilon", c.epsilon, e);
    read_field(j, "p", c.p, e);
    detail::read_grid(j, "s", c.s, e);
    detail::read_grid(j, "t", c.t, e);
    detail::read_grid(j, "r", c.r, e);
    detail::read_grid(j, "moments", c.moments, e);
    read_field(j, "pairs", c.pairs, e);
    read_field(j, "bases", c.bases, e);
    read_field(j, "split", c.split, e);
    read_field(j, "trials", c.trials, e);
    read_field(j, "horizon", c.horizon, e);
    read_field(j, "x", c.x, e);
    read_field(j, "y", c.y, e);
    read_field(j, "variables", c.variables, e);
    read_field(j, "center", c.center, e);
    read_field(j, "method", c.method, e);
    if (j.contains("seed")) {
        if (j.at("seed").is_number_unsigned())
            c.seed = j.at("seed").get<std::uint64_t>();
        else
            e.push_back("seed must be a 64-bit unsigned integer");
    }
    read_field(j, "guard", c.guard, e);
    read_field(j, "mc_samples", c.mc_samples, e);
    std::string out;
    read_field(j, "output", out, e);
    if (!out.empty()) c.output = base_dir / out;
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    return parse_config(read_json(path), path.parent_path());
}

/// Canonical JSON of the effective config (after command-line overrides).
inline json config_json(const ExperimentConfig& c) {
    json j{{"command", c.command},
           {"model", c.model.string()},
           {"n_list", c.n_list},
           {"s", c.s},
           {"t", c.t},
           {"r", c.r},
           {"moments", c.moments},
           {"pairs", c.pairs},
           {"bases", c.bases},
           {"split", c.split},
           {"trials", c.trials},
           {"horizon", c.horizon},
           {"variables", c.variables},
           {"center", c.center},
           {"method", c.method},
           {"seed", c.seed},
           {"guard", c.guard},
           {"mc_samples", c.mc_samples}};
    if (c.epsilon) j["epsilon"] = *c.epsilon;
    if (c.p) j["p"] = *c.p;
    if (c.x) j["x"] = *c.x;
    if (c.y) j["y"] = *c.y;
    return j;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline bool needs_product(const std::string& cmd) {
    return cmd == "lln-weak" || cmd == "lln-strong" || cmd == "ottaviani" || cmd == "tail-capacity";
}

/// All violations of the config invariants; empty means runnable.
inline std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> d = c.parse_errors;
    const auto& names = command_names();
    if (c.command.empty())
        d.push_back("command is missing");
    else if (std::find(names.begin(), names.end(), c.command) == names.end())
        d.push_back("unknown command \"" + c.command + "\"");

    std::optional<json> model_json;
    if (c.model.empty()) {
        d.push_back("model file is missing");
    } else if (!std::filesystem::exists(c.model)) {
        d.push_back("model file not found: " + c.model.string());
    } else {
        try {
            model_json = read_json(c.model);
        } catch (const std::exception& ex) {
            d.push_back(ex.what());
        }
    }
    bool product = model_json && is_product_json(*model_json);

    if (c.epsilon && !(*c.epsilon > 0.0)) d.push_back("epsilon must be positive");
    if ((c.command == "lln-weak" || c.command == "lln-strong" || c.command == "tail-capacity") && !c.epsilon)
        d.push_back("epsilon is required for " + c.command);
    if (c.command == "lln-strong") {
        if (!c.p)
            d.push_back("p is required for lln-strong");
        else if (!(*c.p > 1.0))
            d.push_back("p must exceed 1: the strong law normalizes by n^p with p > 1");
        if (c.pairs.empty()) d.push_back("pairs must list at least one (m, n)");
        for (auto [m, n] : c.pairs)
            if (m < 1 || m >= n) d.push_back("pair (" + std::to_string(m) + ", " + std::to_string(n) + ") needs 1 <= m < n");
        if (product && c.p) {
            double q = model_json->value("growth", 0.0);
            if (q > 0.0 && !(2.0 * q - 2.0 * *c.p < -1.0))
                d.push_back("growth exponent q must satisfy 2q - 2p < -1");
        }
    }
    if (c.p && c.command == "tail-capacity" && !(*c.p >= 0.0)) d.push_back("p must be nonnegative");
    if (c.command == "lln-weak") {
        if (c.n_list.empty()) d.push_back("n_list must not be empty");
        for (auto n : c.n_list)
            if (n == 0) d.push_back("n_list entries must be positive");
        if (c.method != "exact" && c.method != "dp-bound") d.push_back("method must be \"exact\" or \"dp-bound\"");
    }
    if (c.command == "ottaviani") {
        if (c.s.empty() || c.t.empty()) d.push_back("s and t grids are required for ottaviani");
        for (double v : c.s)
            if (!(v > 0.0)) d.push_back("s must be positive");
        for (double v : c.t)
            if (!(v > 0.0)) d.push_back("t must be positive");
    }
    if (c.command == "markov") {
        if (c.r.empty()) d.push_back("r grid is required for markov");
        for (double v : c.r)
            if (!(v > 0.0)) d.push_back("r must be positive");
        for (double v : c.moments)
            if (!(v >= 1.0)) d.push_back("moments must be at least 1");
    }
    if (c.command == "independence" && c.split < 1) d.push_back("split must be at least 1");
    if (c.command == "check-axioms" && c.trials == 0) d.push_back("trials must be at least 1");
    if (c.command == "uncorrelated" && model_json && !product && (!c.x || !c.y))
        d.push_back("uncorrelated on a plain model needs \"x\" and \"y\"");
    if ((c.command == "independence" || c.command == "center") && model_json && !product && c.variables.size() < 2)
        d.push_back(c.command + " on a plain model needs at least two \"variables\"");
    if (model_json && !product && needs_product(c.command)) d.push_back(c.command + " needs a product model file");
    if (!(c.guard > 0.0)) d.push_back("guard must be positive");
    return d;
}

struct RunResult {
    int exit_code = exit_ok;
    std::string message;
    std::filesystem::path csv_path;
    std::filesystem::path json_path;
};

namespace detail {

inline std::string utc_now() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

struct Outcome {
    CsvTable table;
    json report;
    bool violation = false;
    std::set<std::string> provenance{};
};

inline RandomVariable variable_on(const ModelFile& m, const std::vector<double>& v, const char* what) {
    if (v.size() != m.model.space()->size())
        throw ModelError(std::string(what) + " has " + std::to_string(v.size()) + " values, expected " +
                         std::to_string(m.model.space()->size()));
    return RandomVariable(m.model.space(), v);
}

inline std::vector<RandomVariable> variables_on(const ModelFile& m, const ExperimentConfig& c) {
    std::vector<RandomVariable> xs;
    for (const auto& v : c.variables) xs.push_back(variable_on(m, v, "variable"));
    return xs;
}

inline Outcome run_check_axioms(const ExperimentConfig& c, const ModelFile& m) {
    Outcome o{CsvTable({"axiom", "trial", "lhs", "rhs", "scalar", "provenance"}), {}};
    auto rep = verify_axioms(m.model, c.trials, c.seed);
    for (const auto& v : rep.violations) o.table.row() << axiom_name(v.axiom) << v.trial << v.lhs << v.rhs << v.scalar << "exact";
    o.provenance.insert("exact");
    o.violation = !rep.ok();
    o.report = {{"trials", rep.trials}, {"violations", rep.violations.size()}, {"generators", m.model.generator_count()}};
    return o;
}

inline Outcome run_markov(const ExperimentConfig& c, const ModelFile& m) {
    Outcome o{CsvTable({"r", "moment", "capacity", "bound", "holds", "provenance"}), {}};
    auto x = c.x ? variable_on(m, *c.x, "x") : m.values;
    json rows = json::array();
    for (double r : c.r)
        for (double p : c.moments) {
            auto rep = markov_check(m.model, x, r, p);
            o.table.row() << r << p << rep.capacity << rep.bound << rep.holds << "exact";
            o.violation = o.violation || !rep.holds;
            rows.push_back({{"r", r}, {"moment", p}, {"capacity", rep.capacity}, {"bound", rep.bound}, {"holds", rep.holds}});
        }
    o.provenance.insert("exact");
    o.report = {{"rows", rows}};
    return o;
}

inline Outcome run_uncorrelated(const ExperimentConfig& c, const json& model_json, const std::filesystem::path& path) {
    Outcome o{CsvTable({"i", "j", "holds", "witness_covariance", "vertex_failures", "pair_failures", "provenance"}), {}};
    json certs = json::array();
    std::size_t nondegenerate = 0;
    auto add = [&](std::size_t i, std::size_t j, const UncorrelatedCertificate& cert) {
        o.table.row() << i << j << cert.holds << (cert.witness ? cert.witness->covariance : 0.0)
                      << cert.vertex_failures.size() << cert.pair_failures.size() << "exact";
        o.violation = o.violation || !cert.holds;
        auto cj = to_json(cert);
        cj["i"] = i;
        cj["j"] = j;
        certs.push_back(cj);
    };
    if (is_product_json(model_json)) {
        auto pf = parse_product(model_json, path.parent_path(), path.string());
        std::size_t n = c.horizon ? std::min(c.horizon, pf.n) : pf.n;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) add(i + 1, j + 1, coordinate_certificate(pf.product, i, j));
            if (!pf.product.mean_certain(i)) ++nondegenerate;
        }
    } else {
        auto m = parse_model(model_json, path.string());
        auto x = variable_on(m, *c.x, "x"), y = variable_on(m, *c.y, "y");
        add(1, 2, uncorrelated_certificate(m.model, x, y));
        for (const auto* v : {&x, &y})
            if (centering_interval(m.model, *v).width() > kTolerance) ++nondegenerate;
    }
    o.provenance.insert("exact");
    o.report = {{"certificates", certs},
                {"nondegenerate_intervals", nondegenerate},
                {"note", "in a pairwise-uncorrelated family at most one variable has a nondegenerate interval"}};
    return o;
}

inline Outcome run_independence(const ExperimentConfig& c, const json& model_json, const std::filesystem::path& path) {
    Outcome o{CsvTable({"split", "left_cells", "right_cells", "capacity_condition", "pairwise_uncorrelated",
                        "worst_capacity_ab", "worst_capacity_product", "holds", "provenance"}),
              {}};
    IndependenceReport rep;
    if (is_product_json(model_json)) {
        auto pf = parse_product(model_json, path.parent_path(), path.string());
        auto prod = c.horizon ? pf.product.prefix(std::min(c.horizon, pf.n)) : pf.product;
        rep = independence_check(prod, c.split, kMaxSigmaCells, c.guard);
    } else {
        auto m = parse_model(model_json, path.string());
        auto xs = variables_on(m, c);
        rep = independence_check(m.model, xs, c.split);
    }
    double ab = rep.worst ? rep.worst->capacity_ab : 0.0, prod = rep.worst ? rep.worst->capacity_product : 0.0;
    o.table.row() << c.split << rep.left_cells << rep.right_cells << rep.capacity_condition << rep.pairwise_uncorrelated
                  << ab << prod << rep.holds << "exact";
    o.provenance.insert("exact");
    o.violation = !rep.holds;
    json failures = json::array();
    for (const auto& f : rep.pair_failures) {
        auto cj = to_json(f.certificate);
        cj["i"] = f.i + 1;
        cj["j"] = f.j + 1;
        failures.push_back(cj);
    }
    o.report = {{"holds", rep.holds}, {"capacity_condition", rep.capacity_condition},
                {"pairwise_uncorrelated", rep.pairwise_uncorrelated}, {"pair_failures", failures}};
    if (rep.worst)
        o.report["worst"] = {{"a", rep.worst->a.members()}, {"b", rep.worst->b.members()}, {"capacity_ab", ab},
                             {"capacity_product", prod}};
    return o;
}

inline Outcome run_center(const ExperimentConfig& c, const json& model_json, const std::filesystem::path& path) {
    Outcome o{CsvTable({"i", "lambda", "interval_lo", "interval_hi", "residual", "provenance"}), {}};
    CenteringSequence seq;
    if (is_product_json(model_json)) {
        auto pf = parse_product(model_json, path.parent_path(), path.string());
        seq = sequential_centering(pf.product, c.horizon ? std::min(c.horizon, pf.n) : pf.n);
    } else {
        auto m = parse_model(model_json, path.string());
        auto xs = variables_on(m, c);
        seq = sequential_centering(m.model, xs);
        json lip = json::array();
        auto partial = RandomVariable::constant(m.model.space(), 0.0);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (i > 0) {
                auto l = lipschitz_constants(m.model, xs[i], partial);
                lip.push_back({{"i", i + 1},
                               {"operator_bound", l.operator_bound},
                               {"upper_mean_bound", l.upper_mean_bound},
                               {"upper_mean_valid", l.upper_mean_valid}});
            }
            partial = partial + (xs[i] - seq.lambdas[i]);
        }
        o.report["lipschitz"] = lip;
    }
    for (std::size_t i = 0; i < seq.lambdas.size(); ++i) {
        o.table.row() << i + 1 << seq.lambdas[i] << seq.intervals[i].lo << seq.intervals[i].hi << seq.residuals[i]
                      << "exact";
        o.violation = o.violation || seq.residuals[i] > kResidualTolerance ||
                      !seq.intervals[i].contains(seq.lambdas[i]);
    }
    o.provenance.insert("exact");
    o.report["centering"] = to_json(seq);
    return o;
}

inline Outcome run_lln_weak(const ExperimentConfig& c, const ProductFile& pf) {
    Outcome o{CsvTable({"n", "capacity", "std_error", "bound", "markov_direct", "holds", "provenance"}), {}};
    const double eps = *c.epsilon;
    WeakLLNReport rep;
    if (c.method == "dp-bound") {
        // Same table, but every capacity is the adaptive upper bound.
        std::size_t max_n = *std::max_element(c.n_list.begin(), c.n_list.end());
        if (max_n > pf.n) throw ModelError("weak_lln_run: n outside the model horizon");
        require_pairwise_uncorrelated(pf.product, max_n);
        auto full = sequential_centering(pf.product, max_n);
        rep.epsilon = eps;
        rep.centering = full;
        rep.sup_constant = 0.0;
        for (std::size_t i = 0; i < max_n; ++i) rep.sup_constant = std::max(rep.sup_constant, spread_constant(pf.product, i));
        for (auto n : c.n_list) {
            DeviationQuery q{pf.product, eps, 1, n, full.lambdas, std::vector<double>(max_n, 1.0 / static_cast<double>(n))};
            WeakLLNRow row{n, deviation_capacity_dp_bound(q, c.guard), 0.0,
                           rep.sup_constant / (static_cast<double>(n) * eps * eps),
                           std::numeric_limits<double>::quiet_NaN(), true, Provenance::dp_bound};
            row.holds = row.capacity <= row.bound + kResidualTolerance;
            rep.all_hold = rep.all_hold && row.holds;
            rep.rows.push_back(row);
        }
    } else {
        rep = weak_lln_run(pf.product, c.n_list, eps, RunOptions{c.guard, c.mc_samples, c.seed});
    }
    json rows = json::array();
    for (const auto& r : rep.rows) {
        o.table.row() << r.n << r.capacity << r.std_error << r.bound << r.markov_direct << r.holds
                      << provenance_name(r.provenance);
        o.provenance.insert(provenance_name(r.provenance));
        rows.push_back({{"n", r.n}, {"capacity", r.capacity}, {"std_error", r.std_error}, {"bound", r.bound},
                        {"markov_direct", number(r.markov_direct)}, {"holds", r.holds},
                        {"provenance", provenance_name(r.provenance)}});
    }
    o.violation = !rep.all_hold;
    o.report = {{"epsilon", eps}, {"sup_constant", rep.sup_constant}, {"monotone", rep.monotone},
                {"centering", to_json(rep.centering)}, {"rows", rows}};
    return o;
}

inline Outcome run_lln_strong(const ExperimentConfig& c, const ProductFile& pf) {
    Outcome o{CsvTable({"m", "n", "capacity", "std_error", "variance_term", "cross_term", "bound", "holds", "lambda_nm",
                        "lambda_lo", "lambda_hi", "subadditive_lo", "subadditive_hi", "lambda_contained",
                        "provenance"}),
              {}};
    auto prod = c.horizon ? pf.product.prefix(std::min(c.horizon, pf.n)) : pf.product;
    auto rep = strong_lln_run(prod, *c.p, *c.epsilon, c.pairs, StrongRunOptions{c.guard, c.mc_samples, c.seed});
    json rows = json::array();
    for (const auto& r : rep.rows) {
        o.table.row() << r.m << r.n << r.capacity << r.std_error << r.variance_term << r.cross_term << r.bound << r.holds
                      << r.lambda_nm << r.lambda_interval.lo << r.lambda_interval.hi << r.subadditive_range.lo
                      << r.subadditive_range.hi << r.lambda_contained << provenance_name(r.provenance);
        o.provenance.insert(provenance_name(r.provenance));
        rows.push_back({{"m", r.m}, {"n", r.n}, {"capacity", r.capacity}, {"bound", r.bound}, {"holds", r.holds},
                        {"lambda_nm", number(r.lambda_nm)}, {"lambda_contained", r.lambda_contained},
                        {"provenance", provenance_name(r.provenance)}});
    }
    json traj = json::array();
    for (const auto& t : rep.trajectories)
        traj.push_back({{"generator", t.generator}, {"final_value", t.final_value}, {"weighted_limit", t.weighted_limit},
                        {"oscillation", t.oscillation}, {"converges", t.converges}});
    o.violation = !rep.all_hold;
    o.report = {{"p", rep.p},
                {"epsilon", rep.epsilon},
                {"horizon", rep.horizon},
                {"scaled_lambdas", rep.scaled_lambdas},
                {"lambdas", rep.lambdas},
                {"lambdas_in_interval", rep.lambdas_in_interval},
                {"bound_m", rep.bound_m},
                {"hypothesis_sum", rep.hypothesis_sum},
                {"hypothesis_decay", number(rep.hypothesis_decay)},
                {"hypothesis_converging", rep.hypothesis_converging},
                {"vacuously_convergent", rep.vacuous},
                {"deterministic_bound", rep.deterministic_bound},
                {"rows", rows},
                {"trajectories", traj},
                {"note", "finite-horizon diagnostics; no infinite-horizon claim"}};
    return o;
}

inline Outcome run_ottaviani(const ExperimentConfig& c, const ProductFile& pf) {
    Outcome o{CsvTable({"n", "s", "t", "r", "lhs", "final_capacity", "sum_a", "rhs", "hypothesis_vacuous",
                        "partition_verified", "holds", "provenance"}),
              {}};
    std::size_t n = c.horizon ? std::min(c.horizon, pf.n) : pf.n;
    std::optional<std::vector<double>> lambdas;
    if (c.center) lambdas = sequential_centering(pf.product, n).lambdas;
    json rows = json::array();
    for (double s : c.s)
        for (double t : c.t) {
            auto rep = ottaviani_check(pf.product, n, s, t, lambdas, c.guard);
            double sum_a = 0.0;
            for (double a : rep.a_capacities) sum_a += a;
            o.table.row() << n << s << t << rep.r << rep.lhs << rep.final_capacity << sum_a << rep.rhs
                          << rep.hypothesis_vacuous << rep.partition_verified << rep.holds << "exact";
            o.violation = o.violation || !rep.holds || !rep.partition_verified;
            rows.push_back({{"s", s}, {"t", t}, {"r", rep.r}, {"b_lower", rep.b_lower}, {"lhs", rep.lhs},
                            {"final_capacity", rep.final_capacity}, {"a_capacities", rep.a_capacities},
                            {"rhs", rep.rhs}, {"holds", rep.holds}});
        }
    o.provenance.insert("exact");
    o.report = {{"n", n}, {"rows", rows}};
    return o;
}

inline Outcome run_tail_capacity(const ExperimentConfig& c, const ProductFile& pf) {
    Outcome o{CsvTable({"base", "horizon", "capacity", "provenance"}), {}};
    std::size_t N = c.horizon ? std::min(c.horizon, pf.n) : pf.n;
    auto weights = c.p ? power_weights(N, *c.p) : std::vector<double>(N, 1.0);
    auto product = pf.product.prefix(N);
    auto lambdas = sequential_centering(product.scaled(weights), N).lambdas;
    for (std::size_t i = 0; i < N; ++i) lambdas[i] /= weights[i];
    auto bases = c.bases;
    if (bases.empty())
        for (std::size_t b = 0; b < N; ++b) bases.push_back(b);
    std::sort(bases.begin(), bases.end());
    double prev = std::numeric_limits<double>::infinity();
    bool monotone = true;
    json rows = json::array();
    for (auto b : bases) {
        double cap = tail_sup_capacity(product, lambdas, weights, N, b, *c.epsilon, c.guard);
        o.table.row() << b << N << cap << "exact";
        if (cap > prev + kTolerance) monotone = false;
        prev = cap;
        rows.push_back({{"base", b}, {"capacity", cap}});
    }
    o.provenance.insert("exact");
    o.violation = !monotone;
    o.report = {{"horizon", N}, {"epsilon", *c.epsilon}, {"monotone", monotone}, {"lambdas", lambdas}, {"rows", rows},
                {"note", "finite-horizon diagnostics; no infinite-horizon claim"}};
    return o;
}

inline Outcome dispatch(const ExperimentConfig& c) {
    auto model_json = read_json(c.model);
    const auto& cmd = c.command;
    if (cmd == "uncorrelated") return run_uncorrelated(c, model_json, c.model);
    if (cmd == "independence") return run_independence(c, model_json, c.model);
    if (cmd == "center") return run_center(c, model_json, c.model);
    if (needs_product(cmd)) {
        auto pf = parse_product(model_json, c.model.parent_path(), c.model.string());
        if (cmd == "lln-weak") return run_lln_weak(c, pf);
        if (cmd == "lln-strong") return run_lln_strong(c, pf);
        if (cmd == "ottaviani") return run_ottaviani(c, pf);
        return run_tail_capacity(c, pf);
    }
    // Plain-model commands also accept a product file and use its marginal.
    auto m = is_product_json(model_json) ? parse_product(model_json, c.model.parent_path(), c.model.string()).marginal
                                         : parse_model(model_json, c.model.string());
    if (cmd == "check-axioms") return run_check_axioms(c, m);
    return run_markov(c, m);
}

}  // namespace detail

/**
 * Runs one subcommand and writes <output>/<command>.csv and
 * <output>/<command>.json. Returns 0 on success, 2 when an inequality or
 * hypothesis fails, 1 on usage, config, or load errors.
 */
inline RunResult run(const std::string& command, ExperimentConfig config) {
    RunResult res;
    if (!command.empty()) config.command = command;
    if (auto diags = validate(config); !diags.empty()) {
        res.exit_code = exit_error;
        for (const auto& d : diags) res.message += (res.message.empty() ? "" : "\n") + d;
        return res;
    }
    if (config.output.empty()) {
        const char* env = std::getenv("SUBLIN_OUT_DIR");
        config.output = env && *env ? env : "sublin-out";
    }
    const auto cfg = config_json(config);
    json manifest{{"tool", "sublin"},
                  {"version", kToolVersion},
                  {"command", config.command},
                  {"config", cfg},
                  {"config_hash", fnv1a_hex(cfg.dump())},
                  {"seed", config.seed},
                  {"started_at", detail::utc_now()}};

    std::optional<detail::Outcome> outcome;
    try {
        outcome = detail::dispatch(config);
        manifest["status"] = outcome->violation ? "violation" : "ok";
        res.exit_code = outcome->violation ? exit_violation : exit_ok;
        res.message = outcome->violation ? config.command + ": violation detected" : config.command + ": ok";
    } catch (const HypothesisViolation& e) {
        manifest["status"] = "hypothesis_violation";
        res.exit_code = exit_violation;
        res.message = e.what();
    } catch (const GuardExceeded& e) {
        res.exit_code = exit_error;
        res.message = std::string(e.what()) + "; rerun with --mc <samples> for a Monte-Carlo estimate";
        return res;
    } catch (const std::exception& e) {
        res.exit_code = exit_error;
        res.message = e.what();
        return res;
    }

    std::error_code ec;
    std::filesystem::create_directories(config.output, ec);
    if (ec) {
        res.exit_code = exit_error;
        res.message = "cannot create output directory " + config.output.string();
        return res;
    }
    res.csv_path = config.output / (config.command + ".csv");
    res.json_path = config.output / (config.command + ".json");
    manifest["finished_at"] = detail::utc_now();
    manifest["exit_code"] = res.exit_code;
    manifest["message"] = res.message;
    if (outcome) {
        manifest["provenance"] = outcome->provenance;
        manifest["columns"] = outcome->table.header();
        manifest["rows"] = outcome->table.size();
        manifest["report"] = outcome->report;
    }
    try {
        if (outcome) write_atomic(res.csv_path, outcome->table.str());
        write_atomic(res.json_path, manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        res.exit_code = exit_error;
        res.message = e.what();
    }
    return res;
}

}  // namespace sublin
