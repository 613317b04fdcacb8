#pragma once

// Batch front end: JSON configuration in, JSON or CSV report out.
// Exit codes: 0 all checks pass, 1 violation or FAIL, 2 configuration error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"

#include "momcert/bounds.hpp"
#include "momcert/charfn.hpp"
#include "momcert/combinatorics.hpp"
#include "momcert/common.hpp"
#include "momcert/distmodel.hpp"
#include "momcert/exactmoments.hpp"
#include "momcert/oracle.hpp"

namespace momcert::cli {

using json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

enum class ExitCode : int { Ok = 0, Violation = 1, ConfigError = 2 };

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// One entry of the "variables" list; `count` copies of the same law.
struct VariableEntry {
    VariableSpec spec;
    std::size_t count = 1;
};

struct RunConfig {
    std::string command;
    std::vector<VariableEntry> variables;
    std::vector<double> p_values;
    std::vector<int> r_values;
    std::vector<std::size_t> n_values{4, 16, 64, 256};
    std::uint64_t seed = 1;
    std::size_t samples = 1'000'000;
    double tol = 1e-9;
    double confidence = 0.999;
    std::string output_format = "json";
    std::optional<std::string> output_path;
    std::optional<std::string> golden;

    std::vector<VariableSpec> expanded() const {
        std::vector<VariableSpec> out;
        for (const auto& e : variables)
            for (std::size_t i = 0; i < e.count; ++i) out.push_back(e.spec);
        return out;
    }
};

namespace detail {

inline double number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw ConfigError(std::string("variable is missing numeric field '") + key + "'");
    return j.at(key).get<double>();
}

inline VariableSpec parse_variable(const json& j) {
    if (!j.is_object() || !j.contains("family") || !j.at("family").is_string())
        throw ConfigError("each variable needs a 'family' string");
    const auto fam = j.at("family").get<std::string>();
    try {
        if (fam == "gaussian") return VariableSpec::gaussian(number(j, "sigma"));
        if (fam == "rademacher") return VariableSpec::rademacher(number(j, "sigma"));
        if (fam == "symmetric_exponential" || fam == "laplace")
            return VariableSpec::symmetric_exponential(number(j, "sigma"));
        if (fam == "uniform") return VariableSpec::uniform(number(j, "a"));
        if (fam == "symmetric_three_point") return VariableSpec::symmetric_three_point(number(j, "b"), number(j, "q"));
        if (fam == "raw_moments") {
            if (j.contains("atoms")) {
                const auto& a = j.at("atoms");
                const auto values = a.at("values").get<std::vector<double>>();
                const auto probs = a.at("probs").get<std::vector<double>>();
                const int order = j.value("max_order", 8);
                return VariableSpec::raw_moments(profile_from_atoms(values, probs, order));
            }
            if (!j.contains("moments")) throw ConfigError("raw_moments needs 'moments' or 'atoms'");
            const auto m = j.at("moments").get<std::vector<double>>();
            bool odd_zero = true;
            for (std::size_t l = 1; l < m.size(); l += 2) odd_zero = odd_zero && m[l] == 0.0;
            const bool centered = j.value("centered", m.size() > 1 && m[1] == 0.0);
            const bool symmetric = j.value("symmetric", odd_zero);
            return VariableSpec::raw_moments(MomentProfile(m, symmetric, centered));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError("invalid " + fam + " variable: " + e.what());
    }
    throw ConfigError("unknown family '" + fam + "'");
}

}  // namespace detail

inline RunConfig parse_config(const json& j) {
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    RunConfig cfg;
    try {
        cfg.command = j.at("command").get<std::string>();
        static const std::vector<std::string> commands{"moments", "bound", "verify", "check-lemmas", "scan"};
        if (std::find(commands.begin(), commands.end(), cfg.command) == commands.end())
            throw ConfigError("unknown command '" + cfg.command + "'");
        if (!j.contains("variables") || !j.at("variables").is_array() || j.at("variables").empty())
            throw ConfigError("at least one variable is required");
        for (const auto& v : j.at("variables")) {
            VariableEntry e{detail::parse_variable(v), 1};
            if (v.contains("count")) {
                const auto c = v.at("count").get<long long>();
                if (c < 1) throw ConfigError("variable count must be at least 1");
                e.count = static_cast<std::size_t>(c);
            }
            cfg.variables.push_back(std::move(e));
        }
        if (j.contains("p_values")) cfg.p_values = j.at("p_values").get<std::vector<double>>();
        if (j.contains("r_values")) cfg.r_values = j.at("r_values").get<std::vector<int>>();
        if (j.contains("n_values")) cfg.n_values = j.at("n_values").get<std::vector<std::size_t>>();
        cfg.seed = j.value("seed", cfg.seed);
        cfg.samples = j.value("samples", cfg.samples);
        cfg.tol = j.value("tol", cfg.tol);
        cfg.confidence = j.value("confidence", cfg.confidence);
        cfg.output_format = j.value("output_format", cfg.output_format);
        if (j.contains("output_path") && !j.at("output_path").is_null())
            cfg.output_path = j.at("output_path").get<std::string>();
        if (j.contains("golden") && !j.at("golden").is_null()) cfg.golden = j.at("golden").get<std::string>();
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("malformed configuration: ") + e.what());
    }
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
    if (cfg.output_format != "json" && cfg.output_format != "csv")
        throw ConfigError("output_format must be json or csv");
    for (double p : cfg.p_values)
        if (!(p >= 2.0) || !std::isfinite(p)) throw ConfigError("p values must be finite and >= 2");
    for (int r : cfg.r_values)
        if (r < 1) throw ConfigError("r values must be at least 1");
    const bool needs_p = cfg.command == "moments" || cfg.command == "scan";
    if (needs_p && cfg.p_values.empty()) throw ConfigError(cfg.command + " needs p_values");
    if ((cfg.command == "bound" || cfg.command == "verify") && cfg.p_values.empty() && cfg.r_values.empty())
        throw ConfigError(cfg.command + " needs p_values or r_values");
    if (cfg.command == "scan" && cfg.n_values.empty()) throw ConfigError("scan needs n_values");
    if (cfg.samples < 10000) throw ConfigError("samples must be at least 10^4");
    return cfg;
}

inline RunConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("configuration is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

/// A value with where it came from.
struct Tagged {
    double value = 0.0;
    std::string tag = "exact";  ///< exact | quadrature | mc
    double error = 0.0;

    json to_json() const {
        json j;
        j["value"] = value;
        j["tag"] = tag;
        if (tag != "exact" || error > 0.0) j["error"] = error;
        return j;
    }
};

/// One flat output row plus its nested JSON form.
struct Row {
    std::string statement_id;
    double p = 0.0;
    int r = 0;
    std::size_t n = 0;
    json body;
    std::map<std::string, std::string> flat;
    bool violation = false;
};

struct RunOutput {
    ExitCode code = ExitCode::Ok;
    std::string document;
    std::string diagnostics;
};

namespace detail {

inline std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

inline void put(Row& row, const std::string& key, const Tagged& t) {
    row.body[key] = t.to_json();
    row.flat[key] = fmt(t.value);
    row.flat[key + "_tag"] = t.tag;
    row.flat[key + "_error"] = fmt(t.error);
}

inline void put_opt(Row& row, const std::string& key, const std::optional<double>& v, const std::string& tag,
                    double error) {
    if (v) {
        put(row, key, Tagged{*v, tag, error});
    } else {
        row.body[key] = nullptr;
        row.flat[key] = "";
    }
}

inline std::string quantity_name(Quantity q) {
    return q == Quantity::Norm ? "norm" : "truncated_pth_moment";
}

inline Tagged tagged(const Ground& g) {
    return Tagged{g.value, g.provenance, g.error()};
}

inline OracleOptions oracle_options(const RunConfig& cfg) {
    return OracleOptions{cfg.tol, cfg.samples, cfg.seed, cfg.confidence};
}

/// Every bound statement applicable at the configured p and r values.
inline std::vector<BoundReport> all_reports(const SequenceSpec& seq, const RunConfig& cfg) {
    std::vector<BoundReport> out;
    const auto rejected = [&](const std::string& id, double p, std::optional<int> r, const std::string& why) {
        BoundReport rep;
        rep.statement_id = id;
        rep.p = p;
        rep.r = r;
        rep.n = seq.size();
        rep.center = gaussian_lp_norm(p) * std::sqrt(seq.total_variance());
        rep.assumptions.push_back({"input accepted", false, why});
        rep.permutation = seq.permutation();
        return rep;
    };
    for (double p : cfg.p_values) {
        if (p <= 4.0) {
            try {
                out.push_back(bound_p_2_4(seq, p));
            } catch (const std::exception& e) {
                out.push_back(rejected("two_to_four", p, std::nullopt, e.what()));
            }
        }
        for (auto& rep : latala_logconcave_bounds(seq, p)) out.push_back(std::move(rep));
        for (int r : cfg.r_values) {
            if (p > 2.0 * r) continue;
            try {
                out.push_back(bound_general_p(seq, p, r));
            } catch (const std::exception& e) {
                out.push_back(rejected("general_p_truncated", p, r, e.what()));
            }
        }
    }
    for (int r : cfg.r_values) {
        if (r < 2) continue;
        try {
            out.push_back(bound_even_symmetric(seq, r));
        } catch (const std::exception& e) {
            out.push_back(rejected("even_symmetric", 2.0 * r, r, e.what()));
        }
        try {
            out.push_back(bound_even_centered(seq, r));
        } catch (const std::exception& e) {
            out.push_back(rejected("even_centered", 2.0 * r, r, e.what()));
        }
    }
    return out;
}

inline Row report_row(const BoundReport& rep) {
    Row row;
    row.statement_id = rep.statement_id;
    row.p = rep.p;
    row.r = rep.r.value_or(0);
    row.n = rep.n;
    auto& b = row.body;
    b["statement_id"] = rep.statement_id;
    b["p"] = rep.p;
    b["r"] = rep.r ? json(*rep.r) : json(nullptr);
    b["n"] = rep.n;
    b["quantity"] = quantity_name(rep.quantity);
    b["truncation_start"] = rep.truncation_start;
    b["certifying"] = rep.certifying;
    row.flat["statement_id"] = rep.statement_id;
    row.flat["p"] = fmt(rep.p);
    row.flat["r"] = rep.r ? std::to_string(*rep.r) : "";
    row.flat["n"] = std::to_string(rep.n);
    row.flat["quantity"] = quantity_name(rep.quantity);
    row.flat["truncation_start"] = std::to_string(rep.truncation_start);
    row.flat["certifying"] = rep.certifying ? "true" : "false";
    put(row, "center", Tagged{rep.center});
    const std::string tag = rep.provenance == "quadrature" ? "quadrature" : "exact";
    put_opt(row, "lower", rep.lower, tag, rep.bound_error);
    put_opt(row, "upper", rep.upper, tag, rep.bound_error);
    put_opt(row, "radius", rep.radius, "exact", 0.0);
    json constants = json::object();
    for (const auto& [k, v] : rep.constants) constants[k] = Tagged{v}.to_json();
    b["constants"] = constants;
    json aux = json::object();
    for (const auto& [k, v] : rep.auxiliary) aux[k] = Tagged{v, k == "head_norm" ? tag : "exact", 0.0}.to_json();
    b["auxiliary"] = aux;
    json assumptions = json::array();
    for (const auto& a : rep.assumptions)
        assumptions.push_back({{"name", a.name}, {"satisfied", a.satisfied}, {"detail", a.detail}});
    b["assumptions"] = assumptions;
    b["permutation"] = rep.permutation;
    row.flat["reason"] = rep.failed_assumptions();
    return row;
}

inline void attach_verdict(Row& row, const BoundReport& rep, const SequenceSpec& seq, const RunConfig& cfg,
                           bool allow_mc) {
    row.body["ground"] = nullptr;
    row.body["verdict"] = "SKIP";
    row.flat["verdict"] = "SKIP";
    if (!rep.certifying) return;
    const bool even = rep.p == std::floor(rep.p) && static_cast<long long>(rep.p) % 2 == 0;
    const bool cheap = even || (rep.p > 2.0 && rep.p < 4.0) || all_finite_support(seq.variables());
    if (!cheap && !allow_mc) return;
    try {
        const auto g = ground_truth_for(seq, rep, oracle_options(cfg));
        const auto v = verify_report(rep, g);
        put(row, "ground", tagged(g));
        row.body["verdict"] = v.pass ? "PASS" : "FAIL";
        row.body["margin"] = v.margin;
        row.flat["verdict"] = v.pass ? "PASS" : "FAIL";
        row.flat["margin"] = fmt(v.margin);
        if (!v.pass) row.violation = true;
    } catch (const Refusal& e) {
        row.body["oracle_refusal"] = e.what();
        row.flat["reason"] += std::string(row.flat["reason"].empty() ? "" : "; ") + e.what();
    }
}

inline std::vector<Row> run_bound(const RunConfig& cfg, bool verify) {
    const SequenceSpec seq(cfg.expanded());
    const auto reports = all_reports(seq, cfg);
    std::vector<Row> rows(reports.size());
    for_each_shard(reports.size(), [&](std::size_t i) {
        rows[i] = report_row(reports[i]);
        attach_verdict(rows[i], reports[i], seq, cfg, verify);
    });
    return rows;
}

/// Re-checks the bounds stored in a previously emitted bound document.
inline std::vector<Row> run_verify_golden(const RunConfig& cfg) {
    std::ifstream in(*cfg.golden);
    if (!in) throw ConfigError("cannot open golden file " + *cfg.golden);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("golden file is not valid JSON: ") + e.what());
    }
    if (!doc.contains("rows") || !doc.at("rows").is_array()) throw ConfigError("golden file has no rows");
    const SequenceSpec seq(cfg.expanded());
    std::vector<Row> rows;
    for (const auto& src : doc.at("rows")) {
        if (!src.value("certifying", false)) continue;
        BoundReport rep;
        try {
            rep.statement_id = src.at("statement_id").get<std::string>();
            rep.p = src.at("p").get<double>();
            if (!src.at("r").is_null()) rep.r = src.at("r").get<int>();
            rep.n = src.at("n").get<std::size_t>();
            rep.quantity = src.at("quantity").get<std::string>() == "norm" ? Quantity::Norm : Quantity::TruncatedPthMoment;
            rep.truncation_start = src.at("truncation_start").get<std::size_t>();
            rep.center = src.at("center").at("value").get<double>();
            if (!src.at("lower").is_null()) rep.lower = src.at("lower").at("value").get<double>();
            if (!src.at("upper").is_null()) rep.upper = src.at("upper").at("value").get<double>();
            if (!src.at("radius").is_null()) rep.radius = src.at("radius").at("value").get<double>();
        } catch (const json::exception& e) {
            throw ConfigError(std::string("malformed golden row: ") + e.what());
        }
        if (rep.n != seq.size()) throw ConfigError("golden row was produced for a different number of variables");
        rep.certifying = true;
        Row row = report_row(rep);
        attach_verdict(row, rep, seq, cfg, true);
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<Row> run_moments(const RunConfig& cfg) {
    const auto specs = cfg.expanded();
    const auto opts = oracle_options(cfg);
    double total_var = 0.0;
    for (const auto& s : specs) total_var += s.variance();
    const bool families = std::none_of(specs.begin(), specs.end(), [](const VariableSpec& s) { return s.is_raw(); });
    const bool centered = std::all_of(specs.begin(), specs.end(), [](const VariableSpec& s) { return s.centered(); });
    const bool symmetric = std::all_of(specs.begin(), specs.end(), [](const VariableSpec& s) { return s.symmetric(); });

    std::vector<Row> rows;
    const auto emit = [&](double p, const std::string& engine, const Tagged& moment) {
        Row row;
        row.statement_id = engine;
        row.p = p;
        row.n = specs.size();
        row.body["engine"] = engine;
        row.body["p"] = p;
        row.body["n"] = specs.size();
        row.flat["engine"] = engine;
        row.flat["p"] = fmt(p);
        row.flat["n"] = std::to_string(specs.size());
        put(row, "moment", moment);
        const double norm = std::pow(moment.value, 1.0 / p);
        const double norm_err = std::abs(std::pow(moment.value + moment.error, 1.0 / p) - norm);
        put(row, "norm", Tagged{norm, moment.tag, norm_err});
        put(row, "gaussian_center", Tagged{gaussian_lp_norm(p) * std::sqrt(total_var)});
        rows.push_back(std::move(row));
    };
    for (double p : cfg.p_values) {
        const bool even = p == std::floor(p) && static_cast<long long>(p) % 2 == 0;
        if (even && centered) {
            try {
                std::vector<MomentProfile> profiles;
                for (const auto& s : specs) profiles.push_back(moments_of(s, static_cast<int>(p)));
                emit(p, "even_moment_recursion", Tagged{sum_even_moment(profiles, static_cast<int>(p / 2))});
            } catch (const std::invalid_argument&) {
            }
        }
        if (all_finite_support(specs)) {
            try {
                emit(p, "finite_support_convolution", Tagged{exact_discrete_moment(specs, p)});
            } catch (const Refusal&) {
            }
        }
        if (p > 2.0 && p < 4.0 && families && symmetric) {
            const auto res = sum_abs_moment_via_haagerup(specs, p, cfg.tol);
            emit(p, "characteristic_function_quadrature", Tagged{res.value, "quadrature", res.total_error()});
        }
        if (families) {
            const auto est = mc_moment(specs, p, cfg.samples, cfg.seed, cfg.confidence);
            const double z = boost::math::quantile(boost::math::normal(), 0.5 + 0.5 * cfg.confidence);
            emit(p, "monte_carlo", Tagged{est.moment_mean, "mc", z * est.moment_se});
        }
    }
    return rows;
}

inline Row check_row(const std::string& check, const std::string& subject, std::size_t violations, bool applicable,
                     const json& details) {
    Row row;
    row.statement_id = check;
    row.body["check"] = check;
    row.body["subject"] = subject;
    row.body["applicable"] = applicable;
    row.body["violations"] = violations;
    row.body["details"] = details;
    row.flat["check"] = check;
    row.flat["subject"] = subject;
    row.flat["applicable"] = applicable ? "true" : "false";
    row.flat["violations"] = std::to_string(violations);
    row.violation = violations > 0;
    return row;
}

inline std::vector<Row> run_check_lemmas(const RunConfig& cfg) {
    const auto specs = cfg.expanded();
    const SequenceSpec seq(specs);
    const auto grid = default_t_grid();
    std::vector<Row> rows;
    const bool families = std::none_of(specs.begin(), specs.end(), [](const VariableSpec& s) { return s.is_raw(); });

    for (const auto& e : cfg.variables) {
        if (e.spec.is_raw()) continue;
        const auto rep = check_cosine_bounds(e.spec, grid);
        rows.push_back(check_row("cosine_bounds", e.spec.family_name(), rep.violations.size(), true,
                                 {{"min_lower_slack", rep.min_lower_slack},
                                  {"min_upper_slack", rep.min_upper_slack},
                                  {"max_lower_slack", rep.max_lower_slack},
                                  {"max_upper_slack", rep.max_upper_slack}}));
    }

    if (families && seq.size() >= 2) {
        std::vector<VariableSpec> gauss;
        for (double v : seq.variances()) gauss.push_back(VariableSpec::gaussian(std::sqrt(v)));
        const std::pair<std::string, std::pair<std::vector<VariableSpec>, std::vector<VariableSpec>>> cases[] = {
            {"X = variables, Y = gaussian", {{seq.variables().begin(), seq.variables().end()}, gauss}},
            {"X = gaussian, Y = variables", {gauss, {seq.variables().begin(), seq.variables().end()}}},
        };
        for (const auto& [subject, xy] : cases) {
            const auto m = static_cast<std::size_t>(compute_m(SequenceSpec(xy.second)));
            const auto rep = check_main_charfn_inequality(xy.first, xy.second, m, grid);
            json pre = json::array();
            for (const auto& c : rep.preconditions)
                pre.push_back({{"name", c.name}, {"satisfied", c.satisfied}, {"detail", c.detail}});
            rows.push_back(check_row("charfn_inequality", subject, rep.violations.size(), rep.preconditions_hold,
                                     {{"m", m}, {"min_slack", rep.min_slack}, {"preconditions", pre}}));
        }
    }

    const auto weights = WeightVector::from_variances(seq.variances());
    for (int r : cfg.r_values) {
        const auto big = check_big_lemma(weights, r);
        rows.push_back(check_row("rademacher_consecutive_moments", "r=" + std::to_string(r), big.satisfied ? 0 : 1,
                                 true, {{"lhs", big.lhs}, {"rhs", big.rhs}, {"ratio", big.ratio}}));

        const int n = static_cast<int>(std::min<std::size_t>(seq.size(), 10));
        std::size_t bad_support = 0, bad_nosing = 0, checked = 0;
        for (std::uint32_t mask = 1; mask < (1U << n); ++mask) {
            std::vector<std::size_t> support;
            for (int k = 0; k < n; ++k)
                if (mask & (1U << k)) support.push_back(static_cast<std::size_t>(k));
            const int i = static_cast<int>(support.size());
            if (i > r) continue;
            ++checked;
            IndexConstraint c1{r, std::nullopt, false, support};
            std::size_t cnt = 0;
            enumerate(n, c1, [&](const MultiIndex&) { ++cnt; });
            if (cnt != count_support_compositions(r, i)) ++bad_support;
            IndexConstraint c2{2 * r, std::nullopt, true, support};
            cnt = 0;
            enumerate(n, c2, [&](const MultiIndex&) { ++cnt; });
            if (cnt != count_no_singleton_compositions(r, i)) ++bad_nosing;
        }
        rows.push_back(check_row("count_support_compositions", "r=" + std::to_string(r), bad_support, true,
                                 {{"support_sets", checked}}));
        rows.push_back(check_row("count_no_singleton_compositions", "r=" + std::to_string(r), bad_nosing, true,
                                 {{"support_sets", checked}}));

        if (r < 2) continue;
        const auto tail_json = [](const TailInequalityReport& t) {
            return json{{"C", t.C}, {"cutoff", t.cutoff}, {"tail_moment", t.tail_moment},
                        {"symmetric_sum_bound", t.symmetric_sum_bound}, {"rademacher_bound", t.rademacher_bound}};
        };
        if (seq.all_symmetric()) {
            const auto t = check_tail_symmetric(seq, r);
            rows.push_back(check_row("tail_symmetric", "r=" + std::to_string(r), t.applicable && !t.satisfied ? 1 : 0,
                                     t.applicable, tail_json(t)));
        }
        if (seq.all_centered()) {
            const auto t = check_tail_centered(seq, r);
            rows.push_back(check_row("tail_centered", "r=" + std::to_string(r), t.applicable && !t.satisfied ? 1 : 0,
                                     t.applicable, tail_json(t)));
        }
    }
    return rows;
}

inline std::vector<Row> run_scan(const RunConfig& cfg) {
    struct Cell {
        std::size_t family;
        std::size_t n;
        double p;
    };
    std::vector<Cell> cells;
    for (std::size_t f = 0; f < cfg.variables.size(); ++f)
        for (std::size_t n : cfg.n_values)
            for (double p : cfg.p_values) cells.push_back({f, n, p});

    std::vector<std::vector<Row>> out(cells.size());
    for_each_shard(cells.size(), [&](std::size_t idx) {
        const auto& cell = cells[idx];
        const auto base = cfg.variables[cell.family].spec.with_variance(1.0 / static_cast<double>(cell.n));
        const SequenceSpec seq(std::vector<VariableSpec>(cell.n, base));
        const double gp = gaussian_lp_norm(cell.p);
        std::vector<BoundReport> reps;
        const bool even = cell.p == std::floor(cell.p) && static_cast<long long>(cell.p) % 2 == 0;
        if (seq.all_symmetric()) {
            if (cell.p <= 4.0) reps.push_back(bound_p_2_4(seq, cell.p));
            if (even && cell.p >= 4.0) reps.push_back(bound_even_symmetric(seq, static_cast<int>(cell.p / 2)));
        }
        if (seq.all_centered() && even && cell.p >= 4.0)
            reps.push_back(bound_even_centered(seq, static_cast<int>(cell.p / 2)));
        if (seq.all_log_concave()) reps.push_back(latala_logconcave_bounds(seq, cell.p)[0]);

        std::optional<Ground> truth;
        try {
            truth = ground_truth(seq.variables(), cell.p, Quantity::Norm, oracle_options(cfg));
        } catch (const Refusal&) {
        }
        for (const auto& rep : reps) {
            Row row;
            row.statement_id = rep.statement_id;
            row.p = cell.p;
            row.n = cell.n;
            row.body["statement_id"] = rep.statement_id;
            row.body["family"] = base.family_name();
            row.body["n"] = cell.n;
            row.body["p"] = cell.p;
            row.body["certifying"] = rep.certifying;
            row.flat["statement_id"] = rep.statement_id;
            row.flat["family"] = base.family_name();
            row.flat["n"] = std::to_string(cell.n);
            row.flat["p"] = fmt(cell.p);
            row.flat["certifying"] = rep.certifying ? "true" : "false";
            put(row, "gaussian_norm", Tagged{gp});
            // The even-centered statement is one-sided: its radius is upper - center.
            std::optional<double> radius = rep.radius;
            if (!radius && rep.certifying && rep.upper && !rep.lower) radius = *rep.upper - rep.center;
            put_opt(row, "radius", radius, "exact", 0.0);
            if (truth) {
                const double dev = std::abs(truth->value - gp);
                put(row, "norm", tagged(*truth));
                put(row, "deviation", Tagged{dev, truth->provenance, truth->error()});
                if (rep.certifying && radius) {
                    const bool one_sided = !rep.lower;
                    const double measured = one_sided ? truth->lo - gp : std::max(truth->lo - gp, gp - truth->hi);
                    const bool within = measured <= *radius;
                    row.body["within_radius"] = within;
                    row.flat["within_radius"] = within ? "true" : "false";
                    row.violation = !within;
                }
            }
            out[idx].push_back(std::move(row));
        }
    });
    std::vector<Row> rows;
    for (auto& v : out)
        for (auto& r : v) rows.push_back(std::move(r));
    return rows;
}

inline std::string render(const RunConfig& cfg, std::vector<Row> rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        return std::tie(a.statement_id, a.p, a.r, a.n) < std::tie(b.statement_id, b.p, b.r, b.n);
    });
    if (cfg.output_format == "csv") {
        std::vector<std::string> columns;
        for (const auto& row : rows)
            for (const auto& [k, v] : row.flat)
                if (std::find(columns.begin(), columns.end(), k) == columns.end()) columns.push_back(k);
        std::sort(columns.begin(), columns.end());
        const auto quote = [](const std::string& s) {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char c : s) {
                if (c == '"') q += '"';
                q += c;
            }
            return q + "\"";
        };
        std::string out;
        for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
        out += "\n";
        for (const auto& row : rows) {
            for (std::size_t i = 0; i < columns.size(); ++i) {
                const auto it = row.flat.find(columns[i]);
                out += (i ? "," : "") + (it == row.flat.end() ? std::string() : quote(it->second));
            }
            out += "\n";
        }
        return out;
    }
    json doc;
    doc["schema_version"] = kSchemaVersion;
    doc["command"] = cfg.command;
    doc["seed"] = cfg.seed;
    json arr = json::array();
    for (auto& row : rows) arr.push_back(std::move(row.body));
    doc["rows"] = std::move(arr);
    return doc.dump(2) + "\n";
}

}  // namespace detail

/// Runs one configured command. Configuration problems surface as
/// ConfigError; refusals from the engines are reported in diagnostics.
inline RunOutput run(const RunConfig& cfg) {
    std::vector<Row> rows;
    if (cfg.command == "moments") rows = detail::run_moments(cfg);
    else if (cfg.command == "bound") rows = detail::run_bound(cfg, false);
    else if (cfg.command == "verify") rows = cfg.golden ? detail::run_verify_golden(cfg) : detail::run_bound(cfg, true);
    else if (cfg.command == "check-lemmas") rows = detail::run_check_lemmas(cfg);
    else if (cfg.command == "scan") rows = detail::run_scan(cfg);
    else throw ConfigError("unknown command '" + cfg.command + "'");

    RunOutput out;
    const bool gate = cfg.command == "verify" || cfg.command == "check-lemmas" || cfg.command == "scan";
    if (gate && std::any_of(rows.begin(), rows.end(), [](const Row& r) { return r.violation; })) {
        out.code = ExitCode::Violation;
        out.diagnostics = "one or more checks failed";
    }
    out.document = detail::render(cfg, std::move(rows));
    return out;
}

}  // namespace momcert::cli
