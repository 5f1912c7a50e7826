#pragma once

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <string>
#include <variant>

#include "agent.hpp"
#include "annotate.hpp"
#include "assign.hpp"
#include "baseline.hpp"
#include "errors.hpp"
#include "repair.hpp"
#include "transform.hpp"

namespace nmrx {

/**
 * Minimal TOML-style config reader: [section] headers (dots allowed), and
 * `key = value` lines where a value is a quoted string, true/false, or a
 * number. Comments start with '#'. Keys are exposed flattened as
 * "section.key"; unknown keys are ignored by the consumers so configs can
 * stay partial.
 */
class ConfigFile {
public:
    using Value = std::variant<bool, double, std::string>;

    static ConfigFile parse(const std::string& text) {
        ConfigFile cfg;
        std::string section;
        std::size_t line_no = 0;
        std::size_t pos = 0;
        while (pos <= text.size()) {
            std::size_t eol = text.find('\n', pos);
            if (eol == std::string::npos) eol = text.size();
            std::string line = text.substr(pos, eol - pos);
            pos = eol + 1;
            ++line_no;
            std::string t = trim(line);
            if (t.empty() || t[0] == '#') {
                if (pos > text.size()) break;
                continue;
            }
            if (t.front() == '[') {
                if (t.back() != ']')
                    fail(errc::config_error,
                         "line " + std::to_string(line_no) + ": unterminated section");
                section = trim(t.substr(1, t.size() - 2));
                if (section.empty())
                    fail(errc::config_error,
                         "line " + std::to_string(line_no) + ": empty section name");
            } else {
                std::size_t eq = t.find('=');
                if (eq == std::string::npos)
                    fail(errc::config_error,
                         "line " + std::to_string(line_no) + ": expected key = value");
                std::string key = trim(t.substr(0, eq));
                std::string raw = trim(t.substr(eq + 1));
                if (key.empty() || raw.empty())
                    fail(errc::config_error,
                         "line " + std::to_string(line_no) + ": empty key or value");
                std::string full = section.empty() ? key : section + "." + key;
                cfg.values_[full] = parse_value(raw, line_no);
            }
            if (pos > text.size()) break;
        }
        return cfg;
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    double number_or(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const double* v = std::get_if<double>(&it->second);
        if (!v) fail(errc::config_error, "'" + key + "' must be a number");
        return *v;
    }

    int integer_or(const std::string& key, int fallback) const {
        double v = number_or(key, static_cast<double>(fallback));
        int i = static_cast<int>(v);
        if (static_cast<double>(i) != v)
            fail(errc::config_error, "'" + key + "' must be an integer");
        return i;
    }

    bool flag_or(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const bool* v = std::get_if<bool>(&it->second);
        if (!v) fail(errc::config_error, "'" + key + "' must be true or false");
        return *v;
    }

    std::string string_or(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        const std::string* v = std::get_if<std::string>(&it->second);
        if (!v) fail(errc::config_error, "'" + key + "' must be a quoted string");
        return *v;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = 0, b = s.size();
        while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
        while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
        return s.substr(a, b - a);
    }

    static Value parse_value(const std::string& raw, std::size_t line_no) {
        if (raw.front() == '"') {
            if (raw.size() < 2 || raw.back() != '"')
                fail(errc::config_error,
                     "line " + std::to_string(line_no) + ": unterminated string");
            std::string body = raw.substr(1, raw.size() - 2);
            if (body.find('"') != std::string::npos)
                fail(errc::config_error,
                     "line " + std::to_string(line_no) + ": embedded quote");
            return body;
        }
        if (raw == "true") return true;
        if (raw == "false") return false;
        char* end = nullptr;
        double v = std::strtod(raw.c_str(), &end);
        if (end == raw.c_str() || *end != '\0')
            fail(errc::config_error,
                 "line " + std::to_string(line_no) + ": cannot parse value '" + raw + "'");
        return v;
    }

    std::map<std::string, Value> values_;
};

// One config object drives the whole pipeline; every knob has a working
// default so an empty file is a valid config.
struct PipelineConfig {
    // transform
    std::string apodization = "exponential";
    double line_broadening_hz = 1.0;
    double gaussian_sigma_hz = 2.0;

    // correct
    double threshold_sigma = 5.0;
    BaselineConfig baseline;

    // annotate
    AnnotateConfig annotate;

    // scoring and reranking
    AssignConfig assign_h1 = default_assign_config(Nucleus::H1);
    AssignConfig assign_c13 = default_assign_config(Nucleus::C13);
    RerankOptions rerank;

    // tools
    SearchConfig search;
    std::size_t coarse_factor = 4;
    RepairConfig repair;

    // agent
    RewardWeights rewards;
    PolicySpec policy;
    int budget = 8;

    // run
    std::string database_path;
    std::string h_table_path;
    std::string c_table_path;
    unsigned long long seed = 1;

    void validate(bool check_files) const {
        require(line_broadening_hz >= 0 && gaussian_sigma_hz > 0, errc::config_error,
                "apodization widths out of range");
        require(apodization == "exponential" || apodization == "gaussian" ||
                    apodization == "sine_bell" || apodization == "none",
                errc::config_error, "unknown apodization '" + apodization + "'");
        require(threshold_sigma > 0, errc::config_error,
                "threshold_sigma must be positive");
        require(budget >= 1, errc::config_error, "budget must be >= 1");
        assign_h1.validate();
        assign_c13.validate();
        rewards.validate();
        policy.validate();
        if (check_files) {
            for (const std::string* p :
                 {&database_path, &h_table_path, &c_table_path}) {
                if (!p->empty())
                    require(std::filesystem::exists(*p), errc::config_error,
                            "referenced file does not exist: " + *p);
            }
        }
    }
};

namespace detail {

inline void load_assign_section(const ConfigFile& f, const std::string& prefix,
                                AssignConfig& cfg) {
    cfg.sigma_delta = f.number_or(prefix + ".sigma_delta", cfg.sigma_delta);
    cfg.kappa_disc = f.number_or(prefix + ".kappa_disc", cfg.kappa_disc);
    cfg.tau_j = f.number_or(prefix + ".tau_j", cfg.tau_j);
    cfg.lambda_match = f.number_or(prefix + ".lambda_match", cfg.lambda_match);
    cfg.lambda_cov = f.number_or(prefix + ".lambda_cov", cfg.lambda_cov);
    cfg.lambda_obs = f.number_or(prefix + ".lambda_obs", cfg.lambda_obs);
    cfg.alpha = f.number_or(prefix + ".alpha", cfg.alpha);
    cfg.beta = f.number_or(prefix + ".beta", cfg.beta);
    cfg.merged_rate = f.number_or(prefix + ".merged_rate", cfg.merged_rate);
    cfg.merge_tolerance_ppm =
        f.number_or(prefix + ".merge_tolerance_ppm", cfg.merge_tolerance_ppm);
    cfg.floor_phi = f.number_or(prefix + ".floor_phi", cfg.floor_phi);
}

}  // namespace detail

inline PipelineConfig pipeline_config_from_toml(const std::string& text) {
    ConfigFile f = ConfigFile::parse(text);
    PipelineConfig cfg;

    cfg.apodization = f.string_or("transform.apodization", cfg.apodization);
    cfg.line_broadening_hz =
        f.number_or("transform.line_broadening_hz", cfg.line_broadening_hz);
    cfg.gaussian_sigma_hz =
        f.number_or("transform.gaussian_sigma_hz", cfg.gaussian_sigma_hz);

    cfg.threshold_sigma = f.number_or("correct.threshold_sigma", cfg.threshold_sigma);
    std::string method = f.string_or(
        "correct.baseline_method",
        cfg.baseline.method == BaselineMethod::iasls ? "iasls" : "polynomial");
    if (method == "iasls")
        cfg.baseline.method = BaselineMethod::iasls;
    else if (method == "polynomial")
        cfg.baseline.method = BaselineMethod::polynomial;
    else
        fail(errc::config_error, "unknown baseline_method '" + method + "'");
    cfg.baseline.polynomial_degree =
        f.integer_or("correct.polynomial_degree", cfg.baseline.polynomial_degree);

    cfg.annotate.threshold_sigma = cfg.threshold_sigma;
    cfg.annotate.gap_hz = f.number_or("annotate.gap_hz", cfg.annotate.gap_hz);
    cfg.annotate.classifier.ratio_tol =
        f.number_or("annotate.ratio_tol", cfg.annotate.classifier.ratio_tol);
    cfg.annotate.classifier.j_tol_hz =
        f.number_or("annotate.j_tol_hz", cfg.annotate.classifier.j_tol_hz);
    cfg.annotate.anchor_protons =
        f.integer_or("annotate.anchor_protons", cfg.annotate.anchor_protons);
    cfg.annotate.min_anchor_area_fraction = f.number_or(
        "annotate.min_anchor_area_fraction", cfg.annotate.min_anchor_area_fraction);
    cfg.annotate.min_cluster_intensity_fraction =
        f.number_or("annotate.min_cluster_intensity_fraction",
                    cfg.annotate.min_cluster_intensity_fraction);

    detail::load_assign_section(f, "assign.h1", cfg.assign_h1);
    detail::load_assign_section(f, "assign.c13", cfg.assign_c13);

    cfg.rerank.use_hard_case =
        f.flag_or("rerank.use_hard_case", cfg.rerank.use_hard_case);
    cfg.rerank.near_tie_margin =
        f.number_or("rerank.near_tie_margin", cfg.rerank.near_tie_margin);
    cfg.rerank.curvature = f.number_or("rerank.curvature", cfg.rerank.curvature);
    cfg.rerank.embed_dim = static_cast<std::size_t>(
        f.integer_or("rerank.embed_dim", static_cast<int>(cfg.rerank.embed_dim)));

    cfg.search.tol_ppm_h = f.number_or("search.tol_ppm_h", cfg.search.tol_ppm_h);
    cfg.search.tol_ppm_c = f.number_or("search.tol_ppm_c", cfg.search.tol_ppm_c);
    cfg.coarse_factor = static_cast<std::size_t>(
        f.integer_or("search.coarse_factor", static_cast<int>(cfg.coarse_factor)));

    cfg.repair.tol_ppm_h = f.number_or("repair.tol_ppm_h", cfg.repair.tol_ppm_h);
    cfg.repair.tol_ppm_c = f.number_or("repair.tol_ppm_c", cfg.repair.tol_ppm_c);
    cfg.repair.max_iters = f.integer_or("repair.max_iters", cfg.repair.max_iters);
    cfg.repair.edits.class_swap =
        f.flag_or("repair.class_swap", cfg.repair.edits.class_swap);
    cfg.repair.edits.bond_toggle =
        f.flag_or("repair.bond_toggle", cfg.repair.edits.bond_toggle);
    cfg.repair.edits.methyl = f.flag_or("repair.methyl", cfg.repair.edits.methyl);

    cfg.rewards.lambda_fmt = f.number_or("rewards.lambda_fmt", cfg.rewards.lambda_fmt);
    cfg.rewards.lambda_eff = f.number_or("rewards.lambda_eff", cfg.rewards.lambda_eff);
    cfg.rewards.lambda_tool =
        f.number_or("rewards.lambda_tool", cfg.rewards.lambda_tool);
    cfg.rewards.lambda_align =
        f.number_or("rewards.lambda_align", cfg.rewards.lambda_align);
    cfg.rewards.t0_budget = f.integer_or("rewards.t0", cfg.rewards.t0_budget);
    cfg.rewards.alpha_succ = f.number_or("rewards.alpha_succ", cfg.rewards.alpha_succ);
    cfg.rewards.alpha_prog = f.number_or("rewards.alpha_prog", cfg.rewards.alpha_prog);
    cfg.rewards.alpha_fail = f.number_or("rewards.alpha_fail", cfg.rewards.alpha_fail);
    cfg.rewards.beta1 = f.number_or("rewards.beta1", cfg.rewards.beta1);
    cfg.rewards.beta2 = f.number_or("rewards.beta2", cfg.rewards.beta2);

    cfg.policy.name = f.string_or("policy.name", cfg.policy.name);
    cfg.policy.generate_n = f.integer_or("policy.generate_n", cfg.policy.generate_n);
    cfg.policy.search_k = f.integer_or("policy.search_k", cfg.policy.search_k);
    cfg.policy.optimize_max_iters =
        f.integer_or("policy.optimize_max_iters", cfg.policy.optimize_max_iters);
    cfg.policy.use_hard_case =
        f.flag_or("policy.use_hard_case", cfg.policy.use_hard_case);
    cfg.policy.sim_gate = f.number_or("policy.sim_gate", cfg.policy.sim_gate);
    cfg.policy.stop_score = f.number_or("policy.stop_score", cfg.policy.stop_score);
    cfg.budget = f.integer_or("policy.budget", cfg.budget);

    cfg.database_path = f.string_or("run.database_path", cfg.database_path);
    cfg.h_table_path = f.string_or("run.h_table_path", cfg.h_table_path);
    cfg.c_table_path = f.string_or("run.c_table_path", cfg.c_table_path);
    double seed = f.number_or("run.seed", static_cast<double>(cfg.seed));
    require(seed >= 0, errc::config_error, "seed must be nonnegative");
    cfg.seed = static_cast<unsigned long long>(seed);

    cfg.validate(false);
    return cfg;
}

}  // namespace nmrx
