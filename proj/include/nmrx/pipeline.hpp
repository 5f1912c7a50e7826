#pragma once

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "agent.hpp"
#include "agent_json.hpp"
#include "annotate.hpp"
#include "annotate_json.hpp"
#include "baseline.hpp"
#include "config.hpp"
#include "database.hpp"
#include "fid_json.hpp"
#include "jcamp.hpp"
#include "molecule_json.hpp"
#include "nmr_text.hpp"
#include "phase.hpp"
#include "transform.hpp"

namespace nmrx {

/** Processing record for one input FID, kept per nucleus in the report. */
struct SpectrumReport {
    std::string input_path;
    Nucleus nucleus = Nucleus::H1;
    PhaseParams phase;
    bool phase_low_confidence = false;
    double noise_sigma = 0.0;
    std::vector<std::string> processing_log;
    AnnotatedSpectrum annotated;
    std::string nmr_text;
};

struct RankedCandidate {
    std::string id;
    double score = 0.0;  // assignment cost, lower is better
    double sim = 0.0;    // peak set similarity to the observed spectra
};

struct ElucidationReport {
    std::vector<SpectrumReport> spectra;
    std::vector<RankedCandidate> ranking;
    Trajectory trajectory;
    unsigned long long seed = 0;
};

namespace detail {

// Rethrows any pipeline error with the failing stage and input prepended,
// so a report run over many files points straight at the culprit.
template <typename F>
auto with_stage(const char* stage, const std::string& path, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const Error& e) {
        fail(e.code(), std::string(stage) + " failed for '" + path + "': " + e.what());
    }
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), errc::io_error, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    require(!in.bad(), errc::io_error, "read from '" + path + "' failed");
    return buf.str();
}

inline bool has_suffix(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() &&
           s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

inline WindowFunction window_from_config(const PipelineConfig& cfg) {
    if (cfg.apodization == "gaussian") return WindowFunction::gaussian(cfg.gaussian_sigma_hz);
    if (cfg.apodization == "sine_bell") return WindowFunction::sine_bell(M_PI / 2);
    return WindowFunction::exponential(cfg.line_broadening_hz);
}

}  // namespace detail

/** Reads a FID from disk, dispatching on extension: .jdx/.dx is treated as
 *  JCAMP-DX, anything else as the native JSON layout. */
inline Fid ingest_fid(const std::string& path) {
    return detail::with_stage("ingest", path, [&] {
        std::string text = detail::read_text_file(path);
        if (detail::has_suffix(path, ".jdx") || detail::has_suffix(path, ".dx"))
            return jcamp::parse(text);
        return parse_fid_json(text);
    });
}

/** Time to frequency: first-point scaling, apodization, zero fill, FFT. */
inline Spectrum transform_fid(const Fid& fid, const PipelineConfig& cfg) {
    // Halve the first point before transforming. The discrete sum counts
    // t=0 with full weight where the half-open integral would not, which
    // shows up as a constant vertical offset across the whole spectrum.
    Fid prepared = fid;
    if (!prepared.real.empty()) {
        prepared.real[0] *= 0.5;
        prepared.imag[0] *= 0.5;
        prepared.processing_log.push_back("first_point:scale=0.5");
    }
    Fid windowed = cfg.apodization == "none"
                       ? prepared
                       : apodize(prepared, detail::window_from_config(cfg));
    return fft_spectrum(zero_fill(windowed));
}

struct CorrectionOutcome {
    Spectrum spectrum;
    PhaseParams phase;
    bool phase_low_confidence = false;
    double noise_sigma = 0.0;
    std::vector<double> baseline;
};

/** Automatic phase then baseline, keeping the estimates both steps settled on. */
inline CorrectionOutcome correct_spectrum(const Spectrum& sp, const PipelineConfig& cfg) {
    CorrectionOutcome out;
    AcmeResult acme = acme_phase_correct(sp);
    out.phase = acme.phase;
    out.phase_low_confidence = acme.low_confidence;
    BaselineConfig bl = cfg.baseline;
    bl.mask_threshold_sigma = cfg.threshold_sigma;
    BaselineResult res = baseline_correct(acme.spectrum, bl);
    out.noise_sigma = res.noise_sigma;
    out.baseline = std::move(res.baseline);
    out.spectrum = std::move(res.corrected);
    return out;
}

/** FID to annotated spectrum: window, zero fill, FFT, automatic phase,
 *  baseline, peaks, multiplets. Every stage failure names the stage and the
 *  input path. */
inline SpectrumReport process_fid(const std::string& path, const PipelineConfig& cfg) {
    SpectrumReport rep;
    rep.input_path = path;

    Fid fid = ingest_fid(path);
    rep.nucleus = fid.params.nucleus;

    Spectrum sp =
        detail::with_stage("transform", path, [&] { return transform_fid(fid, cfg); });

    sp = detail::with_stage("correct", path, [&] {
        CorrectionOutcome corr = correct_spectrum(sp, cfg);
        rep.phase = corr.phase;
        rep.phase_low_confidence = corr.phase_low_confidence;
        rep.noise_sigma = corr.noise_sigma;
        return std::move(corr.spectrum);
    });

    rep.annotated = detail::with_stage("annotate", path, [&] {
        AnnotateConfig an = cfg.annotate;
        an.threshold_sigma = cfg.threshold_sigma;
        return annotate(sp, an);
    });
    rep.processing_log = sp.processing_log;
    rep.nmr_text = render_nmr_text(rep.annotated);
    return rep;
}

/**
 * Full elucidation: process every input FID, pool the annotated spectra as
 * the observation, then let the configured policy drive the tool loop
 * against the candidate database. The generator draws from the database's
 * own structures in seed-shuffled order, so a fixed seed makes the whole
 * run (and its serialized report) reproducible.
 */
inline ElucidationReport run_pipeline(const std::vector<std::string>& fid_paths,
                                      const PipelineConfig& cfg) {
    cfg.validate(true);
    require(!fid_paths.empty(), errc::config_error, "no input FIDs given");
    require(!cfg.database_path.empty(), errc::config_error, "database_path is not set");
    require(!cfg.h_table_path.empty() && !cfg.c_table_path.empty(), errc::config_error,
            "shift table paths are not set");

    ElucidationReport report;
    report.seed = cfg.seed;

    ObservedSpectra observed;
    for (const auto& path : fid_paths) {
        SpectrumReport rep = process_fid(path, cfg);
        if (rep.nucleus == Nucleus::H1) {
            require(!observed.h1, errc::config_error, "two 1H inputs given");
            observed.h1 = rep.annotated;
        } else {
            require(!observed.c13, errc::config_error, "two 13C inputs given");
            observed.c13 = rep.annotated;
        }
        report.spectra.push_back(std::move(rep));
    }

    CandidateDatabase db = detail::with_stage("db", cfg.database_path, [&] {
        return CandidateDatabase::load(cfg.database_path);
    });
    ShiftTable h_table = detail::with_stage("tables", cfg.h_table_path, [&] {
        return parse_shift_table_json(detail::read_text_file(cfg.h_table_path));
    });
    ShiftTable c_table = detail::with_stage("tables", cfg.c_table_path, [&] {
        return parse_shift_table_json(detail::read_text_file(cfg.c_table_path));
    });

    ToolBundle tools;
    tools.database = &db;
    tools.h_table = h_table;
    tools.c_table = c_table;
    tools.observed = observed;
    tools.assign_h1 = cfg.assign_h1;
    tools.assign_c13 = cfg.assign_c13;
    tools.search = cfg.search;
    tools.repair = cfg.repair;
    tools.rerank = cfg.rerank;
    tools.coarse_factor = cfg.coarse_factor;
    for (const auto& e : db.entries()) tools.generator_source.push_back(e.candidate);
    std::mt19937_64 rng(cfg.seed);
    std::shuffle(tools.generator_source.begin(), tools.generator_source.end(), rng);

    report.trajectory = detail::with_stage("agent", cfg.database_path, [&] {
        return run_scripted_policy(tools, cfg.policy, cfg.rewards, cfg.budget);
    });

    // Final ranking detail, rescored from the frozen prediction order.
    Spectra targets = signal_targets(observed);
    for (const auto& id : report.trajectory.final_prediction) {
        const CandidateDatabase::Entry* entry = nullptr;
        for (const auto& e : db.entries())
            if (e.candidate.id == id) {
                entry = &e;
                break;
            }
        if (!entry) continue;  // generated or repaired candidates have no db row
        CandidateStructure cand = entry->candidate;
        if (cand.h_sites.empty() || cand.c_sites.empty())
            populate_sites(cand, h_table, c_table);
        CandidateScore score = score_candidate(cand, observed, cfg.assign_h1, cfg.assign_c13);
        report.ranking.push_back(
            {id, score.score, nmrx::detail::repair_reward(cand, targets, cfg.repair)});
    }
    return report;
}

// ---------------------------------------------------------------------------
// Report rendering
// ---------------------------------------------------------------------------

inline std::string serialize_report_json(const ElucidationReport& report) {
    json spectra = json::array();
    for (const auto& s : report.spectra) {
        spectra.push_back(
            json{{"input_path", s.input_path},
                 {"nucleus", nucleus_name(s.nucleus)},
                 {"phase", json{{"phi0_rad", s.phase.phi0_rad},
                                {"phi1_rad", s.phase.phi1_rad},
                                {"low_confidence", s.phase_low_confidence}}},
                 {"noise_sigma", s.noise_sigma},
                 {"processing_log", s.processing_log},
                 {"annotated", json::parse(serialize_annotated_json(s.annotated))},
                 {"nmr_text", s.nmr_text}});
    }
    json ranking = json::array();
    for (std::size_t i = 0; i < report.ranking.size(); ++i) {
        const auto& r = report.ranking[i];
        ranking.push_back(
            json{{"rank", i + 1}, {"id", r.id}, {"score", r.score}, {"sim", r.sim}});
    }
    json doc{{"schema_version", schema_version},
             {"kind", "elucidation_report"},
             {"seed", report.seed},
             {"spectra", spectra},
             {"ranking", ranking},
             {"trajectory", json::parse(serialize_trajectory_json(report.trajectory))}};
    return doc.dump(2);
}

inline std::string render_report_text(const ElucidationReport& report) {
    std::ostringstream out;
    out << "Elucidation report (seed " << report.seed << ")\n";
    for (const auto& s : report.spectra) {
        char line[160];
        std::snprintf(line, sizeof line,
                      "  %s  [%s]  phase %.4f / %.4f rad%s, noise sigma %.4g\n",
                      s.input_path.c_str(), nucleus_name(s.nucleus), s.phase.phi0_rad,
                      s.phase.phi1_rad, s.phase_low_confidence ? " (low confidence)" : "",
                      s.noise_sigma);
        out << line << "    " << s.nmr_text << "\n";
    }
    out << "Ranking:\n";
    for (std::size_t i = 0; i < report.ranking.size(); ++i) {
        const auto& r = report.ranking[i];
        char line[160];
        std::snprintf(line, sizeof line, "  %2zu. %-24s score %10.4f  sim %.4f\n", i + 1,
                      r.id.c_str(), r.score, r.sim);
        out << line;
    }
    out << "Trajectory (" << termination_name(report.trajectory.terminated_by)
        << ", return " << report.trajectory.total_return << "):\n";
    for (const auto& step : report.trajectory.steps)
        out << "  " << action_type_name(step.action.type) << "  r=" << step.reward.r_total
            << "\n";
    return out.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    require(out.good(), errc::io_error, "cannot open '" + path + "' for writing");
    out << text;
    require(out.good(), errc::io_error, "write to '" + path + "' failed");
}

}  // namespace nmrx
