// nmrx: command line front end for the spectrum toolkit.
//
// Every subcommand is a thin wrapper: parse arguments, load inputs, call the
// library operation, serialize the result. No processing logic lives here, so
// a CLI run and a direct library call with the same config give identical
// results.
//
// Exit codes: 0 success, 2 validation error (bad arguments, unreadable or
// malformed inputs, config problems), 3 processing error (a valid input the
// pipeline could not handle).

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nmrx/nmrx.hpp"

namespace {

using nmrx::errc;

int exit_code_for(errc c) {
    switch (c) {
        case errc::config_error:
        case errc::malformed_document:
        case errc::malformed_action:
        case errc::schema_version_mismatch:
        case errc::unsupported_feature:
        case errc::io_error:
            return 2;
        default:
            return 3;
    }
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    nmrx::require(out.good(), errc::io_error, "cannot open '" + path + "' for writing");
    out << text;
    if (!text.empty() && text.back() != '\n') out << '\n';
    nmrx::require(out.good(), errc::io_error, "write to '" + path + "' failed");
}

// "-" or an empty path sends the payload to stdout instead of a file.
void emit(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        if (!text.empty() && text.back() != '\n') std::cout << '\n';
    } else {
        write_text_file(path, text);
    }
}

nmrx::PipelineConfig load_config(const std::string& path) {
    if (path.empty()) return {};
    return nmrx::pipeline_config_from_toml(nmrx::detail::read_text_file(path));
}

nmrx::AnnotatedSpectrum load_annotated(const std::string& path) {
    return nmrx::parse_annotated_json(nmrx::detail::read_text_file(path));
}

// A candidate file holds either one candidate object or an array of them.
std::vector<nmrx::CandidateStructure> load_candidates(
    const std::vector<std::string>& paths) {
    std::vector<nmrx::CandidateStructure> out;
    for (const auto& path : paths) {
        nmrx::json doc =
            nmrx::detail::parse_json_text(nmrx::detail::read_text_file(path));
        if (doc.is_array()) {
            for (const auto& item : doc)
                out.push_back(nmrx::parse_candidate_json(item.dump()));
        } else {
            out.push_back(nmrx::parse_candidate_json(doc.dump()));
        }
    }
    return out;
}

nmrx::ObservedSpectra load_observed(const std::string& h1_path,
                                    const std::string& c13_path) {
    nmrx::ObservedSpectra obs;
    if (!h1_path.empty()) obs.h1 = load_annotated(h1_path);
    if (!c13_path.empty()) obs.c13 = load_annotated(c13_path);
    obs.validate();
    return obs;
}

// Shared option state. One instance per subcommand keeps CLI11 bindings alive
// until the callback runs.
struct CommonOpts {
    std::string config_path;
    std::string output;
};

void add_ingest(CLI::App& app) {
    auto opts = std::make_shared<CommonOpts>();
    auto input = std::make_shared<std::string>();
    auto* sub = app.add_subcommand(
        "ingest", "Read a FID (JSON or JCAMP-DX) and write it in normalized JSON form");
    sub->add_option("input", *input, "FID file (.json, .jdx, .dx)")->required();
    sub->add_option("-o,--output", opts->output, "output path (default stdout)");
    sub->callback([opts, input] {
        nmrx::Fid fid = nmrx::ingest_fid(*input);
        fid.validate();
        emit(opts->output, nmrx::serialize_fid_json(fid));
    });
}

void add_transform(CLI::App& app) {
    auto opts = std::make_shared<CommonOpts>();
    auto input = std::make_shared<std::string>();
    auto apod = std::make_shared<std::string>();
    auto lb = std::make_shared<double>(0.0);
    auto gsigma = std::make_shared<double>(0.0);
    auto* sub = app.add_subcommand(
        "transform", "Apodize, zero fill, and Fourier transform a FID into a spectrum");
    sub->add_option("input", *input, "FID file (.json, .jdx, .dx)")->required();
    sub->add_option("--config", opts->config_path, "pipeline config (TOML)");
    auto* o_apod = sub->add_option("--apodization", *apod,
                                   "exponential, gaussian, sine_bell, or none");
    auto* o_lb = sub->add_option("--line-broadening-hz", *lb,
                                 "exponential window width in Hz");
    auto* o_gs = sub->add_option("--gaussian-sigma-hz", *gsigma,
                                 "gaussian window sigma in Hz");
    sub->add_option("-o,--output", opts->output, "output path (default stdout)");
    sub->callback([opts, input, apod, lb, gsigma, o_apod, o_lb, o_gs] {
        nmrx::PipelineConfig cfg = load_config(opts->config_path);
        if (o_apod->count()) cfg.apodization = *apod;
        if (o_lb->count()) cfg.line_broadening_hz = *lb;
        if (o_gs->count()) cfg.gaussian_sigma_hz = *gsigma;
        cfg.validate(false);
        nmrx::Fid fid = nmrx::ingest_fid(*input);
        nmrx::Spectrum sp = nmrx::transform_fid(fid, cfg);
        emit(opts->output, nmrx::serialize_spectrum_json(sp));
    });
}

void add_correct(CLI::App& app) {
    auto opts = std::make_shared<CommonOpts>();
    auto input = std::make_shared<std::string>();
    auto phase = std::make_shared<std::string>("auto");
    auto baseline = std::make_shared<std::string>();
    auto degree = std::make_shared<int>(3);
    auto* sub = app.add_subcommand(
        "correct", "Phase (automatic entropy minimization) and baseline correct a spectrum");
    sub->add_option("input", *input, "spectrum JSON")->required();
    sub->add_option("--config", opts->config_path, "pipeline config (TOML)");
    sub->add_option("--phase", *phase, "phase mode; only 'auto' is supported");
    auto* o_bl = sub->add_option("--baseline", *baseline, "iasls or polynomial");
    auto* o_deg = sub->add_option("--degree", *degree, "polynomial baseline degree");
    sub->add_option("-o,--output", opts->output, "corrected spectrum path (default stdout)");
    sub->callback([opts, input, phase, baseline, degree, o_bl, o_deg] {
        nmrx::require(*phase == "auto", errc::config_error,
                      "unknown --phase mode '" + *phase + "'");
        nmrx::PipelineConfig cfg = load_config(opts->config_path);
        if (o_bl->count()) {
            if (*baseline == "iasls")
                cfg.baseline.method = nmrx::BaselineMethod::iasls;
            else if (*baseline == "polynomial")
                cfg.baseline.method = nmrx::BaselineMethod::polynomial;
            else
                nmrx::fail(errc::config_error,
                           "unknown --baseline method '" + *baseline + "'");
        }
        if (o_deg->count()) cfg.baseline.polynomial_degree = *degree;
        nmrx::Spectrum sp =
            nmrx::parse_spectrum_json(nmrx::detail::read_text_file(*input));
        nmrx::CorrectionOutcome corr = nmrx::correct_spectrum(sp, cfg);
        emit(opts->output, nmrx::serialize_spectrum_json(corr.spectrum));
        nmrx::json status{{"phase",
                           {{"phi0", corr.phase.phi0_rad}, {"phi1", corr.phase.phi1_rad}}},
                          {"noise_sigma", corr.noise_sigma}};
        if (corr.phase_low_confidence) status["low_confidence"] = true;
        std::cout << status.dump() << '\n';
    });
}

void add_annotate(CLI::App& app) {
    auto opts = std::make_shared<CommonOpts>();
    auto input = std::make_shared<std::string>();
    auto threshold = std::make_shared<double>(0.0);
    auto anchor = std::make_shared<int>(0);
    auto* sub = app.add_subcommand(
        "annotate", "Detect peaks, group multiplets, and print the standardized text line");
    sub->add_option("input", *input, "corrected spectrum JSON")->required();
    sub->add_option("--config", opts->config_path, "pipeline config (TOML)");
    auto* o_thr = sub->add_option("--threshold-sigma", *threshold,
                                  "peak detection threshold in noise sigmas");
    auto* o_anc = sub->add_option("--anchor-protons", *anchor,
                                  "proton count assigned to the smallest multiplet");
    sub->add_option("-o,--output", opts->output, "annotated spectrum JSON path");
    sub->callback([opts, input, threshold, anchor, o_thr, o_anc] {
        nmrx::PipelineConfig cfg = load_config(opts->config_path);
        nmrx::AnnotateConfig an = cfg.annotate;
        an.threshold_sigma = o_thr->count() ? *threshold : cfg.threshold_sigma;
        if (o_anc->count()) an.anchor_protons = *anchor;
        nmrx::Spectrum sp =
            nmrx::parse_spectrum_json(nmrx::detail::read_text_file(*input));
        nmrx::AnnotatedSpectrum annotated = nmrx::annotate(sp, an);
        if (!opts->output.empty())
            write_text_file(opts->output, nmrx::serialize_annotated_json(annotated));
        std::cout << nmrx::render_nmr_text(annotated) << '\n';
    });
}

void add_db(CLI::App& app) {
    auto* db = app.add_subcommand("db", "Candidate database maintenance");
    db->require_subcommand(1);

    auto opts = std::make_shared<CommonOpts>();
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto h_table = std::make_shared<std::string>();
    auto c_table = std::make_shared<std::string>();
    auto* build = db->add_subcommand(
        "build", "Simulate signals for candidate structures and write a search database");
    build->add_option("candidates", *inputs,
                      "candidate JSON files (single object or array each)")
        ->required();
    build->add_option("--config", opts->config_path, "pipeline config (TOML)");
    auto* o_h = build->add_option("--h-table", *h_table, "1H shift table JSON");
    auto* o_c = build->add_option("--c-table", *c_table, "13C shift table JSON");
    build->add_option("-o,--output", opts->output, "database path")->required();
    build->callback([opts, inputs, h_table, c_table, o_h, o_c] {
        nmrx::PipelineConfig cfg = load_config(opts->config_path);
        std::string h_path = o_h->count() ? *h_table : cfg.h_table_path;
        std::string c_path = o_c->count() ? *c_table : cfg.c_table_path;
        nmrx::require(!h_path.empty() && !c_path.empty(), errc::config_error,
                      "db build needs --h-table and --c-table (or a config with both)");
        nmrx::ShiftTable h =
            nmrx::parse_shift_table_json(nmrx::detail::read_text_file(h_path));
        nmrx::ShiftTable c =
            nmrx::parse_shift_table_json(nmrx::detail::read_text_file(c_path));
        nmrx::CandidateDatabase built =
            nmrx::CandidateDatabase::build(load_candidates(*inputs), h, c);
        built.save(opts->output);
        std::cout << nmrx::json{{"entries", built.size()}, {"path", opts->output}}.dump()
                  << '\n';
    });
}

void add_search(CLI::App& app) {
    auto opts = std::make_shared<CommonOpts>();
    auto db_path = std::make_shared<std::string>();
    auto h1 = std::make_shared<std::string>();
    auto c13 = std::make_shared<std::string>();
    auto k = std::make_shared<int>(5);
    auto coarse = std::make_shared<int>(0);
    auto* sub = app.add_subcommand(
        "search", "Rank database entries against observed spectra (two-stage retrieval)");
    sub->add_option("--db", *db_path, "candidate database")->required();
    sub->add_option("--h1", *h1, "annotated 1H spectrum JSON");
    sub->add_option("--c13", *c13, "annotated 13C spectrum JSON");
    sub->add_option("--config", opts->config_path, "pipeline config (TOML)");
    sub->add_option("-k", *k, "number of hits to return");
    auto* o_coarse =
        sub->add_option("--coarse-k", *coarse, "stage one pool size (default 4k)");
    sub->callback([opts, db_path, h1, c13, k, coarse, o_coarse] {
        nmrx::PipelineConfig cfg = load_config(opts->config_path);
        nmrx::CandidateDatabase db = nmrx::CandidateDatabase::load(*db_path);
        nmrx::Spectra query = nmrx::signal_targets(load_observed(*h1, *c13));
        auto kk = static_cast<std::size_t>(*k);
        std::size_t coarse_k =
            o_coarse->count()
                ? static_cast<std::size_t>(*coarse)
                : std::max(kk, std::min(db.size(), kk * cfg.coarse_factor));
        auto hits = nmrx::search_two_stage(query, db, coarse_k, kk, cfg.search);
        nmrx::json out = nmrx::json::array();
        for (const auto& h : hits)
            out.push_back({{"id", h.id}, {"cosine", h.cosine}, {"sim", h.sim}});
        std::cout << out.dump(2) << '\n';
    });
}

void add_rerank(CLI::App& app) {
    auto opts = std::make_shared<CommonOpts>();
    auto pool = std::make_shared<std::vector<std::string>>();
    auto h1 = std::make_shared<std::string>();
    auto c13 = std::make_shared<std::string>();
    auto hard = std::make_shared<bool>(false);
    auto* sub = app.add_subcommand(
        "rerank", "Order a candidate pool by assignment score, optionally breaking ties "
                  "with the hyperbolic hard-case score");
    sub->add_option("--pool", *pool, "candidate JSON files")->required();
    sub->add_option("--h1", *h1, "annotated 1H spectrum JSON");
    sub->add_option("--c13", *c13, "annotated 13C spectrum JSON");
    sub->add_option("--config", opts->config_path, "pipeline config (TOML)");
    sub->add_flag("--hard-case", *hard, "apply the hard-case tie-breaker");
    sub->callback([opts, pool, h1, c13, hard] {
        nmrx::PipelineConfig cfg = load_config(opts->config_path);
        nmrx::ObservedSpectra obs = load_observed(*h1, *c13);
        std::vector<nmrx::CandidateStructure> cands = load_candidates(*pool);
        nmrx::ShiftTable h_table, c_table;
        if (!cfg.h_table_path.empty())
            h_table = nmrx::parse_shift_table_json(
                nmrx::detail::read_text_file(cfg.h_table_path));
        if (!cfg.c_table_path.empty())
            c_table = nmrx::parse_shift_table_json(
                nmrx::detail::read_text_file(cfg.c_table_path));
        for (auto& cand : cands)
            if (cand.h_sites.empty() || cand.c_sites.empty())
                nmrx::populate_sites(cand, h_table, c_table);
        nmrx::RerankOptions ro = cfg.rerank;
        ro.use_hard_case = *hard;
        nmrx::RerankResult rr =
            nmrx::rerank(cands, obs, cfg.assign_h1, cfg.assign_c13, ro);
        nmrx::json ranking = nmrx::json::array();
        for (const auto& cs : rr.ranking) {
            nmrx::json row{{"id", cs.id}, {"score", cs.score}};
            if (std::isfinite(cs.hard_case_score))
                row["hard_case_score"] = cs.hard_case_score;
            ranking.push_back(std::move(row));
        }
        std::cout << nmrx::json{{"near_tie", rr.near_tie},
                                {"hard_case_applied", rr.hard_case_applied},
                                {"ranking", ranking}}
                         .dump(2)
                  << '\n';
    });
}

void add_agent_run(CLI::App& app) {
    auto opts = std::make_shared<CommonOpts>();
    auto fids = std::make_shared<std::vector<std::string>>();
    auto truth = std::make_shared<std::string>();
    auto* sub = app.add_subcommand(
        "agent-run", "Process FIDs, then let the configured policy drive the tool loop; "
                     "writes the full trajectory");
    sub->add_option("fids", *fids, "input FID files (1H and/or 13C)")->required();
    sub->add_option("--config", opts->config_path, "pipeline config (TOML)")->required();
    sub->add_option("--truth-id", *truth,
                    "ground-truth candidate id to record in the trajectory");
    sub->add_option("-o,--output", opts->output, "trajectory JSON path (default stdout)");
    sub->callback([opts, fids, truth] {
        nmrx::PipelineConfig cfg = load_config(opts->config_path);
        nmrx::ElucidationReport rep = nmrx::run_pipeline(*fids, cfg);
        rep.trajectory.truth_id = *truth;
        emit(opts->output, nmrx::serialize_trajectory_json(rep.trajectory));
    });
}

void add_eval(CLI::App& app) {
    auto inputs = std::make_shared<std::vector<std::string>>();
    auto k = std::make_shared<int>(1);
    auto* sub = app.add_subcommand(
        "eval", "Compute hit@k over recorded trajectories with known truth ids");
    sub->add_option("trajectories", *inputs, "trajectory JSON files")->required();
    sub->add_option("-k", *k, "rank cutoff");
    sub->callback([inputs, k] {
        std::vector<std::optional<int>> ranks;
        for (const auto& path : *inputs) {
            nmrx::Trajectory traj =
                nmrx::parse_trajectory_json(nmrx::detail::read_text_file(path));
            std::optional<int> rank;
            if (!traj.truth_id.empty())
                for (std::size_t i = 0; i < traj.final_prediction.size(); ++i)
                    if (traj.final_prediction[i] == traj.truth_id) {
                        rank = static_cast<int>(i) + 1;
                        break;
                    }
            ranks.push_back(rank);
        }
        double h = nmrx::hit_at_k(ranks, *k);
        std::cout << nmrx::json{{"cases", ranks.size()}, {"k", *k}, {"hit_at_k", h}}.dump()
                  << '\n';
    });
}

void add_report(CLI::App& app) {
    auto opts = std::make_shared<CommonOpts>();
    auto fids = std::make_shared<std::vector<std::string>>();
    auto text_path = std::make_shared<std::string>();
    auto* sub = app.add_subcommand(
        "report", "Run the full pipeline and write the elucidation report");
    sub->add_option("fids", *fids, "input FID files (1H and/or 13C)")->required();
    sub->add_option("--config", opts->config_path, "pipeline config (TOML)")->required();
    sub->add_option("-o,--output", opts->output, "report JSON path (default stdout)");
    auto* o_text = sub->add_option("--text", *text_path, "also write the readable report");
    sub->callback([opts, fids, text_path, o_text] {
        nmrx::PipelineConfig cfg = load_config(opts->config_path);
        nmrx::ElucidationReport rep = nmrx::run_pipeline(*fids, cfg);
        emit(opts->output, nmrx::serialize_report_json(rep));
        if (o_text->count())
            write_text_file(*text_path, nmrx::render_report_text(rep));
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"NMR spectrum processing and structure elucidation toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version",
                         "nmrx schema " + std::to_string(nmrx::schema_version));

    add_ingest(app);
    add_transform(app);
    add_correct(app);
    add_annotate(app);
    add_db(app);
    add_search(app);
    add_rerank(app);
    add_agent_run(app);
    add_eval(app);
    add_report(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    } catch (const nmrx::Error& e) {
        std::cerr << "nmrx: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "nmrx: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
