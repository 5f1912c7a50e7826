#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"
#include "molecule_json.hpp"
#include "signals.hpp"
#include "version.hpp"

static_assert(std::endian::native == std::endian::little,
              "database format is little-endian; big-endian hosts need byte swapping");

namespace nmrx {

namespace detail {

inline json signal_to_json(const Signal& s) {
    return json{{"shift_ppm", s.shift_ppm},
                {"multiplicity", pattern_name(s.multiplicity)},
                {"j_hz", s.j_hz},
                {"weight", s.weight}};
}

inline Signal signal_from_json(const json& j) {
    if (!j.is_object()) fail(errc::malformed_document, "signal must be an object");
    Signal s;
    s.shift_ppm = get_number(j, "shift_ppm");
    s.multiplicity = pattern_from_string(get_string(j, "multiplicity"));
    s.j_hz = get_number_array(j, "j_hz");
    s.weight = get_number(j, "weight");
    if (!(s.weight > 0.0)) fail(errc::malformed_document, "signal weight must be positive");
    return s;
}

inline json signal_set_to_json(const SignalSet& set) {
    json arr = json::array();
    for (const auto& s : set.signals) arr.push_back(signal_to_json(s));
    return json{{"nucleus", nucleus_name(set.nucleus)}, {"signals", std::move(arr)}};
}

inline SignalSet signal_set_from_json(const json& j) {
    if (!j.is_object()) fail(errc::malformed_document, "signal set must be an object");
    SignalSet set;
    set.nucleus = nucleus_from_string(get_string(j, "nucleus"));
    auto it = j.find("signals");
    if (it == j.end() || !it->is_array())
        fail(errc::malformed_document, "signal set missing signals array");
    for (const auto& e : *it) set.signals.push_back(signal_from_json(e));
    return set;
}

}  // namespace detail

/**
 * Immutable candidate collection with precomputed simulated signals and
 * retrieval vectors. On disk: 8-byte magic, little-endian u32 format
 * version and entry count, then per entry a length-prefixed JSON blob
 * (candidate graph plus both signal sets) followed by the two raw f64
 * retrieval vectors.
 */
class CandidateDatabase {
public:
    struct Entry {
        CandidateStructure candidate;
        SignalSet h_signals;
        SignalSet c_signals;
        SpectrumVector vector_h;
        SpectrumVector vector_c;
    };

    static CandidateDatabase build(std::vector<CandidateStructure> candidates,
                                   const ShiftTable& h_table, const ShiftTable& c_table) {
        CandidateDatabase db;
        std::set<std::string> ids;
        for (auto& cand : candidates) {
            require(ids.insert(cand.id).second, errc::invariant_violation,
                    "duplicate candidate id '" + cand.id + "'");
            if (cand.h_sites.empty() || cand.c_sites.empty())
                populate_sites(cand, h_table, c_table);
            Entry e;
            e.h_signals = simulate_spectrum(cand, Nucleus::H1);
            e.c_signals = simulate_spectrum(cand, Nucleus::C13);
            e.vector_h = spectrum_vector(e.h_signals);
            e.vector_c = spectrum_vector(e.c_signals);
            e.candidate = std::move(cand);
            db.entries_.push_back(std::move(e));
        }
        return db;
    }

    const std::vector<Entry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    void save(const std::string& path) const {
        std::ofstream out(path, std::ios::binary);
        require(out.good(), errc::io_error, "cannot open '" + path + "' for writing");
        out.write(db_magic, sizeof(db_magic));
        write_u32(out, db_format_version);
        write_u32(out, static_cast<std::uint32_t>(entries_.size()));
        for (const auto& e : entries_) {
            json doc{{"schema_version", schema_version},
                     {"kind", "db_entry"},
                     {"id", e.candidate.id},
                     {"provenance", provenance_name(e.candidate.provenance)},
                     {"graph", detail::graph_to_json(e.candidate.graph)},
                     {"h_signals", detail::signal_set_to_json(e.h_signals)},
                     {"c_signals", detail::signal_set_to_json(e.c_signals)}};
            std::string text = doc.dump();
            write_u64(out, text.size());
            out.write(text.data(), static_cast<std::streamsize>(text.size()));
            write_vector(out, e.vector_h);
            write_vector(out, e.vector_c);
        }
        require(out.good(), errc::io_error, "write to '" + path + "' failed");
    }

    static CandidateDatabase load(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        require(in.good(), errc::io_error, "cannot open '" + path + "'");
        in.seekg(0, std::ios::end);
        const std::uint64_t file_size = static_cast<std::uint64_t>(in.tellg());
        in.seekg(0);

        char magic[sizeof(db_magic)];
        read_exact(in, magic, sizeof(magic), "magic");
        require(std::memcmp(magic, db_magic, sizeof(magic)) == 0, errc::malformed_document,
                "'" + path + "' is not a candidate database");
        std::uint32_t version = read_u32(in);
        require(version == db_format_version, errc::schema_version_mismatch,
                "database format version " + std::to_string(version) + " not supported");
        std::uint32_t count = read_u32(in);

        CandidateDatabase db;
        for (std::uint32_t i = 0; i < count; ++i) {
            std::uint64_t len = read_u64(in);
            require(len <= file_size, errc::malformed_document,
                    "entry length exceeds file size");
            std::string text(len, '\0');
            read_exact(in, text.data(), len, "entry JSON");
            json doc = detail::parse_json_text(text);
            detail::check_schema_version(doc, "db entry");
            Entry e;
            e.candidate.id = detail::get_string(doc, "id");
            e.candidate.provenance =
                provenance_from_string(detail::get_string(doc, "provenance"));
            auto g = doc.find("graph");
            if (g == doc.end()) fail(errc::malformed_document, "db entry missing graph");
            e.candidate.graph = detail::graph_from_json(*g);
            auto hs = doc.find("h_signals");
            auto cs = doc.find("c_signals");
            if (hs == doc.end() || cs == doc.end())
                fail(errc::malformed_document, "db entry missing signal sets");
            e.h_signals = detail::signal_set_from_json(*hs);
            e.c_signals = detail::signal_set_from_json(*cs);
            e.vector_h = read_vector(in, Nucleus::H1);
            e.vector_c = read_vector(in, Nucleus::C13);
            db.entries_.push_back(std::move(e));
        }
        return db;
    }

private:
    std::vector<Entry> entries_;

    static void write_u32(std::ostream& out, std::uint32_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    static void write_u64(std::ostream& out, std::uint64_t v) {
        out.write(reinterpret_cast<const char*>(&v), sizeof(v));
    }
    static void write_vector(std::ostream& out, const SpectrumVector& v) {
        out.write(reinterpret_cast<const char*>(v.bins.data()),
                  static_cast<std::streamsize>(v.bins.size() * sizeof(double)));
    }
    static void read_exact(std::istream& in, char* dst, std::uint64_t len, const char* what) {
        in.read(dst, static_cast<std::streamsize>(len));
        require(static_cast<std::uint64_t>(in.gcount()) == len, errc::malformed_document,
                std::string("truncated database (reading ") + what + ")");
    }
    static std::uint32_t read_u32(std::istream& in) {
        std::uint32_t v = 0;
        read_exact(in, reinterpret_cast<char*>(&v), sizeof(v), "u32");
        return v;
    }
    static std::uint64_t read_u64(std::istream& in) {
        std::uint64_t v = 0;
        read_exact(in, reinterpret_cast<char*>(&v), sizeof(v), "u64");
        return v;
    }
    static SpectrumVector read_vector(std::istream& in, Nucleus nucleus) {
        SpectrumVector v;
        v.nucleus = nucleus;
        v.bins.assign(spectrum_vector_bins, 0.0);
        read_exact(in, reinterpret_cast<char*>(v.bins.data()),
                   spectrum_vector_bins * sizeof(double), "vector");
        for (double x : v.bins)
            require(std::isfinite(x), errc::malformed_document,
                    "non-finite value in stored vector");
        return v;
    }
};

struct SearchConfig {
    double tol_ppm_h = 0.05;
    double tol_ppm_c = 1.0;
};

struct SearchHit {
    std::string id;
    double cosine = 0.0;
    double sim = 0.0;
    const CandidateDatabase::Entry* entry = nullptr;
};

/**
 * Stage one ranks every entry by cosine similarity of the retrieval
 * vectors and keeps coarse_k; stage two reranks those by the exact set
 * similarity and returns the top k. Joint queries (both nuclei present)
 * average the per-nucleus scores. All ties break toward the ascending
 * candidate id, so database order never matters.
 */
inline std::vector<SearchHit> search_two_stage(const Spectra& query, const CandidateDatabase& db,
                                               std::size_t coarse_k, std::size_t k,
                                               const SearchConfig& cfg = {}) {
    require(!db.empty(), errc::empty_database, "search over an empty database");
    require(!query.empty(), errc::invariant_violation, "query has no signal sets");
    require(coarse_k >= k && k >= 1, errc::invariant_violation,
            "need coarse_k >= k >= 1");

    std::optional<SpectrumVector> qh, qc;
    if (query.h) qh = spectrum_vector(*query.h);
    if (query.c) qc = spectrum_vector(*query.c);

    std::vector<SearchHit> hits;
    hits.reserve(db.size());
    for (const auto& e : db.entries()) {
        SearchHit h;
        h.id = e.candidate.id;
        h.entry = &e;
        double acc = 0.0;
        int terms = 0;
        if (qh) {
            acc += cosine_similarity(*qh, e.vector_h);
            ++terms;
        }
        if (qc) {
            acc += cosine_similarity(*qc, e.vector_c);
            ++terms;
        }
        h.cosine = acc / terms;
        hits.push_back(std::move(h));
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        return a.id < b.id;
    });
    if (hits.size() > coarse_k) hits.resize(coarse_k);

    for (auto& h : hits) {
        double acc = 0.0;
        int terms = 0;
        if (query.h) {
            acc += peak_set_similarity(*query.h, h.entry->h_signals, cfg.tol_ppm_h);
            ++terms;
        }
        if (query.c) {
            acc += peak_set_similarity(*query.c, h.entry->c_signals, cfg.tol_ppm_c);
            ++terms;
        }
        h.sim = acc / terms;
    }
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.sim != b.sim) return a.sim > b.sim;
        return a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
    return hits;
}

}  // namespace nmrx
