#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "errors.hpp"
#include "fid.hpp"
#include "version.hpp"

namespace nmrx {

using json = nlohmann::json;

namespace detail {

inline json parse_json_text(const std::string& text) {
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded()) fail(errc::malformed_document, "input is not valid JSON");
    return doc;
}

inline void check_schema_version(const json& doc, const char* what) {
    if (!doc.is_object()) fail(errc::malformed_document, std::string(what) + ": not a JSON object");
    auto it = doc.find("schema_version");
    if (it == doc.end() || !it->is_number_integer())
        fail(errc::malformed_document, std::string(what) + ": missing integer schema_version");
    int v = it->get<int>();
    if (v != schema_version)
        fail(errc::schema_version_mismatch,
             std::string(what) + ": schema_version " + std::to_string(v) +
                 " not supported (reader supports " + std::to_string(schema_version) + ")");
}

inline double get_number(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_number())
        fail(errc::malformed_document, std::string("missing numeric field '") + key + "'");
    return it->get<double>();
}

inline std::string get_string(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_string())
        fail(errc::malformed_document, std::string("missing string field '") + key + "'");
    return it->get<std::string>();
}

inline std::vector<double> get_number_array(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end() || !it->is_array())
        fail(errc::malformed_document, std::string("missing array field '") + key + "'");
    std::vector<double> out;
    out.reserve(it->size());
    for (const auto& e : *it) {
        if (!e.is_number())
            fail(errc::malformed_document, std::string("non-numeric entry in '") + key + "'");
        out.push_back(e.get<double>());
    }
    return out;
}

inline AcquisitionParams params_from_json(const json& p) {
    if (!p.is_object()) fail(errc::malformed_document, "params must be an object");
    AcquisitionParams out;
    out.spectrometer_frequency_mhz = get_number(p, "spectrometer_frequency_mhz");
    out.sweep_width_hz = get_number(p, "sweep_width_hz");
    double np = get_number(p, "num_points");
    if (np < 0 || np != std::floor(np))
        fail(errc::malformed_document, "num_points must be a nonnegative integer");
    out.num_points = static_cast<std::size_t>(np);
    out.nucleus = nucleus_from_string(get_string(p, "nucleus"));
    out.solvent = p.contains("solvent") ? get_string(p, "solvent") : std::string();
    out.reference_offset_ppm =
        p.contains("reference_offset_ppm") ? get_number(p, "reference_offset_ppm") : 0.0;
    return out;
}

inline json params_to_json(const AcquisitionParams& p) {
    return json{{"spectrometer_frequency_mhz", p.spectrometer_frequency_mhz},
                {"sweep_width_hz", p.sweep_width_hz},
                {"num_points", p.num_points},
                {"nucleus", nucleus_name(p.nucleus)},
                {"solvent", p.solvent},
                {"reference_offset_ppm", p.reference_offset_ppm}};
}

}  // namespace detail

/** Parses the canonical FID JSON document. Strict about structure and
 *  finiteness: anything off throws MalformedDocument / InvariantViolation
 *  rather than producing a half-filled object. */
inline Fid parse_fid_json(const std::string& text) {
    json doc = detail::parse_json_text(text);
    detail::check_schema_version(doc, "fid");
    if (!doc.contains("params")) fail(errc::malformed_document, "fid: missing params");
    Fid fid;
    fid.params = detail::params_from_json(doc["params"]);
    fid.real = detail::get_number_array(doc, "real");
    fid.imag = detail::get_number_array(doc, "imag");
    fid.validate();
    return fid;
}

inline std::string serialize_fid_json(const Fid& fid) {
    fid.validate();
    json doc;
    doc["schema_version"] = schema_version;
    doc["params"] = detail::params_to_json(fid.params);
    doc["real"] = fid.real;
    doc["imag"] = fid.imag;
    return doc.dump(2);
}

inline Spectrum parse_spectrum_json(const std::string& text) {
    json doc = detail::parse_json_text(text);
    detail::check_schema_version(doc, "spectrum");
    if (!doc.contains("params")) fail(errc::malformed_document, "spectrum: missing params");
    Spectrum sp;
    sp.params = detail::params_from_json(doc["params"]);
    sp.real = detail::get_number_array(doc, "real");
    sp.imag = detail::get_number_array(doc, "imag");
    sp.ppm_axis = detail::get_number_array(doc, "ppm_axis");
    if (doc.contains("processing_log")) {
        if (!doc["processing_log"].is_array())
            fail(errc::malformed_document, "processing_log must be an array");
        for (const auto& e : doc["processing_log"]) {
            if (!e.is_string()) fail(errc::malformed_document, "processing_log entries are strings");
            sp.processing_log.push_back(e.get<std::string>());
        }
    }
    sp.validate();
    return sp;
}

inline std::string serialize_spectrum_json(const Spectrum& sp) {
    sp.validate();
    json doc;
    doc["schema_version"] = schema_version;
    doc["params"] = detail::params_to_json(sp.params);
    doc["real"] = sp.real;
    doc["imag"] = sp.imag;
    doc["ppm_axis"] = sp.ppm_axis;
    doc["processing_log"] = sp.processing_log;
    return doc.dump(2);
}

}  // namespace nmrx
