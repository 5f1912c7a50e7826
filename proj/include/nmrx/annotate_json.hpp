#pragma once

#include <string>

#include "annotate.hpp"
#include "fid_json.hpp"
#include "multiplet.hpp"
#include "nmr_text.hpp"

namespace nmrx {

namespace detail {

inline json peak_to_json(const Peak& p) {
    return json{{"shift_ppm", p.shift_ppm},
                {"intensity", p.intensity},
                {"width_hz", p.width_hz},
                {"area", p.area},
                {"left_bound_ppm", p.left_bound_ppm},
                {"right_bound_ppm", p.right_bound_ppm}};
}

inline Peak peak_from_json(const json& j) {
    if (!j.is_object()) fail(errc::malformed_document, "peak must be an object");
    Peak p;
    p.shift_ppm = get_number(j, "shift_ppm");
    p.intensity = get_number(j, "intensity");
    p.width_hz = get_number(j, "width_hz");
    p.area = get_number(j, "area");
    p.left_bound_ppm = get_number(j, "left_bound_ppm");
    p.right_bound_ppm = get_number(j, "right_bound_ppm");
    return p;
}

inline json multiplet_to_json(const Multiplet& m) {
    json peaks = json::array();
    for (const auto& p : m.member_peaks) peaks.push_back(peak_to_json(p));
    return json{{"center_ppm", m.center_ppm},
                {"pattern", pattern_name(m.pattern)},
                {"j_values_hz", m.j_values_hz},
                {"integral_protons", m.integral_protons},
                {"member_peaks", std::move(peaks)}};
}

inline Multiplet multiplet_from_json(const json& j) {
    if (!j.is_object()) fail(errc::malformed_document, "multiplet must be an object");
    Multiplet m;
    m.center_ppm = get_number(j, "center_ppm");
    m.pattern = pattern_from_string(get_string(j, "pattern"));
    m.j_values_hz = get_number_array(j, "j_values_hz");
    double n = get_number(j, "integral_protons");
    if (n < 0 || n != std::floor(n))
        fail(errc::malformed_document, "integral_protons must be a nonnegative integer");
    m.integral_protons = static_cast<int>(n);
    auto it = j.find("member_peaks");
    if (it == j.end() || !it->is_array())
        fail(errc::malformed_document, "multiplet missing member_peaks array");
    for (const auto& e : *it) m.member_peaks.push_back(peak_from_json(e));
    return m;
}

}  // namespace detail

inline std::string serialize_annotated_json(const AnnotatedSpectrum& a) {
    json multiplets = json::array();
    for (const auto& m : a.multiplets) multiplets.push_back(detail::multiplet_to_json(m));
    json doc{{"schema_version", schema_version},
             {"kind", "annotated_spectrum"},
             {"params", detail::params_to_json(a.params)},
             {"noise_sigma", a.noise_sigma},
             {"multiplets", std::move(multiplets)},
             {"nmr_text", render_nmr_text(a)}};
    return doc.dump(2);
}

inline AnnotatedSpectrum parse_annotated_json(const std::string& text) {
    json doc = detail::parse_json_text(text);
    detail::check_schema_version(doc, "annotated spectrum");
    AnnotatedSpectrum a;
    a.params = detail::params_from_json(doc.contains("params") ? doc["params"] : json());
    a.noise_sigma = detail::get_number(doc, "noise_sigma");
    auto it = doc.find("multiplets");
    if (it == doc.end() || !it->is_array())
        fail(errc::malformed_document, "annotated spectrum missing multiplets array");
    for (const auto& e : *it) a.multiplets.push_back(detail::multiplet_from_json(e));
    return a;
}

}  // namespace nmrx
