#pragma once

#include <cctype>
#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fid.hpp"

namespace nmrx {

/**
 * Reader/writer for the JCAMP-DX subset this toolkit exchanges: labelled
 * header records plus paired REAL/IMAG data tables in plain AFFN numbers.
 * Compressed data forms (SQZ/DIF/DUP pseudo-digits) are explicitly rejected
 * as UnsupportedFeature so callers can tell "not ours" from "broken".
 */
namespace jcamp {

namespace detail {

// Uppercases and strips whitespace plus '-' so ##JCAMP-DX and ## JCAMP DX match.
inline std::string normalize_label(const std::string& raw) {
    std::string out;
    for (char c : raw) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '-') continue;
        out.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return out;
}

inline bool is_affn_number(const std::string& tok) {
    std::size_t i = 0;
    if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
    bool digits = false, dot = false;
    while (i < tok.size() && (std::isdigit(static_cast<unsigned char>(tok[i])) || tok[i] == '.')) {
        if (tok[i] == '.') {
            if (dot) return false;
            dot = true;
        } else {
            digits = true;
        }
        ++i;
    }
    if (!digits) return false;
    if (i < tok.size() && (tok[i] == 'e' || tok[i] == 'E')) {
        ++i;
        if (i < tok.size() && (tok[i] == '+' || tok[i] == '-')) ++i;
        bool exp_digits = false;
        while (i < tok.size() && std::isdigit(static_cast<unsigned char>(tok[i]))) {
            exp_digits = true;
            ++i;
        }
        if (!exp_digits) return false;
    }
    return i == tok.size();
}

// SQZ digits (@, A-I, a-i), DIF digits (%, J-R, j-r) and DUP counts (S-Z, s)
// mark the compressed JCAMP forms.
inline bool looks_compressed(const std::string& tok) {
    for (char c : tok) {
        if (c == '@' || c == '%') return true;
        if ((c >= 'A' && c <= 'Z' && c != 'E') || (c >= 'a' && c <= 'z' && c != 'e')) return true;
    }
    return false;
}

inline void parse_data_line(const std::string& line, std::vector<double>& out) {
    std::string tok;
    auto flush = [&] {
        if (tok.empty()) return;
        if (looks_compressed(tok))
            fail(errc::unsupported_feature,
                 "compressed data table (SQZ/DIF/DUP) is not supported, AFFN only");
        if (!is_affn_number(tok))
            fail(errc::malformed_document, "bad AFFN token '" + tok + "' in data table");
        out.push_back(std::strtod(tok.c_str(), nullptr));
        tok.clear();
    };
    for (char c : line) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';') {
            flush();
        } else {
            tok.push_back(c);
        }
    }
    flush();
}

inline double parse_affn_value(const std::string& label, const std::string& value) {
    std::string t;
    for (char c : value)
        if (!std::isspace(static_cast<unsigned char>(c))) t.push_back(c);
    if (!is_affn_number(t))
        fail(errc::malformed_document, "##" + label + " value '" + value + "' is not a number");
    return std::strtod(t.c_str(), nullptr);
}

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace detail

inline Fid parse(const std::string& text) {
    AcquisitionParams params;
    params.nucleus = Nucleus::H1;
    bool saw_title = false, saw_freq = false, saw_sw = false, saw_end = false;
    double yfactor = 1.0;
    long npoints_declared = -1;
    std::vector<double> real, imag;
    enum class Table { none, real, imag } table = Table::none;

    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = detail::trim(line);
        if (trimmed.empty()) continue;
        if (trimmed.rfind("$$", 0) == 0) continue;  // comment record
        if (trimmed.rfind("##", 0) == 0) {
            auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                fail(errc::malformed_document, "label record without '=': " + trimmed);
            std::string label = detail::normalize_label(trimmed.substr(2, eq - 2));
            std::string value = detail::trim(trimmed.substr(eq + 1));
            table = Table::none;
            if (label == "TITLE") {
                saw_title = true;
            } else if (label == ".OBSERVEFREQUENCY") {
                params.spectrometer_frequency_mhz = detail::parse_affn_value(label, value);
                saw_freq = true;
            } else if (label == "$SW_H" || label == "SWEEPWIDTH") {
                params.sweep_width_hz = detail::parse_affn_value(label, value);
                saw_sw = true;
            } else if (label == "NPOINTS") {
                double v = detail::parse_affn_value(label, value);
                if (v < 0 || v != std::floor(v))
                    fail(errc::malformed_document, "##NPOINTS must be a nonnegative integer");
                npoints_declared = static_cast<long>(v);
            } else if (label == "YFACTOR") {
                yfactor = detail::parse_affn_value(label, value);
            } else if (label == ".OBSERVENUCLEUS") {
                std::string n = detail::normalize_label(value);
                if (n == "^1H" || n == "1H")
                    params.nucleus = Nucleus::H1;
                else if (n == "^13C" || n == "13C")
                    params.nucleus = Nucleus::C13;
                else
                    fail(errc::unsupported_feature, "observe nucleus '" + value + "' not supported");
            } else if (label == ".SOLVENTNAME") {
                params.solvent = value;
            } else if (label == "$REFERENCEOFFSETPPM") {
                params.reference_offset_ppm = detail::parse_affn_value(label, value);
            } else if (label == "DATATABLE") {
                std::string kind = detail::normalize_label(value);
                if (kind == "REAL")
                    table = Table::real;
                else if (kind == "IMAG")
                    table = Table::imag;
                else
                    fail(errc::malformed_document, "##DATATABLE must be REAL or IMAG");
            } else if (label == "XYDATA" || label == "DATATABLE(X++(R..R))" || label == "PAGE" ||
                       label == "NTUPLES") {
                fail(errc::unsupported_feature,
                     "##" + label + " data layout is outside the supported subset");
            } else if (label == "END") {
                saw_end = true;
                break;
            }
            // other labels are tolerated and ignored
        } else {
            if (table == Table::none)
                fail(errc::malformed_document, "numeric data outside a ##DATATABLE section");
            detail::parse_data_line(trimmed, table == Table::real ? real : imag);
        }
    }

    if (!saw_title) fail(errc::malformed_document, "missing required ##TITLE record");
    if (!saw_freq) fail(errc::malformed_document, "missing required ##.OBSERVE FREQUENCY record");
    if (!saw_sw) fail(errc::malformed_document, "missing required ##$SW_h / ##SWEEPWIDTH record");
    if (!saw_end) fail(errc::malformed_document, "missing ##END record");
    if (real.empty()) fail(errc::malformed_document, "missing REAL data table");
    if (imag.empty()) fail(errc::malformed_document, "missing IMAG data table");
    if (real.size() != imag.size())
        fail(errc::malformed_document, "REAL and IMAG tables have different lengths");
    if (npoints_declared >= 0 && static_cast<std::size_t>(npoints_declared) != real.size())
        fail(errc::malformed_document, "##NPOINTS disagrees with the data table length");

    Fid fid;
    fid.params = params;
    fid.params.num_points = real.size();
    fid.real = std::move(real);
    fid.imag = std::move(imag);
    if (yfactor != 1.0) {
        for (auto& v : fid.real) v *= yfactor;
        for (auto& v : fid.imag) v *= yfactor;
    }
    fid.validate();
    return fid;
}

inline std::string write(const Fid& fid, const std::string& title = "nmrx export") {
    fid.validate();
    std::ostringstream out;
    char buf[64];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "##TITLE= " << title << "\n";
    out << "##JCAMP-DX= 5.00\n";
    out << "##.OBSERVE FREQUENCY= " << num(fid.params.spectrometer_frequency_mhz) << "\n";
    out << "##.OBSERVE NUCLEUS= ^" << (fid.params.nucleus == Nucleus::H1 ? "1H" : "13C") << "\n";
    if (!fid.params.solvent.empty()) out << "##.SOLVENT NAME= " << fid.params.solvent << "\n";
    out << "##$SW_h= " << num(fid.params.sweep_width_hz) << "\n";
    if (fid.params.reference_offset_ppm != 0.0)
        out << "##$REFERENCE OFFSET PPM= " << num(fid.params.reference_offset_ppm) << "\n";
    out << "##NPOINTS= " << fid.params.num_points << "\n";
    out << "##YFACTOR= 1\n";
    auto table = [&](const char* kind, const std::vector<double>& v) {
        out << "##DATATABLE= " << kind << "\n";
        for (std::size_t i = 0; i < v.size(); ++i) {
            out << num(v[i]);
            out << (((i + 1) % 4 == 0 || i + 1 == v.size()) ? "\n" : " ");
        }
    };
    table("REAL", fid.real);
    table("IMAG", fid.imag);
    out << "##END=\n";
    return out.str();
}

}  // namespace jcamp
}  // namespace nmrx
