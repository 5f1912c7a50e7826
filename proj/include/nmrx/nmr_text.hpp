#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "annotate.hpp"
#include "errors.hpp"
#include "multiplet.hpp"

namespace nmrx {

/**
 * The journal-style one-liner, e.g.
 *   1H NMR (400 MHz, CDCl3): 7.26 (d, J = 8.4 Hz, 2H), 3.78 (s, 3H)
 *   13C NMR (101 MHz, DMSO-d6): 185.8, 160.1, 14.2
 * Proton entries carry pattern, J list (descending, omitted for s and m)
 * and integral; carbon entries are bare shifts. Rendering and parsing are
 * exact inverses on rendered strings.
 */
struct NmrTextEntry {
    double shift_ppm = 0.0;
    Pattern pattern = Pattern::s;
    std::vector<double> j_hz;  // descending
    int protons = 0;           // 0 for carbon entries
};

struct NmrTextDoc {
    Nucleus nucleus = Nucleus::H1;
    double sf_mhz = 0.0;
    std::string solvent;
    std::vector<NmrTextEntry> entries;
};

namespace detail {

inline std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

inline const char* nucleus_text_token(Nucleus n) { return n == Nucleus::H1 ? "1H" : "13C"; }

}  // namespace detail

inline std::string render_nmr_text(const NmrTextDoc& doc) {
    std::string out = detail::nucleus_text_token(doc.nucleus);
    out += " NMR (";
    out += std::to_string(static_cast<long>(std::lround(doc.sf_mhz)));
    out += " MHz, ";
    out += doc.solvent;
    out += "): ";
    bool first = true;
    for (const auto& e : doc.entries) {
        if (!first) out += ", ";
        first = false;
        if (doc.nucleus == Nucleus::C13) {
            out += detail::fixed(e.shift_ppm, 1);
            continue;
        }
        out += detail::fixed(e.shift_ppm, 2);
        out += " (";
        out += pattern_name(e.pattern);
        if (e.pattern != Pattern::s && e.pattern != Pattern::m && !e.j_hz.empty()) {
            out += ", J = ";
            for (std::size_t i = 0; i < e.j_hz.size(); ++i) {
                if (i) out += ", ";
                out += detail::fixed(e.j_hz[i], 1);
            }
            out += " Hz";
        }
        out += ", ";
        out += std::to_string(e.protons);
        out += "H)";
    }
    return out;
}

inline NmrTextDoc text_doc_from_annotated(const AnnotatedSpectrum& annotated) {
    NmrTextDoc doc;
    doc.nucleus = annotated.params.nucleus;
    doc.sf_mhz = annotated.params.spectrometer_frequency_mhz;
    doc.solvent = annotated.params.solvent;
    for (const auto& m : annotated.multiplets) {
        NmrTextEntry e;
        e.shift_ppm = m.center_ppm;
        e.pattern = m.pattern;
        e.j_hz = m.j_values_hz;
        e.protons = m.integral_protons;
        doc.entries.push_back(std::move(e));
    }
    return doc;
}

inline std::string render_nmr_text(const AnnotatedSpectrum& annotated) {
    return render_nmr_text(text_doc_from_annotated(annotated));
}

namespace detail {

// Minimal cursor over the text; every mismatch is a MalformedDocument.
struct TextCursor {
    const std::string& s;
    std::size_t pos = 0;

    bool done() const { return pos >= s.size(); }

    void expect(const std::string& lit) {
        if (s.compare(pos, lit.size(), lit) != 0)
            fail(errc::malformed_document,
                 "expected '" + lit + "' at offset " + std::to_string(pos));
        pos += lit.size();
    }

    bool peek(const std::string& lit) const { return s.compare(pos, lit.size(), lit) == 0; }

    std::string take_until(char stop, const char* what) {
        std::size_t end = s.find(stop, pos);
        if (end == std::string::npos)
            fail(errc::malformed_document, std::string("unterminated ") + what);
        std::string out = s.substr(pos, end - pos);
        pos = end;
        return out;
    }

    double number(const char* what) {
        std::size_t start = pos;
        if (!done() && (s[pos] == '-' || s[pos] == '+')) ++pos;
        bool digits = false;
        while (!done() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            ++pos;
            digits = true;
        }
        if (!done() && s[pos] == '.') {
            ++pos;
            while (!done() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
                ++pos;
                digits = true;
            }
        }
        if (!digits)
            fail(errc::malformed_document,
                 std::string("expected number for ") + what + " at offset " +
                     std::to_string(start));
        return std::stod(s.substr(start, pos - start));
    }

    int integer(const char* what) {
        double v = number(what);
        if (v != std::floor(v))
            fail(errc::malformed_document, std::string(what) + " must be an integer");
        return static_cast<int>(v);
    }
};

inline NmrTextEntry parse_proton_entry(TextCursor& c) {
    NmrTextEntry e;
    e.shift_ppm = c.number("chemical shift");
    c.expect(" (");
    std::string pat;
    while (!c.done() && std::islower(static_cast<unsigned char>(c.s[c.pos]))) pat += c.s[c.pos++];
    e.pattern = pattern_from_string(pat);
    if (c.peek(", J = ")) {
        if (e.pattern == Pattern::s || e.pattern == Pattern::m)
            fail(errc::malformed_document, "pattern '" + pat + "' must not carry J values");
        c.expect(", J = ");
        e.j_hz.push_back(c.number("J value"));
        while (c.peek(", ")) {
            // a comma either continues the J list or starts the integral;
            // a number immediately followed by "H)" is the integral, so
            // back up and let the caller consume it
            std::size_t save = c.pos;
            c.expect(", ");
            double v = c.number("J value or integral");
            if (c.peek("H)")) {
                c.pos = save;
                break;
            }
            e.j_hz.push_back(v);
        }
        c.expect(" Hz");
    } else if (e.pattern != Pattern::s && e.pattern != Pattern::m) {
        fail(errc::malformed_document, "pattern '" + pat + "' requires a J clause");
    }
    c.expect(", ");
    e.protons = c.integer("integral");
    if (e.protons <= 0) fail(errc::malformed_document, "integral must be positive");
    c.expect("H)");
    return e;
}

}  // namespace detail

inline NmrTextDoc parse_nmr_text(const std::string& text) {
    detail::TextCursor c{text};
    NmrTextDoc doc;
    if (c.peek("1H")) {
        doc.nucleus = Nucleus::H1;
        c.pos += 2;
    } else if (c.peek("13C")) {
        doc.nucleus = Nucleus::C13;
        c.pos += 3;
    } else {
        fail(errc::malformed_document, "text must start with a 1H or 13C nucleus token");
    }
    c.expect(" NMR (");
    doc.sf_mhz = c.number("spectrometer frequency");
    c.expect(" MHz, ");
    doc.solvent = c.take_until(')', "solvent");
    if (doc.solvent.empty()) fail(errc::malformed_document, "solvent must be non-empty");
    c.expect("): ");
    if (c.done()) return doc;  // header-only document

    while (true) {
        if (doc.nucleus == Nucleus::C13) {
            NmrTextEntry e;
            e.shift_ppm = c.number("chemical shift");
            doc.entries.push_back(e);
        } else {
            doc.entries.push_back(detail::parse_proton_entry(c));
        }
        if (c.done()) break;
        c.expect(", ");
    }
    return doc;
}

}  // namespace nmrx
