#pragma once

#include <complex>
#include <string>
#include <vector>

#include "errors.hpp"
#include "numeric.hpp"

namespace nmrx {

enum class Nucleus { H1, C13 };

inline const char* nucleus_name(Nucleus n) { return n == Nucleus::H1 ? "H1" : "C13"; }

inline Nucleus nucleus_from_string(const std::string& s) {
    if (s == "H1") return Nucleus::H1;
    if (s == "C13") return Nucleus::C13;
    fail(errc::malformed_document, "unknown nucleus '" + s + "' (expected H1 or C13)");
}

struct AcquisitionParams {
    double spectrometer_frequency_mhz = 0.0;
    double sweep_width_hz = 0.0;
    std::size_t num_points = 0;
    Nucleus nucleus = Nucleus::H1;
    std::string solvent;
    // ppm value at the centre of the frequency axis; 0 keeps 0 ppm centred.
    double reference_offset_ppm = 0.0;

    void validate() const {
        require(spectrometer_frequency_mhz > 0.0, errc::invariant_violation,
                "spectrometer_frequency_mhz must be positive");
        require(sweep_width_hz > 0.0, errc::invariant_violation,
                "sweep_width_hz must be positive");
        require(num_points >= 1, errc::invariant_violation, "num_points must be at least 1");
        require(std::isfinite(reference_offset_ppm), errc::invariant_violation,
                "reference_offset_ppm must be finite");
    }
};

// Complex free induction decay exactly as acquired (or synthesized).
struct Fid {
    AcquisitionParams params;
    std::vector<double> real;
    std::vector<double> imag;
    std::vector<std::string> processing_log;

    void validate() const {
        params.validate();
        require(real.size() == params.num_points && imag.size() == params.num_points,
                errc::invariant_violation, "num_points disagrees with sample array lengths");
        require(all_finite(real) && all_finite(imag), errc::invariant_violation,
                "FID samples must be finite");
    }

    std::vector<cplx> samples() const {
        std::vector<cplx> s(real.size());
        for (std::size_t i = 0; i < s.size(); ++i) s[i] = {real[i], imag[i]};
        return s;
    }
};

/**
 * Frequency domain spectrum. Bins run parallel to ppm_axis, which is strictly
 * decreasing (+sw/2 down to -sw/2 around the carrier, converted to ppm).
 * processing_log records each applied stage ("apodize:...", "zero_fill:...",
 * "fft", "phase:...", "baseline:...") so later stages can check their
 * preconditions.
 */
struct Spectrum {
    AcquisitionParams params;
    std::vector<double> real;
    std::vector<double> imag;
    std::vector<double> ppm_axis;
    std::vector<std::string> processing_log;

    std::size_t size() const { return real.size(); }

    void validate() const {
        params.validate();
        require(real.size() == imag.size() && real.size() == ppm_axis.size(),
                errc::invariant_violation, "spectrum array lengths disagree");
        require(all_finite(real) && all_finite(imag), errc::invariant_violation,
                "spectrum bins must be finite");
        for (std::size_t i = 1; i < ppm_axis.size(); ++i)
            require(ppm_axis[i] < ppm_axis[i - 1], errc::invariant_violation,
                    "ppm axis must be strictly decreasing");
    }

    bool has_log_prefix(const std::string& prefix) const {
        for (const auto& e : processing_log)
            if (e.rfind(prefix, 0) == 0) return true;
        return false;
    }

    // Digital resolution in Hz per bin.
    double hz_per_bin() const {
        return params.sweep_width_hz / static_cast<double>(real.size());
    }

    double ppm_per_bin() const { return hz_per_bin() / params.spectrometer_frequency_mhz; }
};

}  // namespace nmrx
