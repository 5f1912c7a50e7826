#pragma once

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "fid.hpp"
#include "numeric.hpp"

namespace nmrx {

enum class WindowKind { exponential, gaussian, sine_bell };

struct WindowFunction {
    WindowKind kind = WindowKind::exponential;
    double line_broadening_hz = 0.3;  // exponential lb
    double gaussian_broadening_hz = 1.0;
    double sine_bell_offset_rad = M_PI / 2;  // pi/2 keeps the first point at full weight

    static WindowFunction exponential(double lb) {
        WindowFunction w;
        w.kind = WindowKind::exponential;
        w.line_broadening_hz = lb;
        return w;
    }
    static WindowFunction gaussian(double gb) {
        WindowFunction w;
        w.kind = WindowKind::gaussian;
        w.gaussian_broadening_hz = gb;
        return w;
    }
    static WindowFunction sine_bell(double offset) {
        WindowFunction w;
        w.kind = WindowKind::sine_bell;
        w.sine_bell_offset_rad = offset;
        return w;
    }

    double weight(std::size_t k, std::size_t n, double sweep_width_hz) const {
        double t = static_cast<double>(k) / sweep_width_hz;
        switch (kind) {
            case WindowKind::exponential:
                return std::exp(-M_PI * line_broadening_hz * t);
            case WindowKind::gaussian: {
                double a = M_PI * gaussian_broadening_hz * t;
                return std::exp(-(a * a) / (4.0 * std::log(2.0)));
            }
            case WindowKind::sine_bell: {
                double frac = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
                return std::sin(sine_bell_offset_rad + (M_PI - sine_bell_offset_rad) * frac);
            }
        }
        return 1.0;
    }

    std::string describe() const {
        std::ostringstream s;
        switch (kind) {
            case WindowKind::exponential: s << "exponential:lb=" << line_broadening_hz; break;
            case WindowKind::gaussian: s << "gaussian:gb=" << gaussian_broadening_hz; break;
            case WindowKind::sine_bell: s << "sine_bell:offset=" << sine_bell_offset_rad; break;
        }
        return s.str();
    }
};

inline Fid apodize(const Fid& fid, const WindowFunction& window) {
    fid.validate();
    require(fid.params.num_points >= 2, errc::too_short, "apodize needs at least 2 points");
    Fid out = fid;
    const std::size_t n = fid.params.num_points;
    for (std::size_t k = 0; k < n; ++k) {
        double w = window.weight(k, n, fid.params.sweep_width_hz);
        out.real[k] *= w;
        out.imag[k] *= w;
    }
    out.processing_log.push_back("apodize:" + window.describe());
    return out;
}

// Pads with zeros to the smallest power of two that is at least twice the
// current length, which both fixes the FFT size and doubles digital resolution.
inline Fid zero_fill(const Fid& fid) {
    fid.validate();
    Fid out = fid;
    std::size_t target = next_power_of_two(2 * fid.params.num_points);
    out.real.resize(target, 0.0);
    out.imag.resize(target, 0.0);
    out.params.num_points = target;
    out.processing_log.push_back("zero_fill:" + std::to_string(target));
    return out;
}

/** In-place iterative radix-2 FFT. sign = -1 gives the forward transform
 *  (e^{-i omega t} convention), sign = +1 the unscaled inverse. */
inline void fft_radix2(std::vector<cplx>& a, int sign) {
    const std::size_t n = a.size();
    require(is_power_of_two(n), errc::not_power_of_two,
            "FFT length must be a power of two, got " + std::to_string(n));
    // bit-reversal permutation
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = sign * 2.0 * M_PI / static_cast<double>(len);
        cplx wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            cplx w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                cplx u = a[i + k];
                cplx v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

inline std::vector<cplx> fft(std::vector<cplx> a) {
    fft_radix2(a, -1);
    return a;
}

inline std::vector<cplx> ifft(std::vector<cplx> a) {
    fft_radix2(a, +1);
    const double inv = 1.0 / static_cast<double>(a.size());
    for (auto& v : a) v *= inv;
    return a;
}

/**
 * Transforms a (typically apodized and zero-filled) FID into a Spectrum.
 * Bins are reordered so the frequency axis runs from +sw/2 down past the
 * carrier to -sw/2, and the ppm axis is freq/sf plus the reference offset,
 * strictly decreasing left to right as spectra are conventionally drawn.
 */
inline Spectrum fft_spectrum(const Fid& fid) {
    fid.validate();
    const std::size_t n = fid.params.num_points;
    require(is_power_of_two(n), errc::not_power_of_two,
            "spectrum transform needs a power-of-two FID, got " + std::to_string(n) +
                " (zero_fill first)");
    std::vector<cplx> bins = fft(fid.samples());

    Spectrum sp;
    sp.params = fid.params;
    sp.real.resize(n);
    sp.imag.resize(n);
    sp.ppm_axis.resize(n);
    const double hz_per_bin = fid.params.sweep_width_hz / static_cast<double>(n);
    const double sf = fid.params.spectrometer_frequency_mhz;
    for (std::size_t j = 0; j < n; ++j) {
        std::size_t src = (n / 2 + n - j) % n;
        sp.real[j] = bins[src].real();
        sp.imag[j] = bins[src].imag();
        double freq_hz = fid.params.sweep_width_hz / 2.0 - static_cast<double>(j) * hz_per_bin;
        sp.ppm_axis[j] = freq_hz / sf + fid.params.reference_offset_ppm;
    }
    sp.processing_log = fid.processing_log;
    sp.processing_log.push_back("fft");
    sp.validate();
    return sp;
}

}  // namespace nmrx
