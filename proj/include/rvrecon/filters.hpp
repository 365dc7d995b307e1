#pragma once

#include <complex>
#include <vector>

#include "rvrecon/signals.hpp"

namespace rvrecon {

// Frequency band for motion filtering. `order` is the order of the final
// band-pass (or band-stop) filter and must be a positive even integer; the
// underlying low-pass prototype has order/2 pole pairs.
struct BandSpec {
    double low_hz = 0.2;
    double high_hz = 0.5;
    int order = 4;
    enum class Kind { bandpass, notch } kind = Kind::bandpass;
};

// One second-order section with unit a0.
struct Biquad {
    double b0 = 1.0, b1 = 0.0, b2 = 0.0;
    double a1 = 0.0, a2 = 0.0;
};

// Cascade of second-order sections designed for a specific sample rate.
struct SosFilter {
    std::vector<Biquad> sections;
    double sample_rate_hz = 0.0;

    int order() const { return 2 * static_cast<int>(sections.size()); }

    // Throws unless every section's poles lie strictly inside the unit circle.
    void validate() const;
};

// Maximally-flat (Butterworth) band-pass or band-stop design by bilinear
// transform with frequency prewarping. Band edges must satisfy
// 0 < low < high < sample_rate/2.
SosFilter design_bandpass(const BandSpec& spec, double sample_rate_hz);

// Complex gain of the cascade at each frequency, evaluated on the unit circle.
// Frequencies must lie in [0, Nyquist].
std::vector<std::complex<double>> frequency_response(const SosFilter& filter,
                                                     const std::vector<double>& freqs_hz);

// Zero-phase filtering: forward pass, reverse, backward pass, reverse.
// Edges are handled by odd-symmetric reflection padding of 3*order samples;
// output length equals input length. Requires channel length >= 9*order.
std::vector<double> filtfilt(const SosFilter& filter, const std::vector<double>& channel);

// filtfilt applied independently to each of the six motion channels at the
// frame rate 1/tr_s. The clock is unchanged.
MotionSeries filter_motion(const MotionSeries& motion, const BandSpec& spec);

}  // namespace rvrecon
