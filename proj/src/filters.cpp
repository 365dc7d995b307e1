#include "rvrecon/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace rvrecon {

namespace {

using cplx = std::complex<double>;

// Magnitudes of the roots of z^2 + a1 z + a2.
std::pair<double, double> pole_magnitudes(const Biquad& s) {
    const cplx a1(s.a1, 0.0), a2(s.a2, 0.0);
    const cplx disc = std::sqrt(a1 * a1 - 4.0 * a2);
    const cplx r1 = (-a1 + disc) / 2.0;
    const cplx r2 = (-a1 - disc) / 2.0;
    return {std::abs(r1), std::abs(r2)};
}

// Butterworth low-pass prototype poles (unit cutoff, left half-plane).
std::vector<cplx> prototype_poles(int n) {
    std::vector<cplx> poles;
    poles.reserve(n);
    for (int k = 0; k < n; ++k) {
        const double theta = std::numbers::pi * (2.0 * k + n + 1.0) / (2.0 * n);
        poles.emplace_back(std::cos(theta), std::sin(theta));
    }
    return poles;
}

cplx bilinear_map(cplx s, double fs2) { return (fs2 + s) / (fs2 - s); }

// Group digital poles into conjugate (or real) pairs, deterministically.
std::vector<std::pair<cplx, cplx>> pair_poles(std::vector<cplx> poles) {
    constexpr double imag_tol = 1e-10;
    std::vector<cplx> upper, reals;
    for (const cplx& p : poles) {
        if (p.imag() > imag_tol)
            upper.push_back(p);
        else if (p.imag() >= -imag_tol)
            reals.push_back(p);
    }
    auto by_re_im = [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    };
    std::sort(upper.begin(), upper.end(), by_re_im);
    std::sort(reals.begin(), reals.end(), by_re_im);
    if (reals.size() % 2 != 0)
        throw std::runtime_error("design_bandpass: internal pole pairing failure");

    std::vector<std::pair<cplx, cplx>> pairs;
    for (const cplx& p : upper) pairs.emplace_back(p, std::conj(p));
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) pairs.emplace_back(reals[i], reals[i + 1]);
    return pairs;
}

}  // namespace

void SosFilter::validate() const {
    if (sections.empty())
        throw std::runtime_error("SosFilter: no sections");
    if (!(sample_rate_hz > 0.0))
        throw std::runtime_error("SosFilter: sample rate must be positive");
    for (std::size_t i = 0; i < sections.size(); ++i) {
        auto [m1, m2] = pole_magnitudes(sections[i]);
        if (!(m1 < 1.0 - 1e-9) || !(m2 < 1.0 - 1e-9))
            throw std::runtime_error("SosFilter: section " + std::to_string(i) +
                                     " is unstable (pole magnitude " + std::to_string(std::max(m1, m2)) + ")");
    }
}

SosFilter design_bandpass(const BandSpec& spec, double sample_rate_hz) {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("design_bandpass: sample rate must be positive");
    const double nyquist = sample_rate_hz / 2.0;
    if (!(spec.low_hz > 0.0) || !(spec.low_hz < spec.high_hz) || !(spec.high_hz < nyquist))
        throw std::invalid_argument("design_bandpass: band must satisfy 0 < low < high < Nyquist (" +
                                    std::to_string(spec.low_hz) + ", " + std::to_string(spec.high_hz) +
                                    " at fs=" + std::to_string(sample_rate_hz) + ")");
    if (spec.order <= 0 || spec.order % 2 != 0)
        throw std::invalid_argument("design_bandpass: order must be a positive even integer, got " +
                                    std::to_string(spec.order));

    const int n = spec.order / 2;  // low-pass prototype order
    const double fs2 = 2.0 * sample_rate_hz;
    const double wl = fs2 * std::tan(std::numbers::pi * spec.low_hz / sample_rate_hz);
    const double wh = fs2 * std::tan(std::numbers::pi * spec.high_hz / sample_rate_hz);
    const double bw = wh - wl;
    const double w0 = std::sqrt(wl * wh);

    std::vector<cplx> analog_poles;
    std::vector<cplx> analog_zeros;
    double analog_gain = 1.0;
    if (spec.kind == BandSpec::Kind::bandpass) {
        for (const cplx& p : prototype_poles(n)) {
            const cplx half = p * (bw / 2.0);
            const cplx disc = std::sqrt(half * half - w0 * w0);
            analog_poles.push_back(half + disc);
            analog_poles.push_back(half - disc);
        }
        analog_zeros.assign(n, cplx(0.0, 0.0));
        analog_gain = std::pow(bw, n);
    } else {
        for (const cplx& p : prototype_poles(n)) {
            const cplx hp = (bw / 2.0) / p;
            const cplx disc = std::sqrt(hp * hp - w0 * w0);
            analog_poles.push_back(hp + disc);
            analog_poles.push_back(hp - disc);
        }
        for (int i = 0; i < n; ++i) {
            analog_zeros.emplace_back(0.0, w0);
            analog_zeros.emplace_back(0.0, -w0);
        }
    }

    // Bilinear transform; gain correction from the (fs2 - s) factors.
    cplx num(analog_gain, 0.0), den(1.0, 0.0);
    for (const cplx& z : analog_zeros) num *= (fs2 - z);
    for (const cplx& p : analog_poles) den *= (fs2 - p);
    const double digital_gain = (num / den).real();

    std::vector<cplx> digital_poles;
    for (const cplx& p : analog_poles) digital_poles.push_back(bilinear_map(p, fs2));

    auto pairs = pair_poles(std::move(digital_poles));
    const int nsec = static_cast<int>(pairs.size());
    const double g = std::pow(std::abs(digital_gain), 1.0 / nsec);
    const double gsign = digital_gain < 0.0 ? -1.0 : 1.0;

    // Numerator per section: band-pass pairs one zero at z=+1 with one at
    // z=-1; band-stop places a conjugate zero pair on the unit circle at the
    // warped center frequency.
    double nb0 = 1.0, nb1 = 0.0, nb2 = -1.0;
    if (spec.kind == BandSpec::Kind::notch) {
        const cplx z0 = bilinear_map(cplx(0.0, w0), fs2);
        nb1 = -2.0 * z0.real();
        nb2 = 1.0;
    }

    SosFilter filt;
    filt.sample_rate_hz = sample_rate_hz;
    for (int i = 0; i < nsec; ++i) {
        const auto& [p1, p2] = pairs[i];
        Biquad s;
        const double gi = (i == 0) ? g * gsign : g;
        s.b0 = gi * nb0;
        s.b1 = gi * nb1;
        s.b2 = gi * nb2;
        s.a1 = -(p1 + p2).real();
        s.a2 = (p1 * p2).real();
        filt.sections.push_back(s);
    }
    filt.validate();
    return filt;
}

std::vector<std::complex<double>> frequency_response(const SosFilter& filter,
                                                     const std::vector<double>& freqs_hz) {
    const double nyquist = filter.sample_rate_hz / 2.0;
    std::vector<cplx> out;
    out.reserve(freqs_hz.size());
    for (double f : freqs_hz) {
        if (f < 0.0 || f > nyquist * (1.0 + 1e-12))
            throw std::invalid_argument("frequency_response: frequency " + std::to_string(f) +
                                        " Hz outside [0, Nyquist=" + std::to_string(nyquist) + "]");
        const double w = 2.0 * std::numbers::pi * f / filter.sample_rate_hz;
        const cplx zinv = std::polar(1.0, -w);
        const cplx zinv2 = zinv * zinv;
        cplx h(1.0, 0.0);
        for (const Biquad& s : filter.sections)
            h *= (s.b0 + s.b1 * zinv + s.b2 * zinv2) / (1.0 + s.a1 * zinv + s.a2 * zinv2);
        out.push_back(h);
    }
    return out;
}

namespace {

// Steady-state (unit-step) internal state of one DF2T section.
std::pair<double, double> section_step_state(const Biquad& s) {
    const double denom = 1.0 + s.a1 + s.a2;
    const double y_ss = (s.b0 + s.b1 + s.b2) / denom;
    const double z2 = s.b2 - s.a2 * y_ss;
    const double z1 = s.b1 + s.b2 - (s.a1 + s.a2) * y_ss;
    return {z1, z2};
}

double section_dc_gain(const Biquad& s) {
    return (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
}

// One forward pass of the cascade, transposed direct form II, with internal
// states initialized to the step steady state scaled by the first sample.
void sosfilt_inplace(const SosFilter& filter, std::vector<double>& x) {
    double scale = x.empty() ? 0.0 : x.front();
    for (const Biquad& s : filter.sections) {
        auto [z1i, z2i] = section_step_state(s);
        double z1 = z1i * scale;
        double z2 = z2i * scale;
        for (double& v : x) {
            const double in = v;
            const double y = s.b0 * in + z1;
            z1 = s.b1 * in - s.a1 * y + z2;
            z2 = s.b2 * in - s.a2 * y;
            v = y;
        }
        scale *= section_dc_gain(s);
    }
}

}  // namespace

std::vector<double> filtfilt(const SosFilter& filter, const std::vector<double>& channel) {
    filter.validate();
    const std::size_t n = channel.size();
    const std::size_t pad = 3 * static_cast<std::size_t>(filter.order());
    if (n < 3 * pad)
        throw std::runtime_error("filtfilt: channel length " + std::to_string(n) + " is shorter than 3x the " +
                                 std::to_string(pad) + "-sample reflection pad");

    // Odd-symmetric extension at both ends.
    std::vector<double> ext;
    ext.reserve(n + 2 * pad);
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * channel.front() - channel[pad - i]);
    ext.insert(ext.end(), channel.begin(), channel.end());
    for (std::size_t i = 0; i < pad; ++i) ext.push_back(2.0 * channel.back() - channel[n - 2 - i]);

    sosfilt_inplace(filter, ext);
    std::reverse(ext.begin(), ext.end());
    sosfilt_inplace(filter, ext);
    std::reverse(ext.begin(), ext.end());

    return std::vector<double>(ext.begin() + pad, ext.begin() + pad + n);
}

MotionSeries filter_motion(const MotionSeries& motion, const BandSpec& spec) {
    motion.validate();
    const double frame_rate = 1.0 / motion.clock.tr_s;
    const SosFilter filt = design_bandpass(spec, frame_rate);

    MotionSeries out;
    out.clock = motion.clock;
    out.rows.resize(motion.rows.size());
    auto channels = motion_to_channels(motion);
    for (std::size_t c = 0; c < 6; ++c) {
        const std::vector<double> filtered = filtfilt(filt, channels[c]);
        for (std::size_t k = 0; k < filtered.size(); ++k) out.rows[k][c] = filtered[k];
    }
    return out;
}

}  // namespace rvrecon
