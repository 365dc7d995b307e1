#include "rvrecon/signals.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rvrecon {

void RespiratoryTrace::validate() const {
    if (!(sample_rate_hz > 0.0))
        throw std::invalid_argument("RespiratoryTrace: sample_rate_hz must be positive");
    if (samples.empty())
        throw std::invalid_argument("RespiratoryTrace: no samples");
    for (std::size_t i = 0; i < samples.size(); ++i)
        if (!std::isfinite(samples[i]))
            throw std::runtime_error("RespiratoryTrace: non-finite sample at index " + std::to_string(i));
}

void FrameClock::validate() const {
    if (!(tr_s > 0.0))
        throw std::invalid_argument("FrameClock: tr_s must be positive");
    if (n_frames < 1)
        throw std::invalid_argument("FrameClock: n_frames must be >= 1");
}

void MotionSeries::validate() const {
    clock.validate();
    if (rows.size() != clock.n_frames)
        throw std::runtime_error("MotionSeries: " + std::to_string(rows.size()) + " rows but clock has " +
                                 std::to_string(clock.n_frames) + " frames");
    for (std::size_t k = 0; k < rows.size(); ++k)
        for (double v : rows[k])
            if (!std::isfinite(v))
                throw std::runtime_error("MotionSeries: non-finite value at frame " + std::to_string(k));
}

void RoiSeries::validate() const {
    clock.validate();
    if (n_roi < 1)
        throw std::invalid_argument("RoiSeries: n_roi must be >= 1");
    if (data.size() != clock.n_frames * n_roi)
        throw std::runtime_error("RoiSeries: row count does not match clock (" +
                                 std::to_string(data.size() / (n_roi ? n_roi : 1)) + " vs " +
                                 std::to_string(clock.n_frames) + " frames)");
    for (std::size_t i = 0; i < data.size(); ++i)
        if (!std::isfinite(data[i]))
            throw std::runtime_error("RoiSeries: non-finite value at frame " + std::to_string(i / n_roi) +
                                     ", roi " + std::to_string(i % n_roi));
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double population_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) {
        const double d = x - m;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(v.size()));
}

RvSeries compute_rv(const RespiratoryTrace& trace, const FrameClock& clock, double rv_window_s) {
    trace.validate();
    clock.validate();
    if (!(rv_window_s > 0.0))
        throw std::invalid_argument("compute_rv: rv_window_s must be positive");

    const double rate = trace.sample_rate_hz;
    const std::size_t n = trace.samples.size();
    const double half = rv_window_s / 2.0;

    RvSeries rv;
    rv.clock = clock;
    rv.rv_window_s = rv_window_s;
    rv.values.resize(clock.n_frames);

    std::vector<double> window;
    for (std::size_t k = 0; k < clock.n_frames; ++k) {
        const double t = clock.frame_time(k);
        // Sample indices covered by [t - half, t + half], truncated to the
        // recorded extent. Small epsilon so grid-aligned endpoints land inside.
        double lo_pos = (t - half - trace.start_time_s) * rate;
        double hi_pos = (t + half - trace.start_time_s) * rate;
        long ilo = static_cast<long>(std::ceil(lo_pos - 1e-9));
        long ihi = static_cast<long>(std::floor(hi_pos + 1e-9));
        if (ilo < 0) ilo = 0;
        if (ihi > static_cast<long>(n) - 1) ihi = static_cast<long>(n) - 1;
        if (ilo > ihi)
            throw std::runtime_error("compute_rv: frame " + std::to_string(k) + " (t=" + std::to_string(t) +
                                     " s) has no overlap with the respiratory trace");
        window.assign(trace.samples.begin() + ilo, trace.samples.begin() + ihi + 1);
        rv.values[k] = population_std(window);
    }
    return rv;
}

RespiratoryTrace resample_linear(const RespiratoryTrace& trace, double new_rate_hz) {
    trace.validate();
    if (!(new_rate_hz > 0.0))
        throw std::invalid_argument("resample_linear: new_rate_hz must be positive");
    if (trace.samples.size() < 2)
        throw std::runtime_error("resample_linear: need at least 2 samples");

    const std::size_t n = trace.samples.size();
    const double duration = trace.duration_s();
    const std::size_t m = static_cast<std::size_t>(std::floor(duration * new_rate_hz + 1e-9)) + 1;
    const double ratio = trace.sample_rate_hz / new_rate_hz;

    RespiratoryTrace out;
    out.sample_rate_hz = new_rate_hz;
    out.start_time_s = trace.start_time_s;
    out.samples.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        double pos = static_cast<double>(i) * ratio;
        std::size_t j = static_cast<std::size_t>(pos);
        if (j >= n - 1) {
            j = n - 2;
            pos = static_cast<double>(n - 1);
        }
        const double frac = pos - static_cast<double>(j);
        if (frac <= 1e-12)
            out.samples[i] = trace.samples[j];
        else if (frac >= 1.0 - 1e-12)
            out.samples[i] = trace.samples[j + 1];
        else
            out.samples[i] = trace.samples[j] + frac * (trace.samples[j + 1] - trace.samples[j]);
    }
    return out;
}

std::array<std::vector<double>, 6> motion_to_channels(const MotionSeries& motion) {
    motion.validate();
    std::array<std::vector<double>, 6> ch;
    for (auto& c : ch) c.resize(motion.rows.size());
    for (std::size_t k = 0; k < motion.rows.size(); ++k)
        for (std::size_t i = 0; i < 6; ++i)
            ch[i][k] = motion.rows[k][i];
    return ch;
}

}  // namespace rvrecon
