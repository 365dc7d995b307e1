#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace rvrecon {

// Uniformly sampled respiratory belt recording.
struct RespiratoryTrace {
    std::vector<double> samples;    // amplitude, arbitrary units
    double sample_rate_hz = 400.0;  // HCP physio convention
    double start_time_s = 0.0;

    std::size_t size() const { return samples.size(); }
    double time_at(std::size_t i) const { return start_time_s + static_cast<double>(i) / sample_rate_hz; }
    double end_time_s() const { return samples.empty() ? start_time_s : time_at(samples.size() - 1); }
    double duration_s() const { return end_time_s() - start_time_s; }

    // Throws if the rate is non-positive, the trace is empty, or any sample is non-finite.
    void validate() const;
};

// Frame timing shared by all per-frame series of one scan.
struct FrameClock {
    double tr_s = 0.72;
    std::size_t n_frames = 0;
    double start_time_s = 0.0;

    double frame_time(std::size_t k) const { return start_time_s + static_cast<double>(k) * tr_s; }
    bool operator==(const FrameClock&) const = default;
    void validate() const;
};

// Per-frame respiratory variation value aligned to a frame clock.
struct RvSeries {
    std::vector<double> values;
    FrameClock clock;
    double rv_window_s = 6.0;
};

// Six rigid-body motion parameters per frame.
// Channel order is fixed: rot_x, rot_y, rot_z (radians), trans_x, trans_y, trans_z (mm).
struct MotionSeries {
    std::vector<std::array<double, 6>> rows;
    FrameClock clock;

    void validate() const;
};

// Mean BOLD signal per region, one row per frame. Row-major n_frames x n_roi.
struct RoiSeries {
    std::vector<double> data;
    std::size_t n_roi = 0;
    FrameClock clock;

    double at(std::size_t frame, std::size_t roi) const { return data[frame * n_roi + roi]; }
    double& at(std::size_t frame, std::size_t roi) { return data[frame * n_roi + roi]; }

    void validate() const;
};

// Mean of a sequence.
double mean_of(const std::vector<double>& v);

// Population (divide-by-N) standard deviation.
double population_std(const std::vector<double>& v);

// RV at frame k = population standard deviation of the trace samples whose
// timestamps fall in [t_k - rv_window_s/2, t_k + rv_window_s/2]. Windows are
// truncated at the recording boundaries; a frame whose window does not
// overlap the trace at all is an error.
RvSeries compute_rv(const RespiratoryTrace& trace, const FrameClock& clock, double rv_window_s = 6.0);

// Linear interpolation onto a uniform grid at new_rate_hz spanning the same
// time interval. Endpoints are preserved. Requires at least two samples.
RespiratoryTrace resample_linear(const RespiratoryTrace& trace, double new_rate_hz);

// Split a MotionSeries into its six per-frame channels in the fixed order
// rot_x, rot_y, rot_z, trans_x, trans_y, trans_z.
std::array<std::vector<double>, 6> motion_to_channels(const MotionSeries& motion);

}  // namespace rvrecon
