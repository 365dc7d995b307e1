#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rvrecon/filters.hpp"
#include "rvrecon/signals.hpp"

namespace rvrecon {

// Sliding-window geometry. The three regression targets sit at the first,
// middle (floor of (len-1)/2) and last frame of each window.
struct WindowSpec {
    std::size_t window_len_frames = 65;
    std::size_t stride_frames = 1;

    std::array<std::size_t, 3> target_offsets() const {
        return {0, (window_len_frames - 1) / 2, window_len_frames - 1};
    }
    void validate() const;
};

// Which inputs feed the regressor.
struct ExperimentArm {
    enum class Kind { bold_only, bold_raw_motion, bold_filtered_motion };
    Kind kind = Kind::bold_only;
    BandSpec band;  // only used by bold_filtered_motion

    bool uses_motion() const { return kind != Kind::bold_only; }
    std::string name() const;
    // Accepts "bold", "bold+motion", "bold+motion-filtered".
    static ExperimentArm parse(const std::string& name);
};

// Per-channel normalization statistics of one scan, kept for prediction time.
struct ChannelStats {
    std::vector<double> mean;
    std::vector<double> stddev;  // population
};

// Assembled, z-scored input block of one scan: ROI channels first (0..n_roi-1),
// then the six motion channels when the arm uses them. Channel-major storage.
struct ScanChannels {
    std::string scan_id;
    FrameClock clock;
    std::size_t n_channels = 0;
    std::vector<double> data;  // [c * n_frames + t]
    ChannelStats stats;

    double at(std::size_t c, std::size_t t) const { return data[c * clock.n_frames + t]; }
    const double* channel(std::size_t c) const { return data.data() + c * clock.n_frames; }
};

// One materialized window: a channels x window_len block plus its 3 RV targets.
struct WindowSample {
    std::string scan_id;
    std::size_t start_frame = 0;
    std::size_t n_channels = 0;
    std::size_t window_len = 0;
    std::vector<double> inputs;  // [c * window_len + t]
    std::array<double, 3> targets{};
};

// All windows of one scan. Windows reference the shared scan block and are
// materialized on demand, so a dense stride-1 set stays cheap to hold.
struct ScanWindows {
    std::shared_ptr<const ScanChannels> scan;
    WindowSpec spec;
    std::vector<std::size_t> starts;
    std::vector<std::array<double, 3>> targets;

    std::size_t size() const { return starts.size(); }
    std::size_t n_channels() const { return scan->n_channels; }
    const std::string& scan_id() const { return scan->scan_id; }

    // Copies window i into dst as a channels x window_len block.
    void copy_inputs(std::size_t i, double* dst) const;
    WindowSample sample(std::size_t i) const;
};

// --- readers / writers ------------------------------------------------------

// Whitespace-separated numeric columns, one sample per line. Column 1 is the
// respiration channel in the HCP [trigger, respiration, pulse] layout.
RespiratoryTrace read_physio(const std::string& path, std::size_t column_index = 1,
                             double sample_rate_hz = 400.0);
// Writes the trace in the 3-column layout with respiration in column 1.
void write_physio(const std::string& path, const RespiratoryTrace& trace);

// MCFLIRT-style .par: one frame per line, 6 whitespace-separated values,
// rotations (radians) before translations (mm).
MotionSeries read_motion_par(const std::string& path, const FrameClock& clock);
void write_motion_par(const std::string& path, const MotionSeries& motion);

// Comma- or tab-separated frames x ROIs table with an optional header row.
RoiSeries read_roi_table(const std::string& path, const FrameClock& clock);
void write_roi_table(const std::string& path, const RoiSeries& roi);

// "frame_index,time_s,rv" rows, header line included.
RvSeries read_rv_csv(const std::string& path);
void write_rv_csv(const std::string& path, const RvSeries& rv);

// --- normalization and windowing ---------------------------------------------

// In-place per-channel z-score of a channel-major block: each channel ends up
// with mean 0 and population std 1 over the scan; channels with std below
// 1e-12 are only mean-subtracted. Returns the statistics applied.
ChannelStats zscore_per_channel(std::vector<double>& data, std::size_t n_channels, std::size_t n_frames);

// Stack ROI channels (and motion channels, raw or band-filtered, when the arm
// asks for them) into one z-scored block.
ScanChannels assemble_channels(const RoiSeries& roi, const MotionSeries* motion,
                               const ExperimentArm& arm, const std::string& scan_id);

// Sliding windows over one scan. All series must share the scan clock; the
// scan must be at least one window long.
ScanWindows build_windows(const RoiSeries& roi, const MotionSeries* motion, const RvSeries& rv,
                          const ExperimentArm& arm, const WindowSpec& spec, const std::string& scan_id);

// --- train/test splitting -----------------------------------------------------

struct ScanSplit {
    std::vector<std::string> train;
    std::vector<std::string> test;
};

// Deterministic partition of scan ids: no scan contributes to both sides.
// `scan_ids` may contain duplicates (e.g. one entry per sample).
ScanSplit split_by_scan(const std::vector<std::string>& scan_ids, double train_fraction,
                        std::uint64_t seed);

}  // namespace rvrecon
