#include "rvrecon/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

namespace rvrecon {

namespace {

std::string loc(const std::string& path, std::size_t lineno) {
    return path + ":" + std::to_string(lineno);
}

double parse_number(const std::string& tok, const std::string& path, std::size_t lineno) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin || *end != '\0')
        throw std::runtime_error(loc(path, lineno) + ": cannot parse '" + tok + "' as a number");
    if (!std::isfinite(v))
        throw std::runtime_error(loc(path, lineno) + ": non-finite value '" + tok + "'");
    return v;
}

bool is_number(const std::string& tok) {
    const char* begin = tok.c_str();
    char* end = nullptr;
    (void)std::strtod(begin, &end);
    return end != begin && *end == '\0';
}

std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

std::vector<std::string> split_on(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

bool blank(const std::string& line) {
    return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void WindowSpec::validate() const {
    if (window_len_frames < 1) throw std::invalid_argument("WindowSpec: window length must be >= 1");
    if (stride_frames < 1) throw std::invalid_argument("WindowSpec: stride must be >= 1");
}

std::string ExperimentArm::name() const {
    switch (kind) {
        case Kind::bold_only: return "bold";
        case Kind::bold_raw_motion: return "bold+motion";
        case Kind::bold_filtered_motion: return "bold+motion-filtered";
    }
    return "?";
}

ExperimentArm ExperimentArm::parse(const std::string& name) {
    ExperimentArm arm;
    if (name == "bold")
        arm.kind = Kind::bold_only;
    else if (name == "bold+motion")
        arm.kind = Kind::bold_raw_motion;
    else if (name == "bold+motion-filtered")
        arm.kind = Kind::bold_filtered_motion;
    else
        throw std::invalid_argument("unknown arm '" + name +
                                    "' (expected bold, bold+motion or bold+motion-filtered)");
    return arm;
}

RespiratoryTrace read_physio(const std::string& path, std::size_t column_index, double sample_rate_hz) {
    const auto lines = read_lines(path);
    RespiratoryTrace tr;
    tr.sample_rate_hz = sample_rate_hz;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const auto toks = split_ws(lines[i]);
        if (column_index >= toks.size())
            throw std::runtime_error(loc(path, i + 1) + ": column " + std::to_string(column_index) +
                                     " requested but line has " + std::to_string(toks.size()) + " columns");
        tr.samples.push_back(parse_number(toks[column_index], path, i + 1));
    }
    if (tr.samples.empty()) throw std::runtime_error(path + ": empty physio file");
    return tr;
}

void write_physio(const std::string& path, const RespiratoryTrace& trace) {
    trace.validate();
    auto out = open_out(path);
    for (double v : trace.samples) out << "0 " << fmt17(v) << " 0\n";
}

MotionSeries read_motion_par(const std::string& path, const FrameClock& clock) {
    clock.validate();
    const auto lines = read_lines(path);
    MotionSeries m;
    m.clock = clock;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const auto toks = split_ws(lines[i]);
        if (toks.size() != 6)
            throw std::runtime_error(loc(path, i + 1) + ": expected 6 motion parameters, got " +
                                     std::to_string(toks.size()));
        std::array<double, 6> row;
        for (std::size_t c = 0; c < 6; ++c) row[c] = parse_number(toks[c], path, i + 1);
        m.rows.push_back(row);
    }
    if (m.rows.size() != clock.n_frames)
        throw std::runtime_error(path + ": " + std::to_string(m.rows.size()) + " frames but clock expects " +
                                 std::to_string(clock.n_frames));
    return m;
}

void write_motion_par(const std::string& path, const MotionSeries& motion) {
    motion.validate();
    auto out = open_out(path);
    for (const auto& row : motion.rows) {
        for (std::size_t c = 0; c < 6; ++c) out << (c ? " " : "") << fmt17(row[c]);
        out << "\n";
    }
}

RoiSeries read_roi_table(const std::string& path, const FrameClock& clock) {
    clock.validate();
    const auto lines = read_lines(path);
    std::vector<std::string> rows;
    for (const auto& l : lines)
        if (!blank(l)) rows.push_back(l);
    if (rows.empty()) throw std::runtime_error(path + ": empty ROI table");

    const char delim = rows[0].find('\t') != std::string::npos ? '\t' : ',';
    std::size_t first = 0;
    {
        const auto cells = split_on(rows[0], delim);
        const bool header = !std::all_of(cells.begin(), cells.end(),
                                         [](const std::string& c) { return is_number(c); });
        if (header) first = 1;
    }
    if (first >= rows.size()) throw std::runtime_error(path + ": ROI table has a header but no data");

    RoiSeries roi;
    roi.clock = clock;
    roi.n_roi = split_on(rows[first], delim).size();
    for (std::size_t r = first; r < rows.size(); ++r) {
        const auto cells = split_on(rows[r], delim);
        if (cells.size() != roi.n_roi)
            throw std::runtime_error(loc(path, r + 1) + ": ragged row, " + std::to_string(cells.size()) +
                                     " cells but table has " + std::to_string(roi.n_roi) + " columns");
        for (const auto& c : cells) roi.data.push_back(parse_number(c, path, r + 1));
    }
    if (roi.data.size() != clock.n_frames * roi.n_roi)
        throw std::runtime_error(path + ": " + std::to_string(roi.data.size() / roi.n_roi) +
                                 " frames but clock expects " + std::to_string(clock.n_frames));
    return roi;
}

void write_roi_table(const std::string& path, const RoiSeries& roi) {
    roi.validate();
    auto out = open_out(path);
    for (std::size_t t = 0; t < roi.clock.n_frames; ++t) {
        for (std::size_t j = 0; j < roi.n_roi; ++j) out << (j ? "," : "") << fmt17(roi.at(t, j));
        out << "\n";
    }
}

RvSeries read_rv_csv(const std::string& path) {
    const auto lines = read_lines(path);
    RvSeries rv;
    std::vector<double> times;
    bool saw_header = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (blank(lines[i])) continue;
        const auto cells = split_on(lines[i], ',');
        if (cells.size() != 3)
            throw std::runtime_error(loc(path, i + 1) + ": expected frame_index,time_s,rv");
        if (!is_number(cells[0])) {
            if (saw_header || !rv.values.empty())
                throw std::runtime_error(loc(path, i + 1) + ": unexpected non-numeric row");
            saw_header = true;
            continue;
        }
        const double idx = parse_number(cells[0], path, i + 1);
        if (idx != static_cast<double>(rv.values.size()))
            throw std::runtime_error(loc(path, i + 1) + ": frame indices must start at 0 and be consecutive");
        times.push_back(parse_number(cells[1], path, i + 1));
        const double v = parse_number(cells[2], path, i + 1);
        if (v < 0.0) throw std::runtime_error(loc(path, i + 1) + ": negative RV value");
        rv.values.push_back(v);
    }
    if (rv.values.empty()) throw std::runtime_error(path + ": empty RV file");
    rv.clock.n_frames = rv.values.size();
    rv.clock.start_time_s = times.front();
    rv.clock.tr_s = times.size() > 1 ? (times.back() - times.front()) / static_cast<double>(times.size() - 1)
                                     : 0.72;
    return rv;
}

void write_rv_csv(const std::string& path, const RvSeries& rv) {
    auto out = open_out(path);
    out << "frame_index,time_s,rv\n";
    for (std::size_t k = 0; k < rv.values.size(); ++k)
        out << k << "," << fmt17(rv.clock.frame_time(k)) << "," << fmt17(rv.values[k]) << "\n";
}

ChannelStats zscore_per_channel(std::vector<double>& data, std::size_t n_channels, std::size_t n_frames) {
    if (data.size() != n_channels * n_frames)
        throw std::invalid_argument("zscore_per_channel: block size does not match channels x frames");
    ChannelStats st;
    st.mean.resize(n_channels);
    st.stddev.resize(n_channels);
    for (std::size_t c = 0; c < n_channels; ++c) {
        double* ch = data.data() + c * n_frames;
        double m = 0.0;
        for (std::size_t t = 0; t < n_frames; ++t) m += ch[t];
        m /= static_cast<double>(n_frames);
        double ss = 0.0;
        for (std::size_t t = 0; t < n_frames; ++t) ss += (ch[t] - m) * (ch[t] - m);
        const double sd = std::sqrt(ss / static_cast<double>(n_frames));
        st.mean[c] = m;
        st.stddev[c] = sd;
        if (sd < 1e-12) {
            for (std::size_t t = 0; t < n_frames; ++t) ch[t] = 0.0;
        } else {
            for (std::size_t t = 0; t < n_frames; ++t) ch[t] = (ch[t] - m) / sd;
        }
    }
    return st;
}

ScanChannels assemble_channels(const RoiSeries& roi, const MotionSeries* motion,
                               const ExperimentArm& arm, const std::string& scan_id) {
    roi.validate();
    const std::size_t n_frames = roi.clock.n_frames;

    ScanChannels sc;
    sc.scan_id = scan_id;
    sc.clock = roi.clock;
    sc.n_channels = roi.n_roi + (arm.uses_motion() ? 6 : 0);
    sc.data.resize(sc.n_channels * n_frames);

    for (std::size_t j = 0; j < roi.n_roi; ++j)
        for (std::size_t t = 0; t < n_frames; ++t) sc.data[j * n_frames + t] = roi.at(t, j);

    if (arm.uses_motion()) {
        if (!motion) throw std::invalid_argument("arm '" + arm.name() + "' needs a motion series");
        if (!(motion->clock == roi.clock))
            throw std::runtime_error("scan " + scan_id + ": motion clock does not match ROI clock");
        MotionSeries prepared;
        const MotionSeries* src = motion;
        if (arm.kind == ExperimentArm::Kind::bold_filtered_motion) {
            prepared = filter_motion(*motion, arm.band);
            src = &prepared;
        } else {
            motion->validate();
        }
        const auto channels = motion_to_channels(*src);
        for (std::size_t c = 0; c < 6; ++c)
            std::copy(channels[c].begin(), channels[c].end(),
                      sc.data.begin() + static_cast<std::ptrdiff_t>((roi.n_roi + c) * n_frames));
    }

    sc.stats = zscore_per_channel(sc.data, sc.n_channels, n_frames);
    return sc;
}

void ScanWindows::copy_inputs(std::size_t i, double* dst) const {
    const std::size_t w = spec.window_len_frames;
    const std::size_t n_frames = scan->clock.n_frames;
    const std::size_t start = starts[i];
    for (std::size_t c = 0; c < scan->n_channels; ++c) {
        const double* src = scan->data.data() + c * n_frames + start;
        std::copy(src, src + w, dst + c * w);
    }
}

WindowSample ScanWindows::sample(std::size_t i) const {
    WindowSample s;
    s.scan_id = scan->scan_id;
    s.start_frame = starts[i];
    s.n_channels = scan->n_channels;
    s.window_len = spec.window_len_frames;
    s.inputs.resize(s.n_channels * s.window_len);
    copy_inputs(i, s.inputs.data());
    s.targets = targets[i];
    return s;
}

ScanWindows build_windows(const RoiSeries& roi, const MotionSeries* motion, const RvSeries& rv,
                          const ExperimentArm& arm, const WindowSpec& spec, const std::string& scan_id) {
    spec.validate();
    if (!(rv.clock == roi.clock))
        throw std::runtime_error("scan " + scan_id + ": RV clock does not match ROI clock");
    const std::size_t n = roi.clock.n_frames;
    const std::size_t w = spec.window_len_frames;
    if (n < w)
        throw std::runtime_error("scan " + scan_id + ": " + std::to_string(n) +
                                 " frames is shorter than one " + std::to_string(w) + "-frame window");

    ScanWindows sw;
    sw.scan = std::make_shared<ScanChannels>(assemble_channels(roi, motion, arm, scan_id));
    sw.spec = spec;
    const auto offs = spec.target_offsets();
    for (std::size_t start = 0; start + w <= n; start += spec.stride_frames) {
        std::array<double, 3> tgt;
        for (std::size_t j = 0; j < 3; ++j) {
            const double v = rv.values[start + offs[j]];
            if (!std::isfinite(v) || v < 0.0)
                throw std::runtime_error("scan " + scan_id + ": invalid RV target at frame " +
                                         std::to_string(start + offs[j]));
            tgt[j] = v;
        }
        sw.starts.push_back(start);
        sw.targets.push_back(tgt);
    }
    return sw;
}

ScanSplit split_by_scan(const std::vector<std::string>& scan_ids, double train_fraction,
                        std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("split_by_scan: train_fraction must be in (0, 1)");
    std::set<std::string> unique(scan_ids.begin(), scan_ids.end());
    if (unique.size() < 2) throw std::runtime_error("split_by_scan: need at least 2 scans");

    std::vector<std::string> scans(unique.begin(), unique.end());
    // Hand-rolled Fisher-Yates so the split is identical across standard
    // library implementations.
    std::mt19937_64 rng(seed);
    for (std::size_t i = scans.size() - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % (i + 1));
        std::swap(scans[i], scans[j]);
    }

    std::size_t n_train =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(scans.size()) + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, scans.size() - 1);

    ScanSplit split;
    split.train.assign(scans.begin(), scans.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(scans.begin() + static_cast<std::ptrdiff_t>(n_train), scans.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

}  // namespace rvrecon
