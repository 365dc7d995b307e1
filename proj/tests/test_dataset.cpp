#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include "rvrecon/dataset.hpp"

using namespace rvrecon;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    static const fs::path dir = [] {
        auto p = fs::temp_directory_path() / "rvrecon_dataset_tests";
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string write_file(const std::string& name, const std::string& content) {
    const auto path = temp_dir() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

RoiSeries make_roi(std::size_t n_frames, std::size_t n_roi, unsigned seed = 1) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    RoiSeries roi;
    roi.clock = {0.72, n_frames, 0.0};
    roi.n_roi = n_roi;
    roi.data.resize(n_frames * n_roi);
    for (auto& v : roi.data) v = unif(rng);
    return roi;
}

MotionSeries make_motion(std::size_t n_frames, unsigned seed = 2) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    MotionSeries m;
    m.clock = {0.72, n_frames, 0.0};
    m.rows.resize(n_frames);
    for (auto& row : m.rows)
        for (auto& v : row) v = unif(rng);
    return m;
}

RvSeries make_rv(std::size_t n_frames, unsigned seed = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.1, 2.0);
    RvSeries rv;
    rv.clock = {0.72, n_frames, 0.0};
    rv.values.resize(n_frames);
    for (auto& v : rv.values) v = unif(rng);
    return rv;
}

}  // namespace

TEST_CASE("read_physio: column projection and errors") {
    const auto path = write_file("physio_small.txt", "0 10 5\n0 11 5\n1 12 5\n");
    const RespiratoryTrace tr = read_physio(path, 1, 400.0);
    REQUIRE(tr.samples.size() == 3);
    CHECK(tr.samples[0] == 10.0);
    CHECK(tr.samples[1] == 11.0);
    CHECK(tr.samples[2] == 12.0);
    CHECK(tr.sample_rate_hz == 400.0);

    CHECK_THROWS_WITH_AS(read_physio(path, 7, 400.0), doctest::Contains("column 7"), std::runtime_error);
    CHECK_THROWS_AS(read_physio(write_file("physio_empty.txt", ""), 1, 400.0), std::runtime_error);
    CHECK_THROWS_WITH_AS(read_physio(write_file("physio_nan.txt", "0 nan 0\n"), 1, 400.0),
                         doctest::Contains("non-finite"), std::runtime_error);
}

TEST_CASE("physio round-trips through write/read") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    RespiratoryTrace tr;
    tr.samples.resize(500);
    for (auto& s : tr.samples) s = unif(rng);
    const auto path = (temp_dir() / "physio_rt.txt").string();
    write_physio(path, tr);
    const RespiratoryTrace back = read_physio(path, 1, tr.sample_rate_hz);
    REQUIRE(back.samples.size() == tr.samples.size());
    for (std::size_t i = 0; i < tr.samples.size(); ++i) CHECK(back.samples[i] == tr.samples[i]);
}

TEST_CASE("read_motion_par: field order, ragged lines, length check") {
    const auto path = write_file("motion_ok.par", "0.001 -0.002 0.0 0.5 0.1 -0.3\n0 0 0 0 0 0\n");
    const MotionSeries m = read_motion_par(path, FrameClock{0.72, 2, 0.0});
    CHECK(m.rows[0][0] == 0.001);
    CHECK(m.rows[0][1] == -0.002);
    CHECK(m.rows[0][2] == 0.0);
    CHECK(m.rows[0][3] == 0.5);
    CHECK(m.rows[0][4] == 0.1);
    CHECK(m.rows[0][5] == -0.3);

    const auto bad = write_file("motion_bad.par", "0 0 0 0 0 0\n1 2 3 4 5\n");
    CHECK_THROWS_WITH_AS(read_motion_par(bad, FrameClock{0.72, 2, 0.0}), doctest::Contains(":2"),
                         std::runtime_error);

    CHECK_THROWS_AS(read_motion_par(path, FrameClock{0.72, 3, 0.0}), std::runtime_error);
}

TEST_CASE("motion .par write/read round-trip is exact") {
    const MotionSeries m = make_motion(97);
    const auto path = (temp_dir() / "motion_rt.par").string();
    write_motion_par(path, m);
    const MotionSeries back = read_motion_par(path, m.clock);
    for (std::size_t k = 0; k < m.rows.size(); ++k)
        for (std::size_t c = 0; c < 6; ++c) CHECK(back.rows[k][c] == m.rows[k][c]);
}

TEST_CASE("read_roi_table: shapes, headers, ragged rows") {
    const RoiSeries a = read_roi_table(write_file("roi_a.csv", "1,2,3\n4,5,6\n"), FrameClock{0.72, 2, 0.0});
    CHECK(a.n_roi == 3);
    CHECK(a.at(1, 2) == 6.0);

    const RoiSeries b =
        read_roi_table(write_file("roi_b.csv", "r1,r2,r3\n1,2,3\n4,5,6\n"), FrameClock{0.72, 2, 0.0});
    CHECK(b.n_roi == 3);
    CHECK(b.at(0, 0) == 1.0);

    const RoiSeries c =
        read_roi_table(write_file("roi_c.tsv", "1\t2\t3\n4\t5\t6\n"), FrameClock{0.72, 2, 0.0});
    CHECK(c.n_roi == 3);

    CHECK_THROWS_WITH_AS(
        read_roi_table(write_file("roi_ragged.csv", "1,2,3\n4,5\n"), FrameClock{0.72, 2, 0.0}),
        doctest::Contains("ragged"), std::runtime_error);
}

TEST_CASE("rv csv round-trip") {
    const RvSeries rv = make_rv(40);
    const auto path = (temp_dir() / "rv_rt.csv").string();
    write_rv_csv(path, rv);
    const RvSeries back = read_rv_csv(path);
    REQUIRE(back.values.size() == 40);
    CHECK(back.clock.tr_s == doctest::Approx(0.72).epsilon(1e-12));
    for (std::size_t k = 0; k < 40; ++k) CHECK(back.values[k] == rv.values[k]);
}

TEST_CASE("zscore_per_channel: normalization, degenerate channels, idempotence") {
    std::vector<double> block = {1.0, 2.0, 3.0};
    const ChannelStats st = zscore_per_channel(block, 1, 3);
    CHECK(block[0] == doctest::Approx(-1.2247).epsilon(1e-4));
    CHECK(block[1] == doctest::Approx(0.0));
    CHECK(block[2] == doctest::Approx(1.2247).epsilon(1e-4));
    CHECK(st.mean[0] == doctest::Approx(2.0));
    CHECK(st.stddev[0] == doctest::Approx(std::sqrt(2.0 / 3.0)));

    std::vector<double> constant(10, 4.2);
    zscore_per_channel(constant, 1, 10);
    for (double v : constant) {
        CHECK(v == 0.0);
        CHECK(std::isfinite(v));
    }

    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    std::vector<double> once(200);
    for (auto& v : once) v = unif(rng);
    zscore_per_channel(once, 4, 50);
    std::vector<double> twice = once;
    zscore_per_channel(twice, 4, 50);
    for (std::size_t i = 0; i < once.size(); ++i) CHECK(std::abs(twice[i] - once[i]) < 1e-12);
}

TEST_CASE("build_windows: counts and channel assembly per arm") {
    SUBCASE("single window when scan length equals window length") {
        const auto roi = make_roi(65, 4);
        const auto rv = make_rv(65);
        const ScanWindows sw = build_windows(roi, nullptr, rv, ExperimentArm{}, WindowSpec{}, "s0");
        CHECK(sw.size() == 1);
        CHECK(sw.starts[0] == 0);
    }
    SUBCASE("stride 64 over 193 frames") {
        const auto roi = make_roi(193, 4);
        const auto rv = make_rv(193);
        WindowSpec spec;
        spec.stride_frames = 64;
        const ScanWindows sw = build_windows(roi, nullptr, rv, ExperimentArm{}, spec, "s0");
        REQUIRE(sw.size() == 3);
        CHECK(sw.starts[0] == 0);
        CHECK(sw.starts[1] == 64);
        CHECK(sw.starts[2] == 128);
    }
    SUBCASE("90 ROIs plus raw motion gives 96 channels") {
        const auto roi = make_roi(80, 90);
        const auto motion = make_motion(80);
        const auto rv = make_rv(80);
        const ScanWindows sw = build_windows(roi, &motion, rv,
                                             ExperimentArm::parse("bold+motion"), WindowSpec{}, "s0");
        CHECK(sw.n_channels() == 96);
        CHECK(build_windows(roi, nullptr, rv, ExperimentArm::parse("bold"), WindowSpec{}, "s0")
                  .n_channels() == 90);
    }
    SUBCASE("scan shorter than one window is an error") {
        const auto roi = make_roi(64, 4);
        const auto rv = make_rv(64);
        CHECK_THROWS_AS(build_windows(roi, nullptr, rv, ExperimentArm{}, WindowSpec{}, "s0"),
                        std::runtime_error);
    }
}

TEST_CASE("build_windows: windows are verbatim slices of the scan block") {
    const auto roi = make_roi(100, 5);
    const auto rv = make_rv(100);
    WindowSpec spec;
    spec.stride_frames = 7;
    const ScanWindows sw = build_windows(roi, nullptr, rv, ExperimentArm{}, spec, "s0");
    for (std::size_t i = 0; i < sw.size(); ++i) {
        const WindowSample s = sw.sample(i);
        for (std::size_t c = 0; c < s.n_channels; ++c)
            for (std::size_t t = 0; t < s.window_len; ++t)
                CHECK(s.inputs[c * s.window_len + t] == sw.scan->at(c, s.start_frame + t));
    }
}

TEST_CASE("build_windows: each interior frame is a target exactly 3 times at stride 1") {
    const std::size_t n = 200;
    const auto roi = make_roi(n, 3);
    const auto rv = make_rv(n);
    const ScanWindows sw = build_windows(roi, nullptr, rv, ExperimentArm{}, WindowSpec{}, "s0");
    std::vector<int> hits(n, 0);
    const auto offs = sw.spec.target_offsets();
    for (std::size_t i = 0; i < sw.size(); ++i)
        for (std::size_t j = 0; j < 3; ++j) ++hits[sw.starts[i] + offs[j]];
    for (std::size_t k = 64; k + 65 <= n; ++k) CHECK(hits[k] == 3);
}

TEST_CASE("build_windows: motion channels sit after the ROI channels") {
    // A single dominant motion channel must land at index n_roi + c.
    RoiSeries roi = make_roi(70, 3);
    MotionSeries motion;
    motion.clock = roi.clock;
    motion.rows.assign(70, {0, 0, 0, 0, 0, 0});
    for (std::size_t k = 0; k < 70; ++k) motion.rows[k][4] = static_cast<double>(k);  // trans_y ramp
    const auto rv = make_rv(70);
    const ScanWindows sw =
        build_windows(roi, &motion, rv, ExperimentArm::parse("bold+motion"), WindowSpec{}, "s0");
    REQUIRE(sw.n_channels() == 9);
    // channel 3+4 = 7 carries the ramp (z-scored, so strictly increasing)
    for (std::size_t t = 1; t < 70; ++t) CHECK(sw.scan->at(7, t) > sw.scan->at(7, t - 1));
    // the other motion channels were constant zero -> degenerate, all zeros
    for (std::size_t t = 0; t < 70; ++t) {
        CHECK(sw.scan->at(3, t) == 0.0);
        CHECK(sw.scan->at(8, t) == 0.0);
    }
}

TEST_CASE("split_by_scan: fraction, determinism, disjointness") {
    std::vector<std::string> ids;
    for (int i = 0; i < 10; ++i) ids.push_back("scan" + std::to_string(i));

    const ScanSplit s = split_by_scan(ids, 0.8, 42);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);

    const ScanSplit again = split_by_scan(ids, 0.8, 42);
    CHECK(s.train == again.train);
    CHECK(s.test == again.test);

    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const ScanSplit sp = split_by_scan(ids, 0.7, seed);
        std::set<std::string> train(sp.train.begin(), sp.train.end());
        for (const auto& t : sp.test) CHECK(train.count(t) == 0);
        CHECK(sp.train.size() + sp.test.size() == 10);
    }

    CHECK_THROWS_AS(split_by_scan({"only"}, 0.8, 1), std::runtime_error);
    CHECK_THROWS_AS(split_by_scan(ids, 1.0, 1), std::invalid_argument);
}
