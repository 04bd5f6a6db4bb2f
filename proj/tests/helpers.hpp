#pragma once

// Shared test utilities: scratch directories, deterministic random data,
// finite-difference gradient checks.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "plenopose/lightfield.hpp"
#include "plenopose/rng.hpp"

namespace testutil {

// Unique scratch directory removed on destruction.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("plenopose_test_" + tag + "_" +
                 std::to_string(counter.fetch_add(1)) + "_" +
                 std::to_string(::getpid()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Light field with iid uniform [0, 1] samples.
inline plenopose::LightField4D random_lightfield(int sh, int sw, int ah,
                                                 int aw, std::uint64_t seed) {
    plenopose::LightField4D lf(sh, sw, ah, aw);
    std::mt19937_64 rng(plenopose::derive_seed(seed, "test-lf"));
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double& v : lf.data) v = uni(rng);
    return lf;
}

// Largest relative deviation between two gradient vectors, with each
// coordinate compared against max(|a|, |b|, floor) so tiny entries do not
// blow up the ratio.
inline double max_rel_error(const std::vector<double>& a,
                            const std::vector<double>& b,
                            double floor = 1e-6) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double denom =
            std::max({std::abs(a[i]), std::abs(b[i]), floor});
        worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
    }
    return worst;
}

}  // namespace testutil
