#pragma once

#include "fluxbench/dataset.hpp"
#include "fluxbench/scenarios.hpp"

#include <atomic>
#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

namespace testutil {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("fluxbench-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline fluxbench::HourlyRecord record(int year, unsigned month, unsigned day, unsigned hour, double ta = 10.0,
                                      bool qc = true, double target = 1.0) {
    fluxbench::HourlyRecord r;
    r.time = fluxbench::HourTimestamp::from_civil(year, month, day, hour);
    r.features.continuous.fill(1.0);
    r.features.continuous[fluxbench::kTaIndex] = ta;
    r.targets = {target, target, target};
    r.qc = qc;
    return r;
}

inline fluxbench::SiteData site(const std::string& name, std::vector<fluxbench::HourlyRecord> records,
                                fluxbench::Pft pft = fluxbench::Pft::GRA) {
    return {{fluxbench::SiteId(name), 45.0, 7.0, pft}, std::move(records)};
}

/// One valid noon record per listed year.
inline fluxbench::SiteData site_with_years(const std::string& name, const std::vector<int>& years,
                                           double ta = 10.0) {
    std::vector<fluxbench::HourlyRecord> records;
    for (int y : years) records.push_back(record(y, 6, 1, 12, ta));
    return site(name, std::move(records));
}

inline std::vector<fluxbench::SiteData> many_sites(std::size_t n) {
    std::vector<fluxbench::SiteData> out;
    for (std::size_t i = 0; i < n; ++i) {
        out.push_back(site_with_years("S" + std::to_string(1000 + i), {2016, 2018}, static_cast<double>(i)));
    }
    return out;
}

inline std::vector<std::string> names(const std::vector<fluxbench::DomainKey>& keys) {
    std::vector<std::string> out;
    for (const auto& k : keys) out.push_back(k.to_string());
    return out;
}

}  // namespace testutil
