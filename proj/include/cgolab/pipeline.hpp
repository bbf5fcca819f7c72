#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cgolab/config.hpp"

namespace cgolab {

struct Assertion {
    std::string name;
    double value = 0.0;
    double threshold = 0.0;
    std::string relation;  // "<=", ">=", "=="
    bool passed = false;
    std::string table;     // CSV the value is read from
};

struct Scalar {
    std::string name;
    double value = 0.0;
    std::string table;
};

struct RunReport {
    std::string command;
    std::string config_hash;
    std::string out_dir;
    std::vector<std::string> tables;
    std::vector<std::string> dumps;
    std::vector<Scalar> scalars;
    std::vector<Assertion> assertions;
    std::vector<std::string> warnings;
    std::vector<std::string> errors;
    std::size_t jobs_scheduled = 0;
    std::size_t jobs_completed = 0;
    double wall_seconds = 0.0;

    bool ok() const;
    void check(const std::string& name, double value, const std::string& relation, double threshold,
               const std::string& table);
    void scalar(const std::string& name, double value, const std::string& table);
    const Assertion* find(const std::string& name) const;
    double value(const std::string& name) const;  // scalar or assertion value; NaN when missing
};

struct RunOptions {
    std::string out_dir = "out";
    int workers = 1;
    bool verbose = false;
};

RunReport run_estimates(const ExperimentConfig& cfg, const RunOptions& opt);    // E1
RunReport run_identity(const ExperimentConfig& cfg, const RunOptions& opt);     // E2
RunReport run_reconstruct(const ExperimentConfig& cfg, const RunOptions& opt);  // E3
RunReport run_localize(const ExperimentConfig& cfg, const RunOptions& opt);     // E4
RunReport run_transform(const ExperimentConfig& cfg, const RunOptions& opt);

/// Keeps large field buffers in the heap between jobs (glibc only; no-op elsewhere).
void retain_large_allocations();

/// Writes manifest.json into the report's output directory.
void write_manifest(const RunReport& rep, const ExperimentConfig& cfg, const RunOptions& opt);

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;
    double stderr_slope = 0.0;
    double ci_low = 0.0;  // 95% confidence interval
    double ci_high = 0.0;
};

/// Least-squares fit of log y against log x.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

/// Runs fn(i) for i in [0, n) on a bounded pool. Results keep index order; a throwing job leaves
/// its slot empty and records "job i: message" in `errors` (sorted by index).
template <class R>
std::vector<std::optional<R>> parallel_map(std::size_t n, int workers, const std::function<R(std::size_t)>& fn,
                                           std::vector<std::string>& errors) {
    std::vector<std::optional<R>> out(n);
    std::vector<std::string> err(n);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                out[i].emplace(fn(i));
            } catch (const std::exception& e) {
                err[i] = e.what();
            }
        }
    };
    const int w = std::max(1, std::min<int>(workers, static_cast<int>(n)));
    std::vector<std::thread> pool;
    for (int t = 1; t < w; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (std::size_t i = 0; i < n; ++i)
        if (!out[i]) errors.push_back("job " + std::to_string(i) + ": " + err[i]);
    return out;
}

}  // namespace cgolab
