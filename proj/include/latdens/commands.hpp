#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace latdens::cli {

// Exit codes shared by all commands.
inline constexpr int exit_ok = 0;
inline constexpr int exit_numerical = 1;  // includes non-converged fits
inline constexpr int exit_usage = 2;

struct FitOptions {
    std::string input;
    std::string output_dir = ".";
    double lower = 0.0;
    double upper = 1.0;
    int cells = 200;
    double bandwidth = 1.5;
    double lambda = 1.0;
    int r0 = 50;
    double var_explained = 0.9999;
    double epsilon = 1e-3;
    int max_iter = 200;
    std::uint64_t seed = 1u;
};

struct TwoStepOptions {
    std::string input;
    std::string output_dir = ".";
    double lower = 0.0;
    double upper = 1.0;
    int cells = 200;
    double bandwidth = 2.0;
};

struct SimulateOptions {
    std::string output_dir = ".";
    int replicates = 100;
    std::vector<int> m_list{20, 40, 80, 160};
    std::vector<double> bandwidths;  // aligned with m_list; defaults mapped
    int groups = 30;
    int cells = 200;
    double lambda = 1.0;
    int r0 = 10;
    double var_explained = 0.99999;
    double epsilon = 1e-3;
    int max_iter = 200;
    std::uint64_t seed = 1u;
};

struct CompositionalOptions {
    std::string input;
    std::string output_dir = ".";
    double lambda = 1.0;
    int r0 = 10;
    double var_explained = 0.99999;
    double epsilon = 1e-3;
    int max_iter = 200;
    std::uint64_t seed = 1u;
};

// Each command validates its inputs, delegates all numerics to the
// library, writes the documented output files, and returns an exit code.
int run_fit(const FitOptions& opt);
int run_twostep(const TwoStepOptions& opt);
int run_simulate(const SimulateOptions& opt);
int run_compositional(const CompositionalOptions& opt);

}  // namespace latdens::cli
