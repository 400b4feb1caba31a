#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qfcsim::cli {

// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNoConvergence = 4;

/// Parses a time or plain quantity: "256ps", "1.5 ns", "500e-9". A bare
/// number is taken in SI units (seconds for times).
double parse_quantity(const std::string& text);

struct SimulateArgs {
    std::string config;
    std::optional<std::string> output_dir;  // overrides the config's output_dir
};

struct CorrelateArgs {
    std::vector<std::string> inputs;
    std::string mode = "full";
    std::string bin = "256ps";
    std::string max_delay = "1us";
    std::optional<std::string> normalize_after;
    std::optional<std::string> rep_period;
    unsigned channel_a = 0, channel_b = 1;
    std::string csv_resolution = "4ps";
    unsigned threads = 1;
    std::string output = "-";
};

struct FitArgs {
    std::string input;
    std::string model;
    std::string irf_fwhm = "0";
    std::vector<std::string> init;    // name=value
    std::vector<std::string> bounds;  // name=lo:hi
    std::optional<std::string> delta_tau;
    double r1 = 0.5, r2 = 0.5;
    std::string window = "50ns";
    std::optional<std::string> normalize_after;
    int max_iterations = 200;
    std::optional<std::string> output;
};

struct QfcArgs {
    std::vector<double> signal_nm;
    std::optional<double> pump_nm;
    std::optional<double> target_nm;
    double pump_power_w = 0.8;
    std::optional<double> temp_c;
    double signal_rate = 1e6;  // photons/s entering the converter
    double qpm_fwhm_nm = 0.20;
    double qpm_peak_nm = 983.8;
    double eta_max = 0.40;
    double p_max_w = 1.0;
    double background_coeff = 300.0;
};

struct ReportArgs {
    std::optional<std::string> manifest;
    std::vector<std::string> histograms;  // label=path
    std::vector<std::string> fits;        // label=path
    std::optional<std::string> visibility;  // par_label,perp_label
    std::vector<std::string> asymmetry;     // labels
    std::string asymmetry_window = "5ns";
    double asymmetry_threshold = 0.10;
    std::string output_dir;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_correlate(const CorrelateArgs& args, std::ostream& out, std::ostream& err);
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);
int cmd_qfc(const QfcArgs& args, std::ostream& out, std::ostream& err);
int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err);

/// Full command line (args[0] is the program name). Library errors are
/// reported on `err` and mapped to the exit codes above.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qfcsim::cli
