#include "qfcsim/commands.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qfcsim/config.hpp"
#include "qfcsim/correlate.hpp"
#include "qfcsim/error.hpp"
#include "qfcsim/fit.hpp"
#include "qfcsim/tag_io.hpp"

namespace qfcsim::cli {
namespace {

std::string fmt(double v, const char* spec = "%.17g")
{
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::pair<std::string, std::string> split_pair(const std::string& text, char sep, const std::string& what)
{
    const auto pos = text.find(sep);
    if (pos == std::string::npos || pos == 0 || pos + 1 == text.size())
        throw InvalidArgument("expected " + what + ", got \"" + text + "\"");
    return {text.substr(0, pos), text.substr(pos + 1)};
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot write " + path.string());
    return f;
}

}  // namespace

double parse_quantity(const std::string& text)
{
    static const std::pair<const char*, double> units[] = {
        {"fs", 1e-15}, {"ps", 1e-12}, {"ns", 1e-9}, {"us", 1e-6}, {"ms", 1e-3}, {"s", 1.0},
    };
    std::string s = text;
    s.erase(std::remove_if(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); }), s.end());
    double scale = 1.0;
    for (const auto& [suffix, factor] : units) {
        const std::string suf = suffix;
        if (s.size() > suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0 &&
            !std::isalpha(static_cast<unsigned char>(s[s.size() - suf.size() - 1]))) {
            s.resize(s.size() - suf.size());
            scale = factor;
            break;
        }
    }
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used == s.size() && std::isfinite(v)) return v * scale;
    } catch (const std::exception&) {
    }
    throw InvalidArgument("cannot parse quantity \"" + text + "\"");
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream&)
{
    const auto cfg = load_config(args.config);
    const std::filesystem::path dir = args.output_dir.value_or(cfg.output_dir);
    std::filesystem::create_directories(dir);

    const auto result = sim::run_experiment(cfg.experiment, cfg.duration, RandomSource(cfg.seed, 0));
    const auto& c = result.counts;

    std::vector<std::string> files;
    for (std::size_t d = 0; d < result.detectors.size(); ++d) {
        const auto path = dir / (cfg.name + ".det" + std::to_string(d) + ".ptt");
        io::write_ptt(path, result.detectors[d]);
        files.push_back(path.filename().string());
    }

    const auto& e = cfg.experiment.emitter;
    const double T = cfg.duration;
    auto rate = [T](std::uint64_t n) { return T > 0.0 ? static_cast<double>(n) / T : 0.0; };
    const auto manifest = dir / (cfg.name + ".manifest");
    auto m = open_out(manifest);
    m << "name=" << cfg.name << '\n'
      << "scenario=" << sim::to_string(cfg.experiment.scenario) << '\n'
      << "seed=" << cfg.seed << '\n'
      << "duration_s=" << fmt(T) << '\n'
      << "resolution_s=" << fmt(cfg.experiment.resolution) << '\n'
      << "detectors=" << result.detectors.size() << '\n';
    for (std::size_t d = 0; d < files.size(); ++d) m << "file." << d << '=' << files[d] << '\n';
    m << "emitted=" << c.emitted << '\n'
      << "emitter_background=" << c.emitter_background << '\n'
      << "rate.signal_expected=" << fmt(e.signal_rate()) << '\n'
      << "rate.background_expected=" << fmt(e.effective_background_rate()) << '\n'
      << "rate.emitted=" << fmt(rate(c.emitted)) << '\n'
      << "rate.emitter_background=" << fmt(rate(c.emitter_background)) << '\n';
    if (cfg.experiment.qfc.enabled)
        m << "qfc.efficiency=" << fmt(models::conversion_efficiency(cfg.experiment.pump_power, cfg.experiment.qfc.stage))
          << '\n';
    for (const auto& p : c.paths) {
        const std::string k = "path." + p.name + ".";
        m << k << "input=" << p.input << '\n'
          << k << "qfc_lost=" << p.qfc_lost << '\n'
          << k << "qfc_background=" << p.qfc_background << '\n'
          << k << "delivered=" << p.delivered << '\n';
    }
    for (std::size_t d = 0; d < c.detectors.size(); ++d) {
        const auto& dc = c.detectors[d];
        const std::string k = "detector." + std::to_string(d) + ".";
        m << k << "input=" << dc.input << '\n'
          << k << "efficiency_dropped=" << dc.efficiency_dropped << '\n'
          << k << "out_of_window=" << dc.out_of_window << '\n'
          << k << "dark_added=" << dc.dark_added << '\n'
          << k << "dead_time_dropped=" << dc.dead_time_dropped << '\n'
          << k << "detected=" << dc.detected << '\n'
          << k << "rate=" << fmt(rate(dc.detected)) << '\n';
    }
    m << "conserved=" << (c.conserved() ? "true" : "false") << '\n';
    m.close();

    out << "wrote " << files.size() << " tag file(s) and " << manifest.string() << '\n';
    return kExitOk;
}

int cmd_correlate(const CorrelateArgs& args, std::ostream& out, std::ostream& err)
{
    corr::CorrelationRequest req;
    req.channel_a = args.channel_a;
    req.channel_b = args.channel_b;
    if (args.mode == "full") req.mode = corr::CorrelationMode::full;
    else if (args.mode == "start-stop" || args.mode == "start_stop") req.mode = corr::CorrelationMode::start_stop;
    else throw InvalidArgument("--mode must be full or start-stop");
    req.bin_width = parse_quantity(args.bin);
    req.max_delay = parse_quantity(args.max_delay);
    req.validate();
    std::optional<double> norm_after, period;
    if (args.normalize_after) norm_after = parse_quantity(*args.normalize_after);
    if (args.rep_period) {
        period = parse_quantity(*args.rep_period);
        require(*period > 0.0, "--rep-period must be positive");
    }
    const double csv_res = parse_quantity(args.csv_resolution);
    require(!args.inputs.empty(), "no input tag files");

    std::optional<TimeTagStream> stream;
    for (const auto& path : args.inputs) {
        auto s = io::read_tags(path, csv_res);
        stream = stream ? merge_streams(*stream, s) : sort_stream(s);
    }
    corr::CorrelateOptions opts;
    opts.threads = std::max(1u, args.threads);
    auto h = corr::correlate(*stream, req, opts);
    if (norm_after) h = corr::normalize_cw(h, *norm_after);

    // Summaries go to stderr when the CSV itself is on stdout.
    std::ostream& summary = args.output == "-" ? err : out;
    if (args.output == "-") io::write_histogram_csv(out, h);
    else io::write_histogram_csv(args.output, h);

    if (period) {
        const auto p = corr::pulsed_g2_zero(h, *period);
        summary << "g2(0) = " << fmt(p.g2_0, "%.4f") << " +/- " << fmt(p.sigma, "%.4f") << " (" << p.side_peaks
                << " side peaks)\n";
    } else if (h.normalization && h.zero_bin()) {
        const auto z = *h.zero_bin();
        summary << "g2(0) = " << fmt(h.normalized(z), "%.4f");
        if (h.sigma) summary << " +/- " << fmt((*h.sigma)[z], "%.4f");
        summary << '\n';
    }
    return kExitOk;
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err)
{
    const auto model = fit::model_id_from_string(args.model);
    const bool hom = model != fit::ModelId::g2_cw;
    if (hom && !args.delta_tau) throw InvalidArgument("model " + args.model + " needs --delta-tau");
    if (!hom && args.delta_tau) throw InvalidArgument("--delta-tau only applies to the g2_hom models");

    auto csv = io::read_histogram_csv(args.input);
    auto& h = csv.histogram;
    if (args.normalize_after) h = corr::normalize_cw(h, parse_quantity(*args.normalize_after));
    if (!h.normalization && !h.sigma)
        throw DataError(args.input + ": histogram is not normalized; pass --normalize-after");
    if (!csv.had_sigma_column)
        err << "warning: " << args.input << " has no sigma column; using sqrt-count weights\n";

    fit::ParamValues init;
    for (const auto& item : args.init) {
        const auto [k, v] = split_pair(item, '=', "name=value");
        init[k] = parse_quantity(v);
    }
    fit::ParamBounds bounds;
    for (const auto& item : args.bounds) {
        const auto [k, range] = split_pair(item, '=', "name=lo:hi");
        const auto [lo, hi] = split_pair(range, ':', "lo:hi");
        bounds[k] = {parse_quantity(lo), parse_quantity(hi)};
    }
    const auto names = fit::model_parameters(model);
    auto known = [&](const std::string& k) {
        if (std::find(names.begin(), names.end(), k) == names.end())
            throw InvalidArgument("model " + args.model + " has no parameter \"" + k + "\"");
    };
    for (const auto& [k, v] : init) known(k);
    for (const auto& [k, v] : bounds) known(k);

    fit::FitOptions opts;
    opts.window = parse_quantity(args.window);
    opts.max_iterations = args.max_iterations;
    if (hom) {
        auto& geo = opts.interferometer;
        geo.delta_tau = parse_quantity(*args.delta_tau);
        geo.r1 = args.r1;
        geo.t1 = 1.0 - args.r1;
        geo.r2 = args.r2;
        geo.t2 = 1.0 - args.r2;
        geo.validate();
    }
    const double fwhm = parse_quantity(args.irf_fwhm);
    const auto irf = fwhm > 0.0 ? models::InstrumentResponse::gaussian(fwhm, h.bin_width)
                                : models::InstrumentResponse::delta(h.bin_width);

    const auto result = fit::fit_g2(h, irf, model, init, bounds, opts);
    const auto text = fit::to_text(result);
    out << text;
    if (args.output) {
        auto f = open_out(*args.output);
        f << text;
    }
    if (!result.converged) {
        err << "error: fit did not converge after " << result.iterations << " iterations (best result printed)\n";
        return kExitNoConvergence;
    }
    return kExitOk;
}

int cmd_qfc(const QfcArgs& args, std::ostream& out, std::ostream&)
{
    require(!args.signal_nm.empty(), "at least one --signal-nm is required");
    require(args.pump_nm.has_value() != args.target_nm.has_value(), "give exactly one of --pump-nm and --target-nm");

    models::ConversionStage stage;
    stage.qpm_fwhm = args.qpm_fwhm_nm * 1e-9;
    stage.qpm_peak_signal = args.qpm_peak_nm * 1e-9;
    stage.eta_max = args.eta_max;
    stage.p_max = args.p_max_w;
    stage.background_rate_coeff = args.background_coeff;
    if (args.pump_nm) stage.lambda_pump = *args.pump_nm * 1e-9;
    stage.validate();

    const double eta = models::conversion_efficiency(args.pump_power_w, stage);
    const double background = stage.background_rate_coeff * args.pump_power_w;
    std::ostringstream report;
    report << "pump_power_w=" << fmt(args.pump_power_w, "%.6g") << '\n'
        << "peak_efficiency=" << fmt(eta, "%.6g") << '\n'
        << "background_rate=" << fmt(background, "%.6g") << '\n';

    for (std::size_t i = 0; i < args.signal_nm.size(); ++i) {
        const double ls = args.signal_nm[i] * 1e-9;
        models::ConversionStage s = stage;
        s.lambda_signal = ls;
        if (args.target_nm) s.lambda_pump = models::solve_pump_for_target(ls, *args.target_nm * 1e-9);
        const double lout = models::output_wavelength(ls, s.lambda_pump);
        const double slope = stage.qpm_temp_slope != 0.0 ? stage.qpm_temp_slope : models::default_qpm_temp_slope(s);
        double response = 1.0;
        double temp = s.qpm_reference_temp_c + (ls - s.qpm_peak_signal) / slope;
        if (args.temp_c) {
            temp = *args.temp_c;
            s.qpm_peak_signal = models::qpm_peak_at_temperature(temp, s);
            response = models::qpm_response(ls, s);
        }
        const double converted = args.signal_rate * eta * response;
        const std::string k = "signal." + std::to_string(i) + ".";
        report << '\n'
            << k << "signal_nm=" << fmt(ls * 1e9, "%.10g") << '\n'
            << k << "pump_nm=" << fmt(s.lambda_pump * 1e9, "%.10g") << '\n'
            << k << "output_nm=" << fmt(lout * 1e9, "%.10g") << '\n'
            << k << "temperature_c=" << fmt(temp, "%.4f") << '\n'
               << k << "temperature_source=" << (args.temp_c ? "given" : "tuned_to_signal") << '\n'
            << k << "qpm_response=" << fmt(response, "%.6g") << '\n'
            << k << "efficiency=" << fmt(eta * response, "%.6g") << '\n'
            << k << "converted_rate=" << fmt(converted, "%.6g") << '\n';
        if (background > 0.0) report << k << "sbr=" << fmt(converted / background, "%.6g") << '\n';
        else report << k << "sbr=inf\n";
    }
    out << report.str();
    return kExitOk;
}

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Quantum-dot photon correlation simulator and analysis tools", "qfcsim"};
    app.require_subcommand(1);

    SimulateArgs sim_args;
    auto* sim_cmd = app.add_subcommand("simulate", "Run a scenario config and write PTT1 files plus a manifest");
    sim_cmd->add_option("config", sim_args.config, "Scenario config file")->required();
    sim_cmd->add_option("--output-dir", sim_args.output_dir, "Overrides the config's output_dir");

    CorrelateArgs cor;
    auto* cor_cmd = app.add_subcommand("correlate", "Build a correlation histogram from tag files");
    cor_cmd->add_option("inputs", cor.inputs, "PTT1 or .csv tag files (merged)")->required();
    cor_cmd->add_option("--mode", cor.mode, "full or start-stop")->capture_default_str();
    cor_cmd->add_option("--bin", cor.bin, "Bin width, e.g. 256ps")->capture_default_str();
    cor_cmd->add_option("--max-delay", cor.max_delay, "Pair acceptance, e.g. 1us")->capture_default_str();
    cor_cmd->add_option("--normalize-after", cor.normalize_after, "Normalize to the plateau beyond this delay");
    cor_cmd->add_option("--rep-period", cor.rep_period, "Pulse period; prints pulsed g2(0)");
    cor_cmd->add_option("--channel-a", cor.channel_a, "Start channel")->capture_default_str();
    cor_cmd->add_option("--channel-b", cor.channel_b, "Stop channel")->capture_default_str();
    cor_cmd->add_option("--csv-resolution", cor.csv_resolution, "Tick size of CSV inputs")->capture_default_str();
    cor_cmd->add_option("--threads", cor.threads, "Worker threads")->capture_default_str();
    cor_cmd->add_option("-o,--output", cor.output, "Histogram CSV path, - for stdout")->capture_default_str();

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a correlation model to a histogram CSV");
    fit_cmd->add_option("input", fa.input, "Histogram CSV")->required();
    fit_cmd->add_option("--model", fa.model, "g2_cw, g2_hom_parallel or g2_hom_orthogonal")->required();
    fit_cmd->add_option("--irf-fwhm", fa.irf_fwhm, "Gaussian IRF FWHM of the delay axis, 0 for none")
        ->capture_default_str();
    fit_cmd->add_option("--init", fa.init, "Initial value, name=value (repeatable)");
    fit_cmd->add_option("--bounds", fa.bounds, "Bounds, name=lo:hi (repeatable)");
    fit_cmd->add_option("--delta-tau", fa.delta_tau, "Interferometer delay (HOM models)");
    fit_cmd->add_option("--r1", fa.r1, "First splitter reflectivity")->capture_default_str();
    fit_cmd->add_option("--r2", fa.r2, "Second splitter reflectivity")->capture_default_str();
    fit_cmd->add_option("--window", fa.window, "Fit |delay| up to this value")->capture_default_str();
    fit_cmd->add_option("--normalize-after", fa.normalize_after, "Normalize a raw histogram first");
    fit_cmd->add_option("--max-iterations", fa.max_iterations)->capture_default_str();
    fit_cmd->add_option("-o,--output", fa.output, "Also write the result to this file");

    QfcArgs qa;
    auto* qfc_cmd = app.add_subcommand("qfc", "Frequency-conversion design calculator");
    qfc_cmd->add_option("--signal-nm", qa.signal_nm, "Signal wavelength (repeatable)")->required();
    auto* pump_opt = qfc_cmd->add_option("--pump-nm", qa.pump_nm, "Pump wavelength");
    auto* target_opt = qfc_cmd->add_option("--target-nm", qa.target_nm, "Target output wavelength");
    pump_opt->excludes(target_opt);
    qfc_cmd->add_option("--pump-power-w", qa.pump_power_w)->capture_default_str();
    qfc_cmd->add_option("--temp-c", qa.temp_c, "Waveguide temperature");
    qfc_cmd->add_option("--signal-rate", qa.signal_rate, "Input photon rate for the SBR estimate")
        ->capture_default_str();
    qfc_cmd->add_option("--qpm-fwhm-nm", qa.qpm_fwhm_nm)->capture_default_str();
    qfc_cmd->add_option("--qpm-peak-nm", qa.qpm_peak_nm, "QPM peak signal at the reference temperature")
        ->capture_default_str();
    qfc_cmd->add_option("--eta-max", qa.eta_max)->capture_default_str();
    qfc_cmd->add_option("--p-max-w", qa.p_max_w)->capture_default_str();
    qfc_cmd->add_option("--background-coeff", qa.background_coeff, "Background counts/s per W")
        ->capture_default_str();

    ReportArgs ra;
    auto* rep_cmd = app.add_subcommand("report", "Collect plot data and a summary from runs and histograms");
    rep_cmd->add_option("--manifest", ra.manifest, "Run manifest from simulate");
    rep_cmd->add_option("--hist", ra.histograms, "label=histogram.csv (repeatable)");
    rep_cmd->add_option("--fit", ra.fits, "label=fit_result.txt (repeatable)");
    rep_cmd->add_option("--visibility", ra.visibility, "par_label,perp_label");
    rep_cmd->add_option("--asymmetry", ra.asymmetry, "Histogram label to test for flank asymmetry (repeatable)");
    rep_cmd->add_option("--asymmetry-window", ra.asymmetry_window)->capture_default_str();
    rep_cmd->add_option("--asymmetry-threshold", ra.asymmetry_threshold)->capture_default_str();
    rep_cmd->add_option("-o,--output-dir", ra.output_dir, "Bundle directory")->required();

    std::vector<std::string> reversed(argv.rbegin(), argv.rend());
    if (!reversed.empty()) reversed.pop_back();
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*sim_cmd) return cmd_simulate(sim_args, out, err);
        if (*cor_cmd) return cmd_correlate(cor, out, err);
        if (*fit_cmd) return cmd_fit(fa, out, err);
        if (*qfc_cmd) return cmd_qfc(qa, out, err);
        if (*rep_cmd) return cmd_report(ra, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        switch (e.kind()) {
        case ErrorKind::invalid_argument: return kExitUsage;
        case ErrorKind::data: return kExitData;
        case ErrorKind::convergence: return kExitNoConvergence;
        }
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitData;
    }
    return kExitUsage;
}

}  // namespace qfcsim::cli
