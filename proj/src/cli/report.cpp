#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "qfcsim/commands.hpp"
#include "qfcsim/correlate.hpp"
#include "qfcsim/error.hpp"
#include "qfcsim/fit.hpp"

namespace qfcsim::cli {
namespace {

namespace fs = std::filesystem;

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::map<std::string, std::string> labelled(const std::vector<std::string>& items, const char* flag)
{
    std::map<std::string, std::string> out;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw InvalidArgument(std::string(flag) + " expects label=path, got \"" + item + "\"");
        if (!out.emplace(item.substr(0, eq), item.substr(eq + 1)).second)
            throw InvalidArgument(std::string(flag) + " label \"" + item.substr(0, eq) + "\" given twice");
    }
    return out;
}

}  // namespace

int cmd_report(const ReportArgs& args, std::ostream& out, std::ostream& err)
{
    const auto hists = labelled(args.histograms, "--hist");
    const auto fits = labelled(args.fits, "--fit");
    std::pair<std::string, std::string> vis;
    if (args.visibility) {
        const auto comma = args.visibility->find(',');
        if (comma == std::string::npos) throw InvalidArgument("--visibility expects par_label,perp_label");
        vis = {args.visibility->substr(0, comma), args.visibility->substr(comma + 1)};
    }

    // Every missing input is listed before anything is written.
    std::vector<std::string> missing;
    if (args.manifest && !fs::exists(*args.manifest)) missing.push_back("manifest " + *args.manifest);
    for (const auto& [label, path] : hists)
        if (!fs::exists(path)) missing.push_back("histogram " + label + "=" + path);
    for (const auto& [label, path] : fits)
        if (!fs::exists(path)) missing.push_back("fit " + label + "=" + path);
    if (args.visibility)
        for (const auto& label : {vis.first, vis.second})
            if (!hists.count(label) && !fits.count(label)) missing.push_back("visibility input " + label);
    for (const auto& label : args.asymmetry)
        if (!hists.count(label)) missing.push_back("asymmetry histogram " + label);
    if (!missing.empty()) {
        std::string msg = "missing inputs:";
        for (const auto& m : missing) msg += "\n  " + m;
        throw DataError(msg);
    }

    fs::create_directories(args.output_dir);
    const fs::path dir = args.output_dir;
    std::ostringstream summary;

    if (args.manifest) {
        fs::copy_file(*args.manifest, dir / "manifest.txt", fs::copy_options::overwrite_existing);
        std::ifstream m(*args.manifest);
        std::string line;
        while (std::getline(m, line))
            if (line.rfind("seed=", 0) == 0 || line.rfind("scenario=", 0) == 0) summary << line << '\n';
    }

    if (hists.empty()) err << "warning: no histograms given; the bundle holds only the summary\n";
    summary << "histograms=" << hists.size() << '\n';

    std::map<std::string, CorrelationHistogram> loaded;
    for (const auto& [label, path] : hists) {
        auto h = io::read_histogram_csv(path).histogram;
        std::ofstream panel(dir / (label + ".csv"));
        panel << "delay_ns,g2,sigma\n";
        for (std::size_t i = 0; i < h.size(); ++i) {
            panel << fmt(h.delay(i) * 1e9) << ',' << fmt(h.normalized(i)) << ',';
            if (h.sigma) panel << fmt((*h.sigma)[i]);
            panel << '\n';
        }
        if (h.normalization && h.zero_bin()) {
            const auto z = *h.zero_bin();
            summary << "g2_0." << label << '=' << fmt(h.normalized(z)) << '\n';
            if (h.sigma) summary << "g2_0_sigma." << label << '=' << fmt((*h.sigma)[z]) << '\n';
        }
        loaded.emplace(label, std::move(h));
    }

    std::map<std::string, fit::FitResult> fitted;
    for (const auto& [label, path] : fits) {
        std::ifstream f(path);
        auto r = fit::fit_result_from_text(f);
        summary << "fit." << label << ".model=" << fit::to_string(r.model_id) << '\n';
        for (const auto& [k, v] : r.params) summary << "fit." << label << '.' << k << '=' << fmt(v) << '\n';
        summary << "fit." << label << ".g2_zero=" << fmt(r.g2_zero) << '\n'
                << "fit." << label << ".g2_zero_sigma=" << fmt(r.g2_zero_sigma) << '\n'
                << "fit." << label << ".converged=" << (r.converged ? "true" : "false") << '\n';
        fitted.emplace(label, std::move(r));
    }

    if (args.visibility) {
        auto measured = [&](const std::string& label) {
            if (const auto it = fitted.find(label); it != fitted.end())
                return fit::Measured{it->second.g2_zero, it->second.g2_zero_sigma};
            const auto& h = loaded.at(label);
            const auto z = h.zero_bin();
            if (!h.normalization || !z) throw DataError("histogram " + label + " is not normalized around zero delay");
            return fit::Measured{h.normalized(*z), h.sigma ? (*h.sigma)[*z] : 0.0};
        };
        const auto v = fit::report_visibility(measured(vis.first), measured(vis.second));
        summary << "visibility=" << fmt(v.value) << '\n' << "visibility_sigma=" << fmt(v.sigma) << '\n';
    }

    const double window = parse_quantity(args.asymmetry_window);
    for (const auto& label : args.asymmetry) {
        const auto a = corr::flank_asymmetry(loaded.at(label), window);
        summary << "asymmetry." << label << '=' << fmt(a.relative_difference) << '\n'
                << "asymmetry." << label << ".flag="
                << (a.relative_difference > args.asymmetry_threshold ? "asymmetric" : "symmetric") << '\n';
    }

    std::ofstream(dir / "summary.txt") << summary.str();
    out << summary.str();
    return kExitOk;
}

}  // namespace qfcsim::cli
