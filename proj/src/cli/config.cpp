#include "qfcsim/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "qfcsim/error.hpp"

namespace qfcsim::cli {
namespace {

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

class Parser {
public:
    Parser(std::string source) : source_(std::move(source)) {}

    [[noreturn]] void fail(std::size_t line, const std::string& message) const
    {
        throw InvalidArgument(source_ + ":" + std::to_string(line) + ": " + message);
    }

    double number(const std::string& v, std::size_t line) const
    {
        try {
            std::size_t used = 0;
            const double x = std::stod(v, &used);
            if (used == v.size() && std::isfinite(x)) return x;
        } catch (const std::exception&) {
        }
        fail(line, "expected a finite number, got \"" + v + "\"");
    }

    std::uint64_t integer(const std::string& v, std::size_t line) const
    {
        try {
            std::size_t used = 0;
            const auto x = std::stoull(v, &used);
            if (used == v.size() && v.find('-') == std::string::npos) return x;
        } catch (const std::exception&) {
        }
        fail(line, "expected a non-negative integer, got \"" + v + "\"");
    }

    bool boolean(const std::string& v, std::size_t line) const
    {
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail(line, "expected true or false, got \"" + v + "\"");
    }

    const std::string& source() const { return source_; }

private:
    std::string source_;
};

using Setter = std::function<void(const std::string&, std::size_t)>;

}  // namespace

ScenarioConfig parse_config(std::istream& in, const std::string& source_name)
{
    Parser p(source_name);
    ScenarioConfig c;
    auto& x = c.experiment;
    auto& e = x.emitter;
    auto& q = x.qfc;
    auto& h = x.interferometer;
    std::optional<sim::ChargeModel> charge;
    std::map<unsigned, sim::DetectorSpec> detectors;
    std::map<std::string, std::size_t> section_lines;

    auto num = [&](double& field) { return Setter([&p, &field](const std::string& v, std::size_t l) { field = p.number(v, l); }); };
    std::map<std::string, std::map<std::string, Setter>> table;
    table["scenario"] = {
        {"id", [&](const std::string& v, std::size_t l) {
             try {
                 x.scenario = sim::scenario_from_string(v);
             } catch (const Error& err) {
                 p.fail(l, err.what());
             }
         }},
        {"name", [&](const std::string& v, std::size_t) { c.name = v; }},
        {"duration", num(c.duration)},
        {"seed", [&](const std::string& v, std::size_t l) { c.seed = p.integer(v, l); }},
        {"resolution", num(x.resolution)},
        {"output_dir", [&](const std::string& v, std::size_t) { c.output_dir = v; }},
    };
    table["emitter"] = {
        {"lifetime", num(e.lifetime)},
        {"tau_c", num(e.tau_c)},
        {"pump_rate", num(e.pump_rate)},
        {"mode", [&](const std::string& v, std::size_t l) {
             if (v == "cw") e.mode = sim::Excitation::cw;
             else if (v == "pulsed") e.mode = sim::Excitation::pulsed;
             else p.fail(l, "mode must be cw or pulsed");
         }},
        {"rep_rate", num(e.pulsed.rep_rate)},
        {"pulse_width", num(e.pulsed.pulse_width)},
        {"excitation_probability", num(e.pulsed.excitation_probability)},
        {"source", [&](const std::string& v, std::size_t l) {
             if (v == "quantum_dot") e.source = sim::SourceKind::quantum_dot;
             else if (v == "coherent") e.source = sim::SourceKind::coherent;
             else p.fail(l, "source must be quantum_dot or coherent");
         }},
        {"mean_photons_per_pulse", num(e.mean_photons_per_pulse)},
        {"alpha", num(e.alpha)},
        {"background_rate", [&](const std::string& v, std::size_t l) { e.background_rate = p.number(v, l); }},
    };
    auto charge_num = [&](double sim::ChargeModel::*field) {
        return Setter([&, field](const std::string& v, std::size_t l) {
            if (!charge) charge.emplace();
            (*charge).*field = p.number(v, l);
        });
    };
    table["charge_model"] = {
        {"rate_single_capture", charge_num(&sim::ChargeModel::rate_single_capture)},
        {"rate_multi_capture", charge_num(&sim::ChargeModel::rate_multi_capture)},
        {"branching", charge_num(&sim::ChargeModel::branching)},
    };
    table["qfc"] = {
        {"enabled", [&](const std::string& v, std::size_t l) { q.enabled = p.boolean(v, l); }},
        {"lambda_signal", num(q.stage.lambda_signal)},
        {"lambda_pump", num(q.stage.lambda_pump)},
        {"qpm_peak_signal", num(q.stage.qpm_peak_signal)},
        {"qpm_fwhm", num(q.stage.qpm_fwhm)},
        {"eta_max", num(q.stage.eta_max)},
        {"p_max", num(q.stage.p_max)},
        {"background_rate_coeff", num(q.stage.background_rate_coeff)},
        {"qpm_reference_temp_c", num(q.stage.qpm_reference_temp_c)},
        {"qpm_temp_slope", num(q.stage.qpm_temp_slope)},
        {"pump_power", num(x.pump_power)},
    };
    table["interferometer"] = {
        {"r1", [&](const std::string& v, std::size_t l) { h.r1 = p.number(v, l); h.t1 = 1.0 - h.r1; }},
        {"r2", [&](const std::string& v, std::size_t l) { h.r2 = p.number(v, l); h.t2 = 1.0 - h.r2; }},
        {"delta_tau", num(h.delta_tau)},
        {"v", num(h.v)},
        {"config", [&](const std::string& v, std::size_t l) {
             if (v == "parallel") h.config = models::Polarization::parallel;
             else if (v == "orthogonal") h.config = models::Polarization::orthogonal;
             else p.fail(l, "config must be parallel or orthogonal");
         }},
    };
    table["splitter"] = {{"transmission", num(x.splitter_transmission)}};

    std::string section;
    sim::DetectorSpec* detector = nullptr;
    std::set<std::string> seen_keys;
    std::string line;
    for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
        if (const auto hash = line.find_first_of("#;"); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') p.fail(lineno, "unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            if (section_lines.count(section)) p.fail(lineno, "duplicate section [" + section + "]");
            section_lines[section] = lineno;
            detector = nullptr;
            if (section.rfind("detector.", 0) == 0) {
                const std::string idx = section.substr(9);
                const auto d = p.integer(idx, lineno);
                if (d > 255) p.fail(lineno, "detector index must be below 256");
                detector = &detectors[static_cast<unsigned>(d)];
            } else if (!table.count(section)) {
                p.fail(lineno, "unknown section [" + section + "]");
            }
            if (section == "charge_model" && !charge) charge.emplace();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) p.fail(lineno, "expected key = value");
        if (section.empty()) p.fail(lineno, "key outside of any section");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (!seen_keys.insert(section + "." + key).second)
            p.fail(lineno, "duplicate key \"" + key + "\" in [" + section + "]");
        if (detector) {
            if (key == "efficiency") detector->efficiency = p.number(value, lineno);
            else if (key == "jitter_fwhm") detector->jitter_fwhm = p.number(value, lineno);
            else if (key == "dark_rate") detector->dark_rate = p.number(value, lineno);
            else if (key == "dead_time") detector->dead_time = p.number(value, lineno);
            else p.fail(lineno, "unknown key \"" + key + "\" in [" + section + "]");
            continue;
        }
        const auto& keys = table[section];
        const auto it = keys.find(key);
        if (it == keys.end()) p.fail(lineno, "unknown key \"" + key + "\" in [" + section + "]");
        it->second(value, lineno);
    }

    e.charge_model = charge;
    unsigned expected = 0;
    for (const auto& [index, spec] : detectors) {
        if (index != expected)
            p.fail(section_lines["detector." + std::to_string(index)], "detector sections must be numbered 0, 1, ...");
        x.detectors.push_back(spec);
        ++expected;
    }

    // Semantic checks, anchored at the header of the offending section.
    auto anchored = [&](const std::string& sec, const std::function<void()>& check) {
        try {
            check();
        } catch (const Error& err) {
            const auto it = section_lines.find(sec);
            p.fail(it != section_lines.end() ? it->second : 0, "[" + sec + "] " + err.what());
        }
    };
    if (!section_lines.count("scenario")) p.fail(0, "missing [scenario] section");
    anchored("scenario", [&] {
        require(c.duration >= 0.0, "duration must be non-negative");
        require(x.resolution > 0.0, "resolution must be positive");
    });
    anchored("emitter", [&] { e.validate(); });
    if (q.enabled) anchored("qfc", [&] { q.validate(); });
    anchored("interferometer", [&] {
        if (x.scenario == sim::Scenario::hom_single || x.scenario == sim::Scenario::two_state_hom) h.validate();
    });
    anchored("scenario", [&] { x.validate(); });
    return c;
}

ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw InvalidArgument("cannot open config " + path);
    return parse_config(in, path);
}

std::string serialize_config(const ScenarioConfig& c)
{
    const auto& x = c.experiment;
    const auto& e = x.emitter;
    std::ostringstream out;
    out << "[scenario]\n"
        << "id = " << sim::to_string(x.scenario) << '\n'
        << "name = " << c.name << '\n'
        << "duration = " << fmt(c.duration) << '\n'
        << "seed = " << c.seed << '\n'
        << "resolution = " << fmt(x.resolution) << '\n'
        << "output_dir = " << c.output_dir << "\n\n";
    out << "[emitter]\n"
        << "lifetime = " << fmt(e.lifetime) << '\n'
        << "tau_c = " << fmt(e.tau_c) << '\n'
        << "pump_rate = " << fmt(e.pump_rate) << '\n'
        << "mode = " << (e.mode == sim::Excitation::cw ? "cw" : "pulsed") << '\n'
        << "rep_rate = " << fmt(e.pulsed.rep_rate) << '\n'
        << "pulse_width = " << fmt(e.pulsed.pulse_width) << '\n'
        << "excitation_probability = " << fmt(e.pulsed.excitation_probability) << '\n'
        << "source = " << (e.source == sim::SourceKind::quantum_dot ? "quantum_dot" : "coherent") << '\n'
        << "mean_photons_per_pulse = " << fmt(e.mean_photons_per_pulse) << '\n'
        << "alpha = " << fmt(e.alpha) << '\n';
    if (e.background_rate) out << "background_rate = " << fmt(*e.background_rate) << '\n';
    out << '\n';
    if (e.charge_model)
        out << "[charge_model]\n"
            << "rate_single_capture = " << fmt(e.charge_model->rate_single_capture) << '\n'
            << "rate_multi_capture = " << fmt(e.charge_model->rate_multi_capture) << '\n'
            << "branching = " << fmt(e.charge_model->branching) << "\n\n";
    const auto& s = x.qfc.stage;
    out << "[qfc]\n"
        << "enabled = " << (x.qfc.enabled ? "true" : "false") << '\n'
        << "lambda_signal = " << fmt(s.lambda_signal) << '\n'
        << "lambda_pump = " << fmt(s.lambda_pump) << '\n'
        << "qpm_peak_signal = " << fmt(s.qpm_peak_signal) << '\n'
        << "qpm_fwhm = " << fmt(s.qpm_fwhm) << '\n'
        << "eta_max = " << fmt(s.eta_max) << '\n'
        << "p_max = " << fmt(s.p_max) << '\n'
        << "background_rate_coeff = " << fmt(s.background_rate_coeff) << '\n'
        << "qpm_reference_temp_c = " << fmt(s.qpm_reference_temp_c) << '\n'
        << "qpm_temp_slope = " << fmt(s.qpm_temp_slope) << '\n'
        << "pump_power = " << fmt(x.pump_power) << "\n\n";
    const auto& h = x.interferometer;
    out << "[interferometer]\n"
        << "r1 = " << fmt(h.r1) << '\n'
        << "r2 = " << fmt(h.r2) << '\n'
        << "delta_tau = " << fmt(h.delta_tau) << '\n'
        << "v = " << fmt(h.v) << '\n'
        << "config = " << (h.config == models::Polarization::parallel ? "parallel" : "orthogonal") << "\n\n";
    out << "[splitter]\n"
        << "transmission = " << fmt(x.splitter_transmission) << "\n\n";
    for (std::size_t i = 0; i < x.detectors.size(); ++i) {
        const auto& d = x.detectors[i];
        out << "[detector." << i << "]\n"
            << "efficiency = " << fmt(d.efficiency) << '\n'
            << "jitter_fwhm = " << fmt(d.jitter_fwhm) << '\n'
            << "dark_rate = " << fmt(d.dark_rate) << '\n'
            << "dead_time = " << fmt(d.dead_time) << "\n\n";
    }
    return out.str();
}

}  // namespace qfcsim::cli
