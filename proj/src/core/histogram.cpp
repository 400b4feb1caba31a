#include "qfcsim/histogram.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "qfcsim/error.hpp"

namespace qfcsim {

std::string to_string(HistogramMode mode)
{
    switch (mode) {
    case HistogramMode::start_stop: return "start_stop";
    case HistogramMode::full_autocorrelation: return "full_autocorrelation";
    case HistogramMode::cross_correlation: return "cross_correlation";
    }
    return "unknown";
}

HistogramMode histogram_mode_from_string(const std::string& text)
{
    if (text == "start_stop") return HistogramMode::start_stop;
    if (text == "full_autocorrelation") return HistogramMode::full_autocorrelation;
    if (text == "cross_correlation") return HistogramMode::cross_correlation;
    throw InvalidArgument("unknown histogram mode \"" + text + "\"");
}

std::optional<std::size_t> CorrelationHistogram::zero_bin() const noexcept
{
    if (first_index > 0 || first_index + static_cast<std::int64_t>(counts.size()) <= 0) return std::nullopt;
    return static_cast<std::size_t>(-first_index);
}

double CorrelationHistogram::total() const noexcept
{
    return std::accumulate(counts.begin(), counts.end(), 0.0);
}

CorrelationHistogram merge_histograms(const CorrelationHistogram& a, const CorrelationHistogram& b)
{
    require(a.bin_width == b.bin_width && a.first_index == b.first_index && a.size() == b.size() && a.mode == b.mode,
            "histograms with different geometry cannot be merged");
    CorrelationHistogram out = a;
    out.normalization.reset();
    out.sigma.reset();
    for (std::size_t i = 0; i < out.size(); ++i) out.counts[i] += b.counts[i];
    return out;
}

namespace io {
namespace {

std::string format_double(const char* fmt, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

std::vector<std::string> split(const std::string& line, char sep)
{
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, sep)) out.push_back(field);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double parse_double(const std::string& text, std::size_t lineno)
{
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw DataError("histogram CSV line " + std::to_string(lineno) + ": cannot parse number \"" + text + "\"");
}

}  // namespace

void write_histogram_csv(std::ostream& out, const CorrelationHistogram& h)
{
    out << "# bin_width_ns=" << format_double("%.17g", h.bin_width * 1e9) << '\n';
    out << "# mode=" << to_string(h.mode) << '\n';
    if (h.max_delay > 0.0) out << "# max_delay_ns=" << format_double("%.17g", h.max_delay * 1e9) << '\n';
    if (h.normalization) out << "# normalization=" << format_double("%.17g", *h.normalization) << '\n';
    out << "delay_ns,counts,normalized,sigma\n";
    for (std::size_t i = 0; i < h.size(); ++i) {
        out << format_double("%.6f", h.delay(i) * 1e9) << ',' << format_double("%.17g", h.counts[i]) << ',';
        if (h.normalization) out << format_double("%.12g", h.normalized(i));
        out << ',';
        if (h.sigma) out << format_double("%.12g", (*h.sigma)[i]);
        out << '\n';
    }
}

void write_histogram_csv(const std::string& path, const CorrelationHistogram& h)
{
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    write_histogram_csv(out, h);
}

namespace {

// Widths written as nanoseconds come back as the same double when they are a
// whole number of femtoseconds, which every correlator bin width is.
double ns_to_seconds(double ns)
{
    const double fs = ns * 1e6;
    const double whole = std::round(fs);
    if (whole != 0.0 && std::abs(fs - whole) <= 1e-6 * std::abs(whole)) return whole / 1e15;
    return ns * 1e-9;
}

}  // namespace

HistogramCsv read_histogram_csv(std::istream& in)
{
    HistogramCsv result;
    auto& h = result.histogram;
    std::string line;
    std::size_t lineno = 0;
    std::vector<std::string> columns;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = line.substr(1, eq - 1);
            key.erase(0, key.find_first_not_of(' '));
            const std::string value = line.substr(eq + 1);
            if (key == "bin_width_ns") h.bin_width = ns_to_seconds(parse_double(value, lineno));
            else if (key == "mode") h.mode = histogram_mode_from_string(value);
            else if (key == "max_delay_ns") h.max_delay = ns_to_seconds(parse_double(value, lineno));
            else if (key == "normalization") h.normalization = parse_double(value, lineno);
            continue;
        }
        if (columns.empty()) {
            columns = split(line, ',');
            if (columns.size() < 2 || columns[0] != "delay_ns" || columns[1] != "counts")
                throw DataError("histogram CSV line " + std::to_string(lineno) +
                                ": expected header starting \"delay_ns,counts\"");
            continue;
        }
        break;
    }
    if (columns.empty()) throw DataError("histogram CSV: missing header line");
    int normalized_col = -1, sigma_col = -1;
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c] == "normalized") normalized_col = static_cast<int>(c);
        if (columns[c] == "sigma") sigma_col = static_cast<int>(c);
    }
    std::vector<double> delays, normalized, sigma;
    bool sigma_complete = sigma_col >= 0;
    bool normalized_complete = normalized_col >= 0;
    do {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#' || line.rfind("delay_ns", 0) == 0) continue;
        const auto fields = split(line, ',');
        if (fields.size() < 2)
            throw DataError("histogram CSV line " + std::to_string(lineno) + ": expected at least 2 fields");
        delays.push_back(parse_double(fields[0], lineno) * 1e-9);
        const double c = parse_double(fields[1], lineno);
        if (c < 0.0) throw DataError("histogram CSV line " + std::to_string(lineno) + ": negative count");
        h.counts.push_back(c);
        auto optional_field = [&](int col, std::vector<double>& dest, bool& complete) {
            if (col < 0 || !complete) return;
            if (static_cast<std::size_t>(col) >= fields.size() || fields[col].empty()) {
                complete = false;
                return;
            }
            dest.push_back(parse_double(fields[col], lineno));
        };
        optional_field(normalized_col, normalized, normalized_complete);
        optional_field(sigma_col, sigma, sigma_complete);
    } while (std::getline(in, line) && ++lineno);

    if (h.counts.empty()) return result;
    if (h.bin_width <= 0.0) {
        if (delays.size() < 2) throw DataError("histogram CSV: bin width unknown (no metadata, single bin)");
        h.bin_width = delays[1] - delays[0];
    }
    h.first_index = std::llround(delays.front() / h.bin_width);
    for (std::size_t i = 0; i < delays.size(); ++i)
        if (std::abs(delays[i] - h.delay(i)) > 1e-3 * h.bin_width)
            throw DataError("histogram CSV: bins are not contiguous at data row " + std::to_string(i + 1));
    if (!h.normalization && normalized_complete && !normalized.empty()) {
        for (std::size_t i = 0; i < normalized.size(); ++i)
            if (h.counts[i] > 0.0 && normalized[i] > 0.0) {
                h.normalization = h.counts[i] / normalized[i];
                break;
            }
    }
    if (sigma_complete && sigma.size() == h.counts.size()) {
        h.sigma = std::move(sigma);
        result.had_sigma_column = true;
    }
    return result;
}

HistogramCsv read_histogram_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return read_histogram_csv(in);
}

}  // namespace io
}  // namespace qfcsim
