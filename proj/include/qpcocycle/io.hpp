#pragma once

// Output plumbing shared by the runner: locale-independent float formatting,
// config hashing, CSV and JSON writers that stamp every file with the config
// hash and library version, and a minimal SVG line plotter.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qpcocycle/error.hpp"

#ifndef QPCOCYCLE_VERSION
#define QPCOCYCLE_VERSION "0.1.0"
#endif

namespace qpc {

inline constexpr std::string_view kVersion = QPCOCYCLE_VERSION;

/// 17 significant digits, independent of the global locale.
inline std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

/// 64-bit FNV-1a, as 16 hex digits.
inline std::string fnv1a_hex(std::string_view data)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static constexpr char digits[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, h >>= 4)
        out[static_cast<std::size_t>(i)] = digits[h & 0xf];
    return out;
}

/// Hash of the canonical (key-sorted, compact) JSON text.
inline std::string config_hash(const nlohmann::json& config) { return fnv1a_hex(config.dump()); }

struct Stamp {
    std::string config_hash;
    std::string version = std::string(kVersion);
};

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const Stamp& stamp, const std::vector<std::string>& header)
        : out_(path, std::ios::binary), columns_(header.size())
    {
        require(out_.good(), ErrorKind::InvalidArgument, "cannot open " + path.string());
        out_ << "# qpcocycle " << stamp.version << " config " << stamp.config_hash << '\n';
        write_fields(header);
    }

    void row(const std::vector<double>& values)
    {
        std::vector<std::string> f;
        f.reserve(values.size());
        for (double v : values)
            f.push_back(format_double(v));
        write_fields(f);
    }

    void row_fields(const std::vector<std::string>& fields) { write_fields(fields); }

private:
    void write_fields(const std::vector<std::string>& fields)
    {
        require(fields.size() == columns_, ErrorKind::InvalidArgument, "CSV row width mismatch");
        for (std::size_t i = 0; i < fields.size(); ++i)
            out_ << (i ? "," : "") << fields[i];
        out_ << '\n';
    }

    std::ofstream out_;
    std::size_t columns_;
};

namespace detail {

// nlohmann prints the shortest round-trip form; reports use the same fixed
// 17-digit rule as the CSV files, so floats are printed here.
inline void dump_json(std::ostream& os, const nlohmann::json& j, int indent, int depth)
{
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    switch (j.type()) {
    case nlohmann::json::value_t::number_float: {
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            os << "null";
            break;
        }
        std::string s = format_double(v);
        if (s.find_first_of(".en") == std::string::npos)
            s += ".0";
        os << s;
        break;
    }
    case nlohmann::json::value_t::object: {
        if (j.empty()) {
            os << "{}";
            break;
        }
        os << "{\n";
        std::size_t i = 0;
        for (auto it = j.begin(); it != j.end(); ++it, ++i) {
            os << pad << nlohmann::json(it.key()).dump() << ": ";
            dump_json(os, it.value(), indent, depth + 1);
            os << (i + 1 < j.size() ? ",\n" : "\n");
        }
        os << close << '}';
        break;
    }
    case nlohmann::json::value_t::array: {
        if (j.empty()) {
            os << "[]";
            break;
        }
        os << "[\n";
        for (std::size_t i = 0; i < j.size(); ++i) {
            os << pad;
            dump_json(os, j[i], indent, depth + 1);
            os << (i + 1 < j.size() ? ",\n" : "\n");
        }
        os << close << ']';
        break;
    }
    default:
        os << j.dump();
    }
}

} // namespace detail

/// JSON text with floats at 17 significant digits.
inline std::string json_text(const nlohmann::json& j, int indent = 2)
{
    std::ostringstream os;
    detail::dump_json(os, j, indent, 0);
    return os.str();
}

/// Writes {"meta": {...}, ...body} with two-space indentation.
inline void write_json(const std::filesystem::path& path, const Stamp& stamp, nlohmann::json body)
{
    body["meta"] = {{"version", stamp.version}, {"config_hash", stamp.config_hash}};
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::InvalidArgument, "cannot open " + path.string());
    out << json_text(body) << '\n';
}

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
};

/// Static SVG line plot; non-finite points are skipped.
inline void write_svg_plot(const std::filesystem::path& path, const Stamp& stamp, const std::string& title,
                           const std::string& xlabel, const std::string& ylabel,
                           const std::vector<PlotSeries>& series, bool log_x = false)
{
    constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    auto tx = [&](double v) { return log_x ? std::log10(v) : v; };
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
    for (const auto& s : series)
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            const double x = tx(s.x[i]), y = s.y[i];
            if (!std::isfinite(x) || !std::isfinite(y))
                continue;
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (!std::isfinite(xmin)) {
        xmin = ymin = 0.0;
        xmax = ymax = 1.0;
    }
    if (xmax == xmin)
        xmax = xmin + 1.0;
    if (ymax == ymin)
        ymax = ymin + 1.0;
    auto px = [&](double x) { return L + (tx(x) - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
        << "<!-- qpcocycle " << stamp.version << " config " << stamp.config_hash << " -->\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
        << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n"
        << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n"
        << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">"
        << xlabel << (log_x ? " (log10)" : "") << "</text>\n"
        << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16 "
        << (T + H - B) / 2 << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0, yv = ymin + (ymax - ymin) * i / 4.0;
        const double xp = L + (W - L - R) * i / 4.0, yp = H - B - (H - T - B) * i / 4.0;
        svg << "<text x=\"" << xp << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\" font-size=\"10\">"
            << format_double(log_x ? std::pow(10.0, xv) : xv).substr(0, 8) << "</text>\n"
            << "<text x=\"" << L - 6 << "\" y=\"" << yp + 3 << "\" text-anchor=\"end\" font-size=\"10\">"
            << format_double(yv).substr(0, 8) << "</text>\n";
    }
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % 5];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            if (std::isfinite(tx(s.x[i])) && std::isfinite(s.y[i]))
                svg << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
        svg << "\"/>\n<text x=\"" << W - R - 4 << "\" y=\"" << T + 14 * (k + 1)
            << "\" text-anchor=\"end\" font-size=\"11\" fill=\"" << color << "\">" << s.label << "</text>\n";
    }
    svg << "</svg>\n";
    std::ofstream out(path, std::ios::binary);
    require(out.good(), ErrorKind::InvalidArgument, "cannot open " + path.string());
    out << svg.str();
}

} // namespace qpc
