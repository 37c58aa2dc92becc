#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "brmob/error.hpp"
#include "brmob/experiment.hpp"

// CSV and SVG output of experiment rows.

namespace brmob {

inline constexpr std::string_view kCsvHeader = "domain,algorithm,n,run,regret,bound,ms";

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string format_optional(const std::optional<double>& v) { return v ? format_double(*v) : "NA"; }

inline void write_csv(const std::vector<ResultRow>& rows, std::ostream& out, bool with_timing = true) {
    out << (with_timing ? kCsvHeader : kCsvHeader.substr(0, kCsvHeader.rfind(','))) << '\n';
    for (const ResultRow& r : rows) {
        out << r.domain << ',' << r.algorithm << ',' << r.n << ',' << r.run << ',' << format_optional(r.regret) << ','
            << format_optional(r.bound);
        if (with_timing) out << ',' << format_double(r.ms);
        out << '\n';
    }
}

inline void emit_csv(const std::vector<ResultRow>& rows, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
    write_csv(rows, out);
    out.flush();
    require(static_cast<bool>(out), ErrorKind::Io, "write to '" + path + "' failed");
}

namespace report_detail {

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) return out;
        start = pos + 1;
    }
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    require(res.ec == std::errc() && res.ptr == text.data() + text.size(), ErrorKind::Io,
            "malformed " + std::string(what) + " '" + std::string(text) + "'");
    return v;
}

inline std::optional<double> parse_optional(std::string_view text, std::string_view what) {
    if (text == "NA") return std::nullopt;
    return parse_number<double>(text, what);
}

}  // namespace report_detail

inline std::vector<ResultRow> read_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io, "missing CSV header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == kCsvHeader, ErrorKind::Io, "unexpected CSV header '" + line + "'");
    std::vector<ResultRow> rows;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto f = report_detail::split(line, ',');
        require(f.size() == 7, ErrorKind::Io, "expected 7 CSV fields in '" + line + "'");
        ResultRow r;
        r.domain = std::string(f[0]);
        r.algorithm = std::string(f[1]);
        r.n = report_detail::parse_number<std::size_t>(f[2], "n");
        r.run = report_detail::parse_number<std::size_t>(f[3], "run");
        r.regret = report_detail::parse_optional(f[4], "regret");
        r.bound = report_detail::parse_optional(f[5], "bound");
        r.ms = report_detail::parse_number<double>(f[6], "ms");
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::vector<ResultRow> parse_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Io, "cannot open '" + path + "'");
    return read_csv(in);
}

/// Linear-interpolation percentile of sorted values, q in [0, 1].
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
    require(!sorted.empty(), ErrorKind::EmptyInput, "percentile of an empty sample");
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

struct SeriesPoint {
    std::size_t n = 0;
    double mean = 0.0;
    double low = 0.0;   // 2.5th percentile over runs
    double high = 0.0;  // 97.5th percentile over runs
};

/// Per algorithm, the regret summary at each n, ignoring failed cells.
inline std::map<std::string, std::vector<SeriesPoint>> summarize_series(const std::vector<ResultRow>& rows) {
    std::map<std::string, std::map<std::size_t, std::vector<double>>> grouped;
    for (const ResultRow& r : rows) {
        auto& cell = grouped[r.algorithm][r.n];
        if (r.regret) cell.push_back(*r.regret);
    }
    std::map<std::string, std::vector<SeriesPoint>> out;
    for (auto& [alg, by_n] : grouped) {
        auto& series = out[alg];
        for (auto& [n, values] : by_n) {
            if (values.empty()) continue;
            std::sort(values.begin(), values.end());
            double sum = 0.0;
            for (const double v : values) sum += v;
            series.push_back({n, sum / static_cast<double>(values.size()), percentile_sorted(values, 0.025),
                              percentile_sorted(values, 0.975)});
        }
    }
    return out;
}

inline void write_figure(const std::vector<ResultRow>& rows, std::ostream& out, const std::string& title = "") {
    require(!rows.empty(), ErrorKind::EmptyInput, "no rows to plot");
    const auto series = summarize_series(rows);

    std::size_t n_min = static_cast<std::size_t>(-1), n_max = 0;
    double y_max = 0.0;
    for (const auto& [alg, pts] : series) {
        for (const SeriesPoint& p : pts) {
            n_min = std::min(n_min, p.n);
            n_max = std::max(n_max, p.n);
            y_max = std::max(y_max, p.high);
        }
    }
    if (n_min > n_max) n_min = n_max = 0;
    if (!(y_max > 0.0)) y_max = 1.0;
    const bool log_x = n_min > 0 && n_max > n_min;

    constexpr double kWidth = 640, kHeight = 420, kLeft = 70, kRight = 160, kTop = 40, kBottom = 60;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    const auto xmap = [&](std::size_t n) {
        if (n_max == n_min) return kLeft + plot_w / 2;
        const double t = log_x ? (std::log(double(n)) - std::log(double(n_min))) / (std::log(double(n_max)) - std::log(double(n_min)))
                               : (double(n) - double(n_min)) / (double(n_max) - double(n_min));
        return kLeft + t * plot_w;
    };
    const auto ymap = [&](double y) { return kTop + plot_h * (1.0 - y / (1.05 * y_max)); };

    static constexpr std::string_view kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                   "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!title.empty()) {
        out << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title
            << "</text>\n";
    }
    out << "<g stroke=\"black\" fill=\"none\">\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
        << kTop + plot_h << "\"/>\n"
        << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kTop + plot_h
        << "\"/>\n</g>\n";

    // ticks at every n present, five ticks on y
    std::vector<std::size_t> ns;
    for (const auto& [alg, pts] : series) {
        for (const SeriesPoint& p : pts) ns.push_back(p.n);
    }
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    out << "<g font-size=\"11\" text-anchor=\"middle\">\n";
    for (const std::size_t n : ns) {
        out << "<text x=\"" << xmap(n) << "\" y=\"" << kTop + plot_h + 16 << "\">" << n << "</text>\n";
    }
    out << "</g>\n<g font-size=\"11\" text-anchor=\"end\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double y = 1.05 * y_max * i / 4.0;
        std::ostringstream label;
        label.precision(3);
        label << y;
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << ymap(y) + 4 << "\">" << label.str() << "</text>\n";
    }
    out << "</g>\n"
        << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 18 << "\" text-anchor=\"middle\" font-size=\"13\">n"
        << (log_x ? " (log scale)" : "") << "</text>\n"
        << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << kTop + plot_h / 2 << ")\">regret</text>\n";

    std::size_t idx = 0;
    for (const auto& [alg, pts] : series) {
        const std::string_view color = kColors[idx % std::size(kColors)];
        if (!pts.empty()) {
            out << "<polygon class=\"band\" fill=\"" << color << "\" fill-opacity=\"0.18\" stroke=\"none\" points=\"";
            for (const SeriesPoint& p : pts) out << xmap(p.n) << ',' << ymap(p.high) << ' ';
            for (auto it = pts.rbegin(); it != pts.rend(); ++it) out << xmap(it->n) << ',' << ymap(it->low) << ' ';
            out << "\"/>\n";
            out << "<polyline class=\"mean\" data-algorithm=\"" << alg << "\" fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"2\" points=\"";
            for (std::size_t i = 0; i < pts.size(); ++i) out << (i ? " " : "") << xmap(pts[i].n) << ',' << ymap(pts[i].mean);
            out << "\"/>\n";
        }
        const double ly = kTop + 10 + 20.0 * static_cast<double>(idx);
        out << "<line x1=\"" << kLeft + plot_w + 15 << "\" y1=\"" << ly << "\" x2=\"" << kLeft + plot_w + 40 << "\" y2=\""
            << ly << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
            << "<text x=\"" << kLeft + plot_w + 46 << "\" y=\"" << ly + 4 << "\" font-size=\"12\">" << alg << "</text>\n";
        ++idx;
    }
    out << "</svg>\n";
}

inline void emit_figure(const std::vector<ResultRow>& rows, const std::string& path, const std::string& title = "") {
    require(!rows.empty(), ErrorKind::EmptyInput, "no rows to plot");
    std::ofstream out(path, std::ios::binary);
    require(static_cast<bool>(out), ErrorKind::Io, "cannot open '" + path + "' for writing");
    write_figure(rows, out, title);
    out.flush();
    require(static_cast<bool>(out), ErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace brmob
