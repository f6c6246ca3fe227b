#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "config.hpp"

namespace leakbound::experiments {

inline std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

/// CSV with `#` provenance lines above a header row. Fields are quoted only
/// when they contain a separator, quote or newline.
class CsvTable
{
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

    void add_comment(const std::string& key, const std::string& value) { comments_.push_back(key + "=" + value); }

    void add_row(std::vector<std::string> row)
    {
        if (row.size() != header_.size())
            throw std::logic_error("csv row width does not match header");
        rows_.push_back(std::move(row));
    }

    const std::vector<std::string>& header() const noexcept { return header_; }
    const std::vector<std::vector<std::string>>& rows() const noexcept { return rows_; }

    std::string str() const
    {
        std::ostringstream os;
        for (const auto& c : comments_)
            os << "# " << c << "\n";
        write_row(os, header_);
        for (const auto& row : rows_)
            write_row(os, row);
        return os.str();
    }

    void save(const std::filesystem::path& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("cannot write '" + path.string() + "'");
        out << str();
        if (!out)
            throw IoError("write failed for '" + path.string() + "'");
    }

private:
    static void write_row(std::ostream& os, const std::vector<std::string>& row)
    {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i)
                os << ',';
            const std::string& f = row[i];
            if (f.find_first_of(",\"\n\r") == std::string::npos) {
                os << f;
                continue;
            }
            os << '"';
            for (char c : f)
                os << (c == '"' ? "\"\"" : std::string(1, c));
            os << '"';
        }
        os << "\r\n";
    }

    std::vector<std::string> header_;
    std::vector<std::string> comments_;
    std::vector<std::vector<std::string>> rows_;
};

struct ParsedCsv
{
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const
    {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end())
            throw IoError("csv has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

/// Reads what CsvTable writes (unquoted or RFC-4180 quoted fields).
inline ParsedCsv read_csv(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read '" + path.string() + "'");
    ParsedCsv out;
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (!have_header && !line.empty() && line[0] == '#') {
            out.comments.push_back(line.substr(line.find_first_not_of("# ")));
            continue;
        }
        if (line.empty())
            continue;
        std::vector<std::string> fields;
        std::string field;
        bool quoted = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            const char c = line[i];
            if (quoted) {
                if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else if (c == '"') {
                    quoted = false;
                } else {
                    field += c;
                }
            } else if (c == '"') {
                quoted = true;
            } else if (c == ',') {
                fields.push_back(std::move(field));
                field.clear();
            } else {
                field += c;
            }
        }
        fields.push_back(std::move(field));
        if (!have_header) {
            out.header = std::move(fields);
            have_header = true;
        } else {
            if (fields.size() != out.header.size())
                throw IoError("row width does not match header in '" + path.string() + "'");
            out.rows.push_back(std::move(fields));
        }
    }
    if (!have_header)
        throw IoError("no header row in '" + path.string() + "'");
    return out;
}

/// Minimal multi-series line chart rendered to SVG.
class LinePlot
{
public:
    struct Series
    {
        std::string label;
        std::vector<double> x;
        std::vector<double> y;
        bool dashed = false;
    };

    LinePlot(std::string title, std::string x_label, std::string y_label)
        : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label))
    {
    }

    void add(Series s) { series_.push_back(std::move(s)); }

    std::string svg() const
    {
        constexpr double width = 720, height = 480, left = 70, right = 180, top = 40, bottom = 60;
        double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
        for (const auto& s : series_)
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]))
                    continue;
                x0 = std::min(x0, s.x[i]);
                x1 = std::max(x1, s.x[i]);
                y0 = std::min(y0, s.y[i]);
                y1 = std::max(y1, s.y[i]);
            }
        if (!std::isfinite(x0)) {
            x0 = y0 = 0;
            x1 = y1 = 1;
        }
        y0 = std::min(y0, 0.0);
        if (x1 <= x0)
            x1 = x0 + 1;
        if (y1 <= y0)
            y1 = y0 + 1;
        const double pw = width - left - right, ph = height - top - bottom;
        auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
        auto py = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

        static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                        "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
        std::ostringstream os;
        os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
           << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
        os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        os << "<text x=\"" << width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title_)
           << "</text>\n";
        os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
           << "\" fill=\"none\" stroke=\"black\"/>\n";
        for (int i = 0; i <= 5; ++i) {
            const double xv = x0 + (x1 - x0) * i / 5.0, yv = y0 + (y1 - y0) * i / 5.0;
            os << "<text x=\"" << px(xv) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
               << format_number(std::round(xv * 100) / 100) << "</text>\n";
            os << "<text x=\"" << left - 6 << "\" y=\"" << py(yv) + 4 << "\" text-anchor=\"end\">"
               << format_number(std::round(yv * 1000) / 1000) << "</text>\n";
            os << "<line x1=\"" << left << "\" x2=\"" << left + pw << "\" y1=\"" << py(yv) << "\" y2=\"" << py(yv)
               << "\" stroke=\"#e0e0e0\"/>\n";
        }
        os << "<text x=\"" << left + pw / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\">"
           << escape(x_label_) << "</text>\n";
        os << "<text transform=\"translate(18," << top + ph / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
           << escape(y_label_) << "</text>\n";
        for (std::size_t k = 0; k < series_.size(); ++k) {
            const auto& s = series_[k];
            const char* colour = palette[k % std::size(palette)];
            os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\""
               << (s.dashed ? " stroke-dasharray=\"4 3\"" : "") << " points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i]))
                    os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
            os << "\"/>\n";
            const double ly = top + 14 + 16.0 * static_cast<double>(k);
            os << "<line x1=\"" << left + pw + 10 << "\" x2=\"" << left + pw + 34 << "\" y1=\"" << ly - 4
               << "\" y2=\"" << ly - 4 << "\" stroke=\"" << colour << "\" stroke-width=\"2\""
               << (s.dashed ? " stroke-dasharray=\"4 3\"" : "") << "/>\n";
            os << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly << "\">" << escape(s.label) << "</text>\n";
        }
        os << "</svg>\n";
        return os.str();
    }

    void save(const std::filesystem::path& path) const
    {
        std::ofstream out(path, std::ios::binary);
        if (!out)
            throw IoError("cannot write '" + path.string() + "'");
        out << svg();
    }

private:
    static std::string escape(const std::string& s)
    {
        std::string out;
        for (char c : s) {
            switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            default: out += c;
            }
        }
        return out;
    }

    std::string title_, x_label_, y_label_;
    std::vector<Series> series_;
};

}  // namespace leakbound::experiments
