#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "synlog/csv.hpp"
#include "synlog/error.hpp"
#include "synlog/stats.hpp"

namespace synlog {

// ---------------------------------------------------------------------------
// Rounding and escaping
// ---------------------------------------------------------------------------

// Fixed 3-decimal rendering, half away from zero; undefined renders as NaN.
inline std::string format_fixed3(double x) {
    if (std::isnan(x)) return "NaN";
    long long scaled = std::llround(x * 1000.0);
    std::string out;
    if (scaled < 0) {
        out.push_back('-');
        scaled = -scaled;
    }
    out += std::to_string(scaled / 1000);
    const long long frac = scaled % 1000;
    out.push_back('.');
    out.push_back(static_cast<char>('0' + frac / 100));
    out.push_back(static_cast<char>('0' + frac / 10 % 10));
    out.push_back(static_cast<char>('0' + frac % 10));
    return out;
}

inline std::string escape_latex(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': case '%': case '$': case '#': case '_': case '{': case '}':
                out.push_back('\\');
                out.push_back(ch);
                break;
            case '~': out += "\\textasciitilde{}"; break;
            case '^': out += "\\textasciicircum{}"; break;
            case '\\': out += "\\textbackslash{}"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Table rendering
// ---------------------------------------------------------------------------

struct NamedMetrics {
    std::string model;
    MetricsSummary metrics;
};

struct NamedCounts {
    std::string model;
    ConfusionCounts counts;
};

struct TablePair {
    std::string csv;
    std::string latex;
};

namespace detail {

inline std::string latex_table(const std::string& caption, const std::string& column_spec,
                               const std::vector<std::string>& header,
                               const std::vector<std::vector<std::string>>& rows) {
    std::string out = "\\begin{table}[htbp]\n\\centering\n\\caption{" + caption + "}\n";
    out += "\\begin{tabular}{" + column_spec + "}\n\\toprule\n";
    for (std::size_t i = 0; i < header.size(); ++i)
        out += (i ? " & " : "") + header[i];
    out += " \\\\\n\\midrule\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out += (i ? " & " : "") + row[i];
        out += " \\\\\n";
    }
    out += "\\bottomrule\n\\end{tabular}\n\\end{table}\n";
    return out;
}

}  // namespace detail

// Classification-metric table in the published column order; values rounded
// here and nowhere earlier.
inline TablePair emit_metrics_table(const std::vector<NamedMetrics>& summaries) {
    const std::vector<std::string> header{"Model",       "Accuracy", "Precision", "Recall",
                                          "F1",          "Specificity", "FAR",   "MCC"};
    std::string csv = join_fields(header);
    csv.push_back('\n');
    std::vector<std::vector<std::string>> latex_rows;
    for (const auto& s : summaries) {
        const auto& m = s.metrics;
        const std::vector<std::string> cells{
            format_fixed3(m.accuracy),    format_fixed3(m.precision),
            format_fixed3(m.recall),      format_fixed3(m.f1),
            format_fixed3(m.specificity), format_fixed3(m.false_alarm_rate),
            format_fixed3(m.mcc)};
        std::vector<std::string> row{s.model};
        row.insert(row.end(), cells.begin(), cells.end());
        csv += join_fields(row);
        csv.push_back('\n');
        std::vector<std::string> lrow{escape_latex(s.model)};
        lrow.insert(lrow.end(), cells.begin(), cells.end());
        latex_rows.push_back(std::move(lrow));
    }
    return TablePair{csv, detail::latex_table("Summary of classification metrics for all runs.",
                                              "lccccccc", header, latex_rows)};
}

// Confusion-count table with the combined actual-positive/negative column.
inline TablePair emit_confusion_table(const std::vector<NamedCounts>& rows) {
    const std::vector<std::string> header{"Model", "TP", "FN", "FP", "TN", "Total Pos/Neg"};
    std::string csv = join_fields(header);
    csv.push_back('\n');
    std::vector<std::vector<std::string>> latex_rows;
    for (const auto& r : rows) {
        const std::vector<std::string> cells{
            format_u64(r.counts.tp), format_u64(r.counts.fn), format_u64(r.counts.fp),
            format_u64(r.counts.tn),
            format_u64(r.counts.actual_positives()) + "/" +
                format_u64(r.counts.actual_negatives())};
        std::vector<std::string> row{r.model};
        row.insert(row.end(), cells.begin(), cells.end());
        csv += join_fields(row);
        csv.push_back('\n');
        std::vector<std::string> lrow{escape_latex(r.model)};
        lrow.insert(lrow.end(), cells.begin(), cells.end());
        latex_rows.push_back(std::move(lrow));
    }
    return TablePair{csv,
                     detail::latex_table("Confusion matrix results for each run.", "lccccc",
                                         header, latex_rows)};
}

// ---------------------------------------------------------------------------
// ROC figure
// ---------------------------------------------------------------------------

struct NamedCurve {
    std::string label;
    std::vector<RocPoint> points;
    double auc = stats_nan;
};

namespace detail {

inline std::string px(double value) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.2f", value);
    return buffer;
}

inline std::string xml_escape(const std::string& text) {
    std::string out;
    for (char ch : text) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(ch);
        }
    }
    return out;
}

}  // namespace detail

// Hand-built SVG: fixed 640x480 canvas, unit axes, dashed chance diagonal,
// one polyline per curve, legend with 3-decimal AUCs. Curves are anchored at
// (0,0) and (1,1) so single-point inputs render as two segments.
inline std::string emit_roc_figure(const std::vector<NamedCurve>& curves) {
    if (curves.empty()) throw Error("roc figure needs at least one curve");
    for (const auto& c : curves)
        if (c.points.empty()) throw Error("curve '" + c.label + "' has no points");

    constexpr double x0 = 70.0, y0 = 45.0, plot_w = 540.0, plot_h = 370.0;
    const auto px_x = [&](double fpr) { return x0 + fpr * plot_w; };
    const auto px_y = [&](double tpr) { return y0 + (1.0 - tpr) * plot_h; };
    static const std::vector<std::string> palette{"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                                  "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

    std::string svg =
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 640 480\" width=\"640\" "
        "height=\"480\" font-family=\"Helvetica, Arial, sans-serif\">\n"
        "<rect x=\"0\" y=\"0\" width=\"640\" height=\"480\" fill=\"#ffffff\"/>\n"
        "<text x=\"340\" y=\"26\" font-size=\"16\" text-anchor=\"middle\">ROC Curve "
        "Comparison</text>\n";

    for (int i = 0; i <= 5; ++i) {
        const double t = i / 5.0;
        const std::string vx = detail::px(px_x(t)), hy = detail::px(px_y(t));
        svg += "<line x1=\"" + vx + "\" y1=\"" + detail::px(y0) + "\" x2=\"" + vx + "\" y2=\"" +
               detail::px(y0 + plot_h) + "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<line x1=\"" + detail::px(x0) + "\" y1=\"" + hy + "\" x2=\"" +
               detail::px(x0 + plot_w) + "\" y2=\"" + hy +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        char tick[8];
        std::snprintf(tick, sizeof tick, "%.1f", t);
        svg += "<text x=\"" + vx + "\" y=\"" + detail::px(y0 + plot_h + 18.0) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + tick + "</text>\n";
        svg += "<text x=\"" + detail::px(x0 - 8.0) + "\" y=\"" + detail::px(px_y(t) + 4.0) +
               "\" font-size=\"12\" text-anchor=\"end\">" + tick + "</text>\n";
    }
    svg += "<rect x=\"" + detail::px(x0) + "\" y=\"" + detail::px(y0) + "\" width=\"" +
           detail::px(plot_w) + "\" height=\"" + detail::px(plot_h) +
           "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    svg += "<text x=\"" + detail::px(x0 + plot_w / 2.0) + "\" y=\"462\" font-size=\"14\" "
           "text-anchor=\"middle\">False Positive Rate</text>\n";
    svg += "<text x=\"20\" y=\"" + detail::px(y0 + plot_h / 2.0) +
           "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
           detail::px(y0 + plot_h / 2.0) + ")\">True Positive Rate</text>\n";
    svg += "<line x1=\"" + detail::px(px_x(0.0)) + "\" y1=\"" + detail::px(px_y(0.0)) +
           "\" x2=\"" + detail::px(px_x(1.0)) + "\" y2=\"" + detail::px(px_y(1.0)) +
           "\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"6,4\"/>\n";

    for (std::size_t c = 0; c < curves.size(); ++c) {
        std::vector<std::pair<double, double>> pts;
        if (curves[c].points.front().fpr != 0.0 || curves[c].points.front().tpr != 0.0)
            pts.emplace_back(0.0, 0.0);
        for (const auto& p : curves[c].points) pts.emplace_back(p.fpr, p.tpr);
        if (pts.back() != std::pair{1.0, 1.0}) pts.emplace_back(1.0, 1.0);
        std::string poly;
        for (const auto& [fpr, tpr] : pts) {
            if (!poly.empty()) poly.push_back(' ');
            poly += detail::px(px_x(fpr)) + "," + detail::px(px_y(tpr));
        }
        svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" +
               palette[c % palette.size()] + "\" stroke-width=\"2\"/>\n";
    }

    const double legend_h = 14.0 + 18.0 * static_cast<double>(curves.size());
    const double legend_x = x0 + plot_w - 250.0, legend_y = y0 + plot_h - 10.0 - legend_h;
    svg += "<rect x=\"" + detail::px(legend_x) + "\" y=\"" + detail::px(legend_y) +
           "\" width=\"240\" height=\"" + detail::px(legend_h) +
           "\" fill=\"#ffffff\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const double line_y = legend_y + 16.0 + 18.0 * static_cast<double>(c);
        svg += "<line x1=\"" + detail::px(legend_x + 10.0) + "\" y1=\"" + detail::px(line_y) +
               "\" x2=\"" + detail::px(legend_x + 34.0) + "\" y2=\"" + detail::px(line_y) +
               "\" stroke=\"" + palette[c % palette.size()] + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::px(legend_x + 42.0) + "\" y=\"" + detail::px(line_y + 4.0) +
               "\" font-size=\"12\">" + detail::xml_escape(curves[c].label) +
               " (AUC = " + format_fixed3(curves[c].auc) + ")</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

// ---------------------------------------------------------------------------
// Reading a stats directory back
// ---------------------------------------------------------------------------

struct StatsArtifacts {
    std::vector<NamedMetrics> metrics;
    std::vector<NamedCounts> counts;
    std::vector<NamedCurve> curves;
};

namespace detail {

inline double parse_stat_cell(std::string_view cell) {
    const auto t = trim(cell);
    if (t.empty() || t == "NaN" || t == "nan") return stats_nan;
    return std::stod(std::string(t));
}

inline std::map<std::string, std::size_t> header_index(const std::vector<std::string>& header,
                                                       const std::string& path) {
    std::map<std::string, std::size_t> out;
    for (std::size_t i = 0; i < header.size(); ++i) out[std::string(trim(header[i]))] = i;
    if (!out.count("detector") || !out.count("run"))
        throw IoError(path, "header lacks detector/run columns");
    return out;
}

}  // namespace detail

// Loads the CSVs written by write_stats_outputs. When roc_curves.csv is
// absent, degenerate single-point curves are rebuilt from the confusion
// counts of every run that has both classes.
inline StatsArtifacts read_stats_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    StatsArtifacts out;
    const std::string metrics_path = (fs::path(dir) / "metrics_summary.csv").string();
    const std::string counts_path = (fs::path(dir) / "confusion_matrices.csv").string();
    const std::string curves_path = (fs::path(dir) / "roc_curves.csv").string();

    {
        const auto rows = parse_csv(read_text_file(metrics_path));
        if (rows.empty()) throw IoError(metrics_path, "empty metrics summary");
        const auto idx = detail::header_index(rows.front(), metrics_path);
        const auto need = [&](const char* name) {
            const auto it = idx.find(name);
            if (it == idx.end()) throw IoError(metrics_path, std::string("missing column ") + name);
            return it->second;
        };
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& cells = rows[r];
            if (cells.size() == 1 && trim(cells[0]).empty()) continue;
            NamedMetrics nm;
            nm.model = std::string(trim(cells[need("detector")])) + " " +
                       std::string(trim(cells[need("run")]));
            nm.metrics.accuracy = detail::parse_stat_cell(cells[need("accuracy")]);
            nm.metrics.precision = detail::parse_stat_cell(cells[need("precision")]);
            nm.metrics.recall = detail::parse_stat_cell(cells[need("recall")]);
            nm.metrics.f1 = detail::parse_stat_cell(cells[need("f1")]);
            nm.metrics.specificity = detail::parse_stat_cell(cells[need("specificity")]);
            nm.metrics.false_alarm_rate = detail::parse_stat_cell(cells[need("far")]);
            nm.metrics.mcc = detail::parse_stat_cell(cells[need("mcc")]);
            out.metrics.push_back(std::move(nm));
        }
    }
    {
        const auto rows = parse_csv(read_text_file(counts_path));
        if (rows.empty()) throw IoError(counts_path, "empty confusion table");
        const auto idx = detail::header_index(rows.front(), counts_path);
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto& cells = rows[r];
            if (cells.size() == 1 && trim(cells[0]).empty()) continue;
            NamedCounts nc;
            nc.model = std::string(trim(cells[idx.at("detector")])) + " " +
                       std::string(trim(cells[idx.at("run")]));
            const auto cell_u64 = [&](const char* name) {
                return static_cast<std::uint64_t>(std::stoull(cells[idx.at(name)]));
            };
            nc.counts = ConfusionCounts{cell_u64("tp"), cell_u64("fn"), cell_u64("fp"),
                                        cell_u64("tn")};
            out.counts.push_back(std::move(nc));
        }
    }
    if (fs::exists(curves_path)) {
        const auto rows = parse_csv(read_text_file(curves_path));
        if (!rows.empty()) {
            const auto idx = detail::header_index(rows.front(), curves_path);
            for (std::size_t r = 1; r < rows.size(); ++r) {
                const auto& cells = rows[r];
                if (cells.size() == 1 && trim(cells[0]).empty()) continue;
                const std::string label = std::string(trim(cells[idx.at("detector")])) + " " +
                                          std::string(trim(cells[idx.at("run")]));
                if (out.curves.empty() || out.curves.back().label != label)
                    out.curves.push_back(NamedCurve{label, {}, stats_nan});
                const auto threshold_text = trim(cells[idx.at("threshold")]);
                const double threshold = threshold_text == "inf"
                                             ? std::numeric_limits<double>::infinity()
                                             : detail::parse_stat_cell(threshold_text);
                out.curves.back().points.push_back(
                    {threshold, detail::parse_stat_cell(cells[idx.at("fpr")]),
                     detail::parse_stat_cell(cells[idx.at("tpr")])});
            }
            for (auto& curve : out.curves) {
                double area = 0.0;
                for (std::size_t i = 1; i < curve.points.size(); ++i)
                    area += (curve.points[i].fpr - curve.points[i - 1].fpr) *
                            (curve.points[i].tpr + curve.points[i - 1].tpr) / 2.0;
                curve.auc = area;
            }
        }
    } else {
        for (const auto& nc : out.counts) {
            if (nc.counts.actual_positives() == 0 || nc.counts.actual_negatives() == 0) continue;
            const double tpr = static_cast<double>(nc.counts.tp) /
                               static_cast<double>(nc.counts.actual_positives());
            const double fpr = static_cast<double>(nc.counts.fp) /
                               static_cast<double>(nc.counts.actual_negatives());
            out.curves.push_back(
                NamedCurve{nc.model, {RocPoint{0.5, fpr, tpr}}, (tpr + 1.0 - fpr) / 2.0});
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Report output bundle
// ---------------------------------------------------------------------------

struct ReportFormats {
    bool csv = true;
    bool latex = true;
    bool svg = true;
};

inline ReportFormats report_formats_from_string(const std::string& spec) {
    ReportFormats f{false, false, false};
    std::size_t start = 0;
    while (start <= spec.size()) {
        std::size_t comma = spec.find(',', start);
        if (comma == std::string::npos) comma = spec.size();
        const auto token = trim(std::string_view(spec).substr(start, comma - start));
        if (token == "csv")
            f.csv = true;
        else if (token == "latex" || token == "tex")
            f.latex = true;
        else if (token == "svg")
            f.svg = true;
        else if (!token.empty())
            throw ConfigError("unknown report format '" + std::string(token) + "'");
        start = comma + 1;
    }
    if (!f.csv && !f.latex && !f.svg) throw ConfigError("no report formats selected");
    return f;
}

// Renders every requested artifact into out_dir; returns the written paths.
inline std::vector<std::string> write_report_outputs(const StatsArtifacts& artifacts,
                                                     const std::string& out_dir,
                                                     const ReportFormats& formats = {}) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    std::vector<std::string> written;
    const auto save = [&](const char* name, const std::string& text) {
        const std::string path = (fs::path(out_dir) / name).string();
        write_text_file(path, text);
        written.push_back(path);
    };

    const TablePair metrics = emit_metrics_table(artifacts.metrics);
    const TablePair counts = emit_confusion_table(artifacts.counts);
    if (formats.csv) {
        save("metrics_table.csv", metrics.csv);
        save("confusion_table.csv", counts.csv);
    }
    if (formats.latex) {
        save("metrics_table.tex", metrics.latex);
        save("confusion_table.tex", counts.latex);
    }
    if (formats.svg && !artifacts.curves.empty())
        save("roc_comparison.svg", emit_roc_figure(artifacts.curves));
    return written;
}

}  // namespace synlog
