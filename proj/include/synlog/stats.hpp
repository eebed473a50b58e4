#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "synlog/aggregate.hpp"
#include "synlog/csv.hpp"
#include "synlog/error.hpp"
#include "synlog/prediction.hpp"

namespace synlog {

struct StatsError : Error {
    using Error::Error;
};

inline constexpr double stats_nan = std::numeric_limits<double>::quiet_NaN();

inline bool is_defined(double x) { return !std::isnan(x); }

// ---------------------------------------------------------------------------
// Confusion counts
// ---------------------------------------------------------------------------

struct ConfusionCounts {
    std::uint64_t tp = 0;
    std::uint64_t fn = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;

    std::uint64_t total() const { return tp + fn + fp + tn; }
    std::uint64_t actual_positives() const { return tp + fn; }
    std::uint64_t actual_negatives() const { return fp + tn; }
    std::uint64_t correct() const { return tp + tn; }
    std::uint64_t incorrect() const { return fp + fn; }

    bool operator==(const ConfusionCounts&) const = default;
};

inline ConfusionCounts confusion(const std::vector<int>& true_labels,
                                 const std::vector<int>& predicted_labels) {
    if (true_labels.size() != predicted_labels.size())
        throw StatsError("label vectors differ in length: " + std::to_string(true_labels.size()) +
                         " vs " + std::to_string(predicted_labels.size()));
    ConfusionCounts c;
    for (std::size_t i = 0; i < true_labels.size(); ++i) {
        const int y = true_labels[i], yhat = predicted_labels[i];
        if ((y != 0 && y != 1) || (yhat != 0 && yhat != 1))
            throw StatsError("labels must be 0 or 1 (position " + std::to_string(i) + ")");
        if (y == 1)
            ++(yhat == 1 ? c.tp : c.fn);
        else
            ++(yhat == 1 ? c.fp : c.tn);
    }
    return c;
}

inline ConfusionCounts confusion(const ScoredRun& run) {
    std::vector<int> truths, preds;
    truths.reserve(run.predictions.size());
    preds.reserve(run.predictions.size());
    for (const auto& p : run.predictions) {
        if (!p.true_label)
            throw StatsError("prediction for session '" + p.session_id +
                             "' has no true label; cannot build a confusion matrix");
        truths.push_back(*p.true_label);
        preds.push_back(p.predicted_label);
    }
    return confusion(truths, preds);
}

// ---------------------------------------------------------------------------
// Metric suite
// ---------------------------------------------------------------------------

// Undefined cells are NaN. Whenever the data has no actual positives the
// whole positive-class family (precision, recall, f1, mcc) is undefined,
// even where a 0 would be computable; any other 0/0 is likewise undefined.
struct MetricsSummary {
    double accuracy = stats_nan;
    double precision = stats_nan;
    double recall = stats_nan;
    double f1 = stats_nan;
    double specificity = stats_nan;
    double false_alarm_rate = stats_nan;
    double mcc = stats_nan;
};

inline MetricsSummary compute_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw StatsError("cannot compute metrics for empty counts");
    const double tp = static_cast<double>(c.tp), fn = static_cast<double>(c.fn),
                 fp = static_cast<double>(c.fp), tn = static_cast<double>(c.tn);
    MetricsSummary m;
    m.accuracy = (tp + tn) / static_cast<double>(c.total());
    if (c.tn + c.fp > 0) {
        m.specificity = tn / (tn + fp);
        m.false_alarm_rate = fp / (fp + tn);
    }
    if (c.actual_positives() > 0) {
        m.recall = tp / (tp + fn);
        if (c.tp + c.fp > 0) m.precision = tp / (tp + fp);
        if (is_defined(m.precision) && m.precision + m.recall > 0)
            m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
        const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
        if (denom > 0) m.mcc = (tp * tn - fp * fn) / std::sqrt(denom);
    }
    return m;
}

inline double accuracy_difference(const MetricsSummary& a, const MetricsSummary& b) {
    if (!is_defined(a.accuracy) || !is_defined(b.accuracy))
        throw StatsError("accuracy difference needs two defined accuracies");
    return a.accuracy - b.accuracy;
}

// ---------------------------------------------------------------------------
// Scores and curves
// ---------------------------------------------------------------------------

enum class ScoreBasis { predicted, true_label };

inline ScoreBasis score_basis_from_string(std::string_view s) {
    if (s == "predicted") return ScoreBasis::predicted;
    if (s == "true") return ScoreBasis::true_label;
    throw ConfigError("unknown score basis '" + std::string(s) + "' (predicted|true)");
}

// s = p when the chosen label is 1, else 1-p: a positive-class score built
// from a per-prediction confidence.
inline double per_prediction_score(int label, double confidence) {
    if (!(confidence >= 0.0 && confidence <= 1.0))
        throw StatsError("confidence " + format_double(confidence) + " is outside [0,1]");
    return label == 1 ? confidence : 1.0 - confidence;
}

inline std::vector<double> run_scores(const ScoredRun& run, ScoreBasis basis) {
    std::vector<double> out;
    out.reserve(run.predictions.size());
    for (const auto& p : run.predictions) {
        int label = p.predicted_label;
        if (basis == ScoreBasis::true_label) {
            if (!p.true_label)
                throw StatsError("session '" + p.session_id +
                                 "' has no true label for true-label score basis");
            label = *p.true_label;
        }
        out.push_back(per_prediction_score(label, p.confidence_score));
    }
    return out;
}

struct RocPoint {
    double threshold;
    double fpr;
    double tpr;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = stats_nan;
    bool degenerate = false;  // at most one real operating point between the corners
};

struct PrPoint {
    double threshold;
    double recall;
    double precision;
};

struct PrCurve {
    std::vector<PrPoint> points;
    double average_precision = stats_nan;
};

namespace detail {

struct ScoreGroup {
    double score;
    std::uint64_t positives = 0;
    std::uint64_t negatives = 0;
};

// Distinct scores in descending order with per-score class tallies.
inline std::vector<ScoreGroup> score_groups(const std::vector<double>& scores,
                                            const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw StatsError("scores and labels differ in length");
    std::map<double, ScoreGroup, std::greater<double>> grouped;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (std::isnan(scores[i])) throw StatsError("score is NaN");
        if (labels[i] != 0 && labels[i] != 1) throw StatsError("labels must be 0 or 1");
        auto& g = grouped.try_emplace(scores[i], ScoreGroup{scores[i], 0, 0}).first->second;
        ++(labels[i] == 1 ? g.positives : g.negatives);
    }
    std::vector<ScoreGroup> out;
    out.reserve(grouped.size());
    for (auto& [_, g] : grouped) out.push_back(g);
    return out;
}

}  // namespace detail

// Threshold sweep over distinct scores, descending; trapezoidal area. Equals
// the pairwise concordance probability P(s+ > s-) + 1/2 P(s+ = s-).
inline RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& true_labels) {
    const auto groups = detail::score_groups(scores, true_labels);
    std::uint64_t pos = 0, neg = 0;
    for (const auto& g : groups) {
        pos += g.positives;
        neg += g.negatives;
    }
    if (pos == 0) throw StatsError("roc is undefined: no positive labels");
    if (neg == 0) throw StatsError("roc is undefined: no negative labels");

    RocCurve curve;
    curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
    std::uint64_t tp = 0, fp = 0;
    for (const auto& g : groups) {
        tp += g.positives;
        fp += g.negatives;
        curve.points.push_back({g.score, static_cast<double>(fp) / static_cast<double>(neg),
                                static_cast<double>(tp) / static_cast<double>(pos)});
    }
    double area = 0.0;
    for (std::size_t i = 1; i < curve.points.size(); ++i)
        area += (curve.points[i].fpr - curve.points[i - 1].fpr) *
                (curve.points[i].tpr + curve.points[i - 1].tpr) / 2.0;
    curve.auc = area;
    curve.degenerate = groups.size() <= 2;
    return curve;
}

// Step-weighted average precision over the same descending sweep.
inline PrCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& true_labels) {
    const auto groups = detail::score_groups(scores, true_labels);
    std::uint64_t pos = 0;
    for (const auto& g : groups) pos += g.positives;
    if (pos == 0) throw StatsError("average precision is undefined: no positive labels");

    PrCurve curve;
    std::uint64_t tp = 0, fp = 0;
    double ap = 0.0, prev_recall = 0.0;
    for (const auto& g : groups) {
        tp += g.positives;
        fp += g.negatives;
        const double recall = static_cast<double>(tp) / static_cast<double>(pos);
        const double precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
        curve.points.push_back({g.score, recall, precision});
        ap += (recall - prev_recall) * precision;
        prev_recall = recall;
    }
    curve.average_precision = ap;
    return curve;
}

// ---------------------------------------------------------------------------
// Interval estimate
// ---------------------------------------------------------------------------

struct Interval {
    double lower = stats_nan;
    double upper = stats_nan;
};

// Inverse standard-normal CDF: Acklam's rational approximation polished with
// one Halley step against erfc, giving full double precision.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw StatsError("quantile argument must lie in (0,1)");
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5, r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

// Wilson score interval for a binomial proportion.
inline Interval proportion_ci(std::uint64_t successes, std::uint64_t n, double alpha = 0.05) {
    if (n == 0) throw StatsError("confidence interval needs at least one trial");
    if (successes > n) throw StatsError("successes exceed trials");
    if (!(alpha > 0.0 && alpha < 1.0)) throw StatsError("alpha must lie in (0,1)");
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double nn = static_cast<double>(n);
    const double phat = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double center = phat + z2 / (2.0 * nn);
    const double half = z * std::sqrt(phat * (1.0 - phat) / nn + z2 / (4.0 * nn * nn));
    return Interval{std::clamp((center - half) / denom, 0.0, 1.0),
                    std::clamp((center + half) / denom, 0.0, 1.0)};
}

// ---------------------------------------------------------------------------
// Significance and effect size
// ---------------------------------------------------------------------------

struct SignificanceResult {
    double p_value = stats_nan;
    std::optional<double> odds_ratio;  // (a*d)/(b*c); absent when b*c = 0
};

// Two-sided Fisher's exact test on [[a,b],[c,d]] by the probability-mass
// rule: sum hypergeometric probabilities no larger than the observed
// table's (with a hair of relative slack for floating comparison).
inline SignificanceResult fisher_exact(std::uint64_t a, std::uint64_t b, std::uint64_t c,
                                       std::uint64_t d) {
    const std::uint64_t row1 = a + b, row2 = c + d, col1 = a + c, col2 = b + d;
    if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0)
        throw StatsError("fisher_exact requires positive margins");
    const double n = static_cast<double>(row1 + row2);
    const auto lchoose = [](double m, double k) {
        return std::lgamma(m + 1.0) - std::lgamma(k + 1.0) - std::lgamma(m - k + 1.0);
    };
    const double log_denominator = lchoose(n, static_cast<double>(col1));
    const auto log_p = [&](std::uint64_t k) {
        return lchoose(static_cast<double>(row1), static_cast<double>(k)) +
               lchoose(static_cast<double>(row2), static_cast<double>(col1 - k)) - log_denominator;
    };
    const std::uint64_t k_lo = col1 > row2 ? col1 - row2 : 0;
    const std::uint64_t k_hi = std::min(row1, col1);
    const double cutoff = log_p(a) + std::log1p(1e-7);
    double total = 0.0;
    for (std::uint64_t k = k_lo; k <= k_hi; ++k)
        if (log_p(k) <= cutoff) total += std::exp(log_p(k));

    SignificanceResult out;
    out.p_value = std::min(total, 1.0);
    if (b > 0 && c > 0)
        out.odds_ratio = (static_cast<double>(a) * static_cast<double>(d)) /
                         (static_cast<double>(b) * static_cast<double>(c));
    return out;
}

// Effect size for two proportions: h = 2*arcsin(sqrt(p1)) - 2*arcsin(sqrt(p2)).
inline double cohens_h(double p1, double p2) {
    if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0))
        throw StatsError("cohens_h arguments must lie in [0,1]");
    return 2.0 * std::asin(std::sqrt(p1)) - 2.0 * std::asin(std::sqrt(p2));
}

// Conventional magnitude buckets at 0.2 / 0.5 / 0.8.
inline std::string effect_size_label(double h) {
    const double a = std::fabs(h);
    if (a < 0.2) return "Negligible";
    if (a < 0.5) return "Small";
    if (a < 0.8) return "Medium";
    return "Large";
}

// ---------------------------------------------------------------------------
// Whole-table summaries
// ---------------------------------------------------------------------------

struct RunStats {
    std::string detector;
    std::string run;
    ConfusionCounts counts;
    MetricsSummary metrics;
    Interval accuracy_ci;
    std::optional<RocCurve> roc;
    std::optional<PrCurve> pr;
    std::string curve_note;  // why roc/pr are absent, when they are
};

struct DetectorComparison {
    std::string run;
    std::string detector_a;
    std::string detector_b;
    double accuracy_a = stats_nan;
    double accuracy_b = stats_nan;
    double accuracy_difference = stats_nan;
    double fisher_p = stats_nan;
    std::optional<double> odds_ratio;
    double cohens_h = stats_nan;
    std::string effect;
};

struct StatsBundle {
    std::vector<RunStats> runs;
    std::vector<DetectorComparison> comparisons;
};

struct StatsOptions {
    ScoreBasis score_basis = ScoreBasis::predicted;
    double alpha = 0.05;
};

namespace detail {

inline const ScoredRun* find_confidence_run(const std::vector<ScoredRun>& runs,
                                            const std::string& detector, const std::string& run) {
    for (const auto& candidate : runs)
        if (candidate.detector == detector && candidate.run_label == run) return &candidate;
    return nullptr;
}

}  // namespace detail

// One summary per (detector, run) column plus per-run detector pairings.
// ROC/PR need per-prediction confidences; when a matching scored run is
// supplied its confidences are joined by session_id, otherwise the curves
// are omitted with the note "labels only".
inline StatsBundle summarize_all(const AggregatedTable& table,
                                 const std::vector<ScoredRun>& confidences = {},
                                 const StatsOptions& options = {}) {
    StatsBundle bundle;
    for (const auto& alias : table.layout.detector_aliases) {
        for (const auto& run_name : table.layout.run_names()) {
            ScoredRun extracted = extract_run(table, alias, run_name);
            RunStats rs;
            rs.detector = alias;
            rs.run = run_name;
            rs.counts = confusion(extracted);
            rs.metrics = compute_metrics(rs.counts);
            rs.accuracy_ci = proportion_ci(rs.counts.correct(), rs.counts.total(), options.alpha);

            if (const ScoredRun* scored =
                    detail::find_confidence_run(confidences, alias, run_name)) {
                if (scored->predictions.size() != extracted.predictions.size())
                    throw StatsError("confidence run '" + alias + "/" + run_name + "' has " +
                                     std::to_string(scored->predictions.size()) +
                                     " rows, table has " +
                                     std::to_string(extracted.predictions.size()));
                std::map<std::string, const ScoredPrediction*> by_id;
                for (const auto& p : scored->predictions) by_id[p.session_id] = &p;
                for (auto& p : extracted.predictions) {
                    const auto it = by_id.find(p.session_id);
                    if (it == by_id.end())
                        throw StatsError("confidence run '" + alias + "/" + run_name +
                                         "' lacks session '" + p.session_id + "'");
                    if (it->second->predicted_label != p.predicted_label)
                        throw StatsError("confidence run '" + alias + "/" + run_name +
                                         "' disagrees with the table on session '" + p.session_id +
                                         "'");
                    p.confidence_score = it->second->confidence_score;
                }
                if (rs.counts.actual_positives() == 0) {
                    rs.curve_note = "no positive labels";
                } else if (rs.counts.actual_negatives() == 0) {
                    rs.curve_note = "no negative labels";
                } else {
                    std::vector<int> truths;
                    truths.reserve(extracted.predictions.size());
                    for (const auto& p : extracted.predictions) truths.push_back(*p.true_label);
                    const auto scores = run_scores(extracted, options.score_basis);
                    rs.roc = roc_curve(scores, truths);
                    rs.pr = pr_curve(scores, truths);
                    if (rs.roc->degenerate) rs.curve_note = "degenerate";
                }
            } else {
                rs.curve_note = "labels only";
            }
            bundle.runs.push_back(std::move(rs));
        }
    }

    const auto stats_for = [&](const std::string& alias, const std::string& run) -> const RunStats& {
        for (const auto& rs : bundle.runs)
            if (rs.detector == alias && rs.run == run) return rs;
        throw StatsError("no summary for " + alias + "/" + run);  // unreachable
    };
    for (const auto& run_name : table.layout.run_names()) {
        const auto& aliases = table.layout.detector_aliases;
        for (std::size_t i = 0; i < aliases.size(); ++i) {
            for (std::size_t j = i + 1; j < aliases.size(); ++j) {
                const RunStats& a = stats_for(aliases[i], run_name);
                const RunStats& b = stats_for(aliases[j], run_name);
                DetectorComparison cmp;
                cmp.run = run_name;
                cmp.detector_a = aliases[i];
                cmp.detector_b = aliases[j];
                cmp.accuracy_a = a.metrics.accuracy;
                cmp.accuracy_b = b.metrics.accuracy;
                cmp.accuracy_difference = accuracy_difference(a.metrics, b.metrics);
                const auto sig = fisher_exact(a.counts.correct(), a.counts.incorrect(),
                                              b.counts.correct(), b.counts.incorrect());
                cmp.fisher_p = sig.p_value;
                cmp.odds_ratio = sig.odds_ratio;
                cmp.cohens_h = cohens_h(cmp.accuracy_a, cmp.accuracy_b);
                cmp.effect = effect_size_label(cmp.cohens_h);
                bundle.comparisons.push_back(std::move(cmp));
            }
        }
    }
    return bundle;
}

// ---------------------------------------------------------------------------
// File outputs
// ---------------------------------------------------------------------------

namespace detail {

// Full-precision cell; undefined values spelled NaN.
inline std::string stat_cell(double x) { return std::isnan(x) ? "NaN" : format_double(x); }

}  // namespace detail

// Writes metrics_summary.csv, confusion_matrices.csv, comparisons.csv and,
// when any run has curves, roc_curves.csv with the raw sweep points.
inline void write_stats_outputs(const StatsBundle& bundle, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path = [&](const char* name) { return (fs::path(out_dir) / name).string(); };

    {
        std::string text = "detector,run,tp,fn,fp,tn\n";
        for (const auto& rs : bundle.runs) {
            text += join_fields({rs.detector, rs.run, format_u64(rs.counts.tp),
                                 format_u64(rs.counts.fn), format_u64(rs.counts.fp),
                                 format_u64(rs.counts.tn)});
            text.push_back('\n');
        }
        write_text_file(path("confusion_matrices.csv"), text);
    }
    {
        std::string text =
            "detector,run,accuracy,accuracy_ci_lower,accuracy_ci_upper,precision,recall,f1,"
            "specificity,far,mcc,roc_auc,average_precision,curve_note\n";
        for (const auto& rs : bundle.runs) {
            const auto& m = rs.metrics;
            text += join_fields(
                {rs.detector, rs.run, detail::stat_cell(m.accuracy),
                 detail::stat_cell(rs.accuracy_ci.lower), detail::stat_cell(rs.accuracy_ci.upper),
                 detail::stat_cell(m.precision), detail::stat_cell(m.recall),
                 detail::stat_cell(m.f1), detail::stat_cell(m.specificity),
                 detail::stat_cell(m.false_alarm_rate), detail::stat_cell(m.mcc),
                 rs.roc ? detail::stat_cell(rs.roc->auc) : std::string{},
                 rs.pr ? detail::stat_cell(rs.pr->average_precision) : std::string{},
                 rs.curve_note});
            text.push_back('\n');
        }
        write_text_file(path("metrics_summary.csv"), text);
    }
    {
        std::string text =
            "run,detector_a,detector_b,accuracy_a,accuracy_b,accuracy_difference,fisher_p,"
            "odds_ratio,cohens_h,effect\n";
        for (const auto& cmp : bundle.comparisons) {
            text += join_fields(
                {cmp.run, cmp.detector_a, cmp.detector_b, detail::stat_cell(cmp.accuracy_a),
                 detail::stat_cell(cmp.accuracy_b), detail::stat_cell(cmp.accuracy_difference),
                 detail::stat_cell(cmp.fisher_p),
                 cmp.odds_ratio ? detail::stat_cell(*cmp.odds_ratio) : std::string{},
                 detail::stat_cell(cmp.cohens_h), cmp.effect});
            text.push_back('\n');
        }
        write_text_file(path("comparisons.csv"), text);
    }
    if (std::any_of(bundle.runs.begin(), bundle.runs.end(),
                    [](const RunStats& rs) { return rs.roc.has_value(); })) {
        std::string text = "detector,run,threshold,fpr,tpr\n";
        for (const auto& rs : bundle.runs) {
            if (!rs.roc) continue;
            for (const auto& pt : rs.roc->points) {
                text += join_fields({rs.detector, rs.run,
                                     std::isinf(pt.threshold) ? "inf"
                                                              : format_double(pt.threshold),
                                     format_double(pt.fpr), format_double(pt.tpr)});
                text.push_back('\n');
            }
        }
        write_text_file(path("roc_curves.csv"), text);
    }
}

}  // namespace synlog
