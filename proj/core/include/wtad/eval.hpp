#ifndef WTAD_EVAL_HPP
#define WTAD_EVAL_HPP

#include <filesystem>
#include <map>
#include <optional>
#include <vector>

#include "wtad/density_net.hpp"
#include "wtad/log.hpp"
#include "wtad/ocsvm.hpp"

namespace wtad {

enum class CountingMode { PerEntry, PerWindow };

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    std::optional<double> auc;  // absent when a class is missing
    CountingMode counting_mode = CountingMode::PerEntry;
    std::map<int, double> per_attack_recall;
    double false_alarm_rate = 0.0;
    std::optional<double> threshold;  // PerEntry mode only
    long tp = 0, fp = 0, fn = 0, tn = 0;
};

/// P = tp/(tp+fp), R = tp/(tp+fn), F = 2PR/(P+R); any zero denominator
/// yields 0.
struct Prf {
    double precision = 0.0, recall = 0.0, f_measure = 0.0;
};
Prf metrics_from_counts(long tp, long fp, long fn);

struct RocPoint {
    double fpr = 0.0, tpr = 0.0, threshold = 0.0;
};

struct SweepResult {
    double best_threshold = 0.0;
    double best_f = 0.0;
    std::vector<RocPoint> roc;
    std::optional<double> auc;  // trapezoidal; absent when a class is missing
};

/// Sweeps every distinct score as a threshold candidate (F is piecewise
/// constant between observed scores, so the finite sweep is exact) and
/// returns the F-maximizing threshold, smallest on ties. An entry is
/// predicted abnormal iff score >= threshold.
SweepResult threshold_sweep(const std::vector<double>& scores,
                            const std::vector<Label>& labels);

/// Entry-counted metrics for the density net: entry i is abnormal iff
/// factors[i] >= threshold. false_alarm_rate = FP / #Normal entries.
EvalReport evaluate_dnn(const ScoreTrace& trace, const std::vector<Label>& labels,
                        double threshold);

struct WindowLabel {
    bool abnormal = false;
    std::vector<int> attack_ids;
};
std::vector<WindowLabel> window_labels(const std::vector<Window>& windows);

/// Window-counted metrics for the SVM. A multi-attack window counts
/// toward every contributing attack's recall.
EvalReport evaluate_svm(const std::vector<SvmPrediction>& verdicts,
                        const std::vector<WindowLabel>& labels);

/// CSV export of a score trace (timestamp,score,is_attack,attack_id) or
/// verdict list (start_index,decision_value,verdict,is_attack,attack_id).
void export_trace(const ScoreTrace& trace, const Log& log,
                  const std::filesystem::path& path);
void export_verdicts(const std::vector<SvmPrediction>& verdicts,
                     const std::vector<WindowLabel>& labels,
                     const std::filesystem::path& path);

/// Full trace CSV with the per-channel breakdown:
/// timestamp,outlier_factor,<one column per channel>.
void write_trace_csv(const ScoreTrace& trace, const Log& log,
                     const std::filesystem::path& path);
/// Reads back the outlier_factor column of a trace CSV.
std::vector<double> read_scores_csv(const std::filesystem::path& path);
/// Reads back a verdict CSV written by export_verdicts or the predict CLI.
std::vector<SvmPrediction> read_verdicts_csv(const std::filesystem::path& path);

}  // namespace wtad

#endif
