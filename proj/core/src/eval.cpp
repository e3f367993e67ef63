#include "wtad/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

namespace wtad {

Prf metrics_from_counts(long tp, long fp, long fn) {
    if (tp < 0 || fp < 0 || fn < 0)
        throw DataError("metrics_from_counts: negative count");
    Prf r;
    r.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    r.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    r.f_measure = (r.precision + r.recall) > 0.0
                      ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
                      : 0.0;
    return r;
}

SweepResult threshold_sweep(const std::vector<double>& scores,
                            const std::vector<Label>& labels) {
    if (scores.size() != labels.size())
        throw DataError("threshold_sweep: scores and labels differ in length");
    if (scores.empty()) throw DataError("threshold_sweep: empty input");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&scores](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    long total_pos = 0;
    for (const auto& l : labels) total_pos += l.is_attack() ? 1 : 0;
    const long total_neg = static_cast<long>(labels.size()) - total_pos;

    SweepResult result;
    long tp = 0, fp = 0;
    double best_f = -1.0, best_threshold = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        // Entries sharing a score move together across the threshold.
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            if (labels[order[i]].is_attack()) ++tp;
            else ++fp;
            ++i;
        }
        const Prf prf = metrics_from_counts(tp, fp, total_pos - tp);
        if (prf.f_measure > best_f ||
            (prf.f_measure == best_f && threshold < best_threshold)) {
            best_f = prf.f_measure;
            best_threshold = threshold;
        }
        if (total_pos > 0 && total_neg > 0)
            result.roc.push_back({static_cast<double>(fp) / total_neg,
                                  static_cast<double>(tp) / total_pos, threshold});
    }
    result.best_f = best_f;
    result.best_threshold = best_threshold;
    if (total_pos > 0 && total_neg > 0) {
        double auc = 0.0, prev_fpr = 0.0, prev_tpr = 0.0;
        for (const auto& p : result.roc) {
            auc += (p.fpr - prev_fpr) * 0.5 * (p.tpr + prev_tpr);
            prev_fpr = p.fpr;
            prev_tpr = p.tpr;
        }
        auc += (1.0 - prev_fpr) * 0.5 * (1.0 + prev_tpr);
        result.auc = auc;
    }
    return result;
}

EvalReport evaluate_dnn(const ScoreTrace& trace, const std::vector<Label>& labels,
                        double threshold) {
    if (trace.factors.size() != labels.size())
        throw DataError("evaluate_dnn: trace and labels differ in length");
    EvalReport report;
    report.counting_mode = CountingMode::PerEntry;
    report.threshold = threshold;
    std::map<int, std::pair<long, long>> attack_counts;  // id -> (tp, total)
    long normal_total = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const bool predicted = trace.factors[i] >= threshold;
        const bool actual = labels[i].is_attack();
        if (predicted && actual) ++report.tp;
        else if (predicted && !actual) ++report.fp;
        else if (!predicted && actual) ++report.fn;
        else ++report.tn;
        if (actual) {
            auto& [tp_a, tot_a] = attack_counts[labels[i].attack_id];
            tp_a += predicted ? 1 : 0;
            ++tot_a;
        } else {
            ++normal_total;
        }
    }
    const Prf prf = metrics_from_counts(report.tp, report.fp, report.fn);
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f_measure = prf.f_measure;
    report.false_alarm_rate =
        normal_total > 0 ? static_cast<double>(report.fp) / normal_total : 0.0;
    for (const auto& [id, counts] : attack_counts)
        report.per_attack_recall[id] =
            static_cast<double>(counts.first) / static_cast<double>(counts.second);
    const SweepResult sweep = threshold_sweep(trace.factors, labels);
    report.auc = sweep.auc;
    return report;
}

std::vector<WindowLabel> window_labels(const std::vector<Window>& windows) {
    std::vector<WindowLabel> labels;
    labels.reserve(windows.size());
    for (const auto& w : windows) labels.push_back({w.abnormal, w.attack_ids});
    return labels;
}

EvalReport evaluate_svm(const std::vector<SvmPrediction>& verdicts,
                        const std::vector<WindowLabel>& labels) {
    if (verdicts.size() != labels.size())
        throw DataError("evaluate_svm: verdicts and labels differ in length");
    EvalReport report;
    report.counting_mode = CountingMode::PerWindow;
    std::map<int, std::pair<long, long>> attack_counts;
    long normal_total = 0;
    std::vector<double> scores;
    std::vector<Label> score_labels;
    scores.reserve(verdicts.size());
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        const bool predicted = verdicts[i].verdict == Verdict::Abnormal;
        const bool actual = labels[i].abnormal;
        if (predicted && actual) ++report.tp;
        else if (predicted && !actual) ++report.fp;
        else if (!predicted && actual) ++report.fn;
        else ++report.tn;
        if (actual) {
            for (int id : labels[i].attack_ids) {
                auto& [tp_a, tot_a] = attack_counts[id];
                tp_a += predicted ? 1 : 0;
                ++tot_a;
            }
        } else {
            ++normal_total;
        }
        // Negated decision value is an anomaly score; used for AUC only.
        scores.push_back(-verdicts[i].decision_value);
        score_labels.push_back(actual ? Label::attack(0) : Label::normal());
    }
    const Prf prf = metrics_from_counts(report.tp, report.fp, report.fn);
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f_measure = prf.f_measure;
    report.false_alarm_rate =
        normal_total > 0 ? static_cast<double>(report.fp) / normal_total : 0.0;
    for (const auto& [id, counts] : attack_counts)
        report.per_attack_recall[id] =
            static_cast<double>(counts.first) / static_cast<double>(counts.second);
    if (!scores.empty()) report.auc = threshold_sweep(scores, score_labels).auc;
    return report;
}

namespace {

void format_double(std::ofstream& out, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out << buf;
}

}  // namespace

void export_trace(const ScoreTrace& trace, const Log& log,
                  const std::filesystem::path& path) {
    if (trace.factors.size() != log.size())
        throw DataError("export_trace: trace and log differ in length");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "timestamp,score,is_attack,attack_id\n";
    for (std::size_t i = 0; i < trace.factors.size(); ++i) {
        const Label& l = log.entries[i].label;
        out << log.entries[i].timestamp << ',';
        format_double(out, trace.factors[i]);
        out << ',' << (l.is_attack() ? 1 : 0) << ','
            << (l.is_attack() ? l.attack_id : -1) << '\n';
    }
    if (!out) throw DataError("I/O error writing '" + path.string() + "'");
}

void export_verdicts(const std::vector<SvmPrediction>& verdicts,
                     const std::vector<WindowLabel>& labels,
                     const std::filesystem::path& path) {
    if (verdicts.size() != labels.size())
        throw DataError("export_verdicts: verdicts and labels differ in length");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "start_index,decision_value,verdict,is_attack,attack_id\n";
    for (std::size_t i = 0; i < verdicts.size(); ++i) {
        out << verdicts[i].start_index << ',';
        format_double(out, verdicts[i].decision_value);
        out << ',' << (verdicts[i].verdict == Verdict::Abnormal ? "Abnormal" : "Normal")
            << ',' << (labels[i].abnormal ? 1 : 0) << ','
            << (labels[i].attack_ids.empty() ? -1 : labels[i].attack_ids.front()) << '\n';
    }
    if (!out) throw DataError("I/O error writing '" + path.string() + "'");
}

void write_trace_csv(const ScoreTrace& trace, const Log& log,
                     const std::filesystem::path& path) {
    if (trace.factors.size() != log.size())
        throw DataError("write_trace_csv: trace and log differ in length");
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    out << "timestamp,outlier_factor";
    for (int c = 0; c < log.schema.channel_count(); ++c)
        out << ',' << log.schema.channel_name(c);
    out << '\n';
    for (std::size_t i = 0; i < trace.factors.size(); ++i) {
        out << log.entries[i].timestamp << ',';
        format_double(out, trace.factors[i]);
        for (Eigen::Index c = 0; c < trace.breakdown.cols(); ++c) {
            out << ',';
            format_double(out, trace.breakdown(static_cast<Eigen::Index>(i), c));
        }
        out << '\n';
    }
    if (!out) throw DataError("I/O error writing '" + path.string() + "'");
}

std::vector<double> read_scores_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "': empty file");
    std::vector<double> scores;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        const auto first = line.find(',');
        if (first == std::string::npos)
            throw DataError(path.string() + ": row " + std::to_string(row) +
                            ": missing score column");
        auto second = line.find(',', first + 1);
        if (second == std::string::npos) second = line.size();
        try {
            scores.push_back(std::stod(line.substr(first + 1, second - first - 1)));
        } catch (const std::exception&) {
            throw DataError(path.string() + ": row " + std::to_string(row) +
                            ": unparseable score");
        }
    }
    return scores;
}

std::vector<SvmPrediction> read_verdicts_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("'" + path.string() + "': empty file");
    std::vector<SvmPrediction> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        SvmPrediction p;
        try {
            std::getline(ss, cell, ',');
            p.start_index = std::stol(cell);
            std::getline(ss, cell, ',');
            p.decision_value = std::stod(cell);
            std::getline(ss, cell, ',');
            p.verdict = cell == "Abnormal" ? Verdict::Abnormal : Verdict::Normal;
        } catch (const std::exception&) {
            throw DataError(path.string() + ": row " + std::to_string(row) +
                            ": malformed verdict row");
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace wtad
