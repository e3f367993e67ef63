// Acceptance gate: nine checks covering gradient correctness, scoring
// closed forms, solver/oracle equivalence, the nu property, windowing,
// metric identities, qualitative detector behavior on the simulator
// suite, tuning reproducibility, and an optional external-dataset check.
// Prints one PASS/FAIL line per criterion and exits nonzero when a
// gating criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <vector>

#include "qp_oracle.hpp"
#include "wtad/csv.hpp"
#include "wtad/density_net.hpp"
#include "wtad/eval.hpp"
#include "wtad/ocsvm.hpp"
#include "wtad/plant.hpp"
#include "wtad/rng.hpp"
#include "wtad/tune.hpp"

using namespace wtad;
namespace fs = std::filesystem;

namespace {

constexpr double kHalfLog2Pi = 0.9189385332046727;

struct Timer {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    }
};

int failures = 0;

void report(int criterion, bool pass, const std::string& detail, bool gating = true) {
    std::printf("criterion %d: %s%s — %s\n", criterion,
                pass ? "PASS" : "FAIL", gating ? "" : " (advisory)", detail.c_str());
    std::fflush(stdout);
    if (!pass && gating) ++failures;
}

Log random_log(const ChannelSchema& schema, int n, Rng& rng) {
    Log log;
    log.schema = schema;
    for (int t = 0; t < n; ++t) {
        LogEntry e;
        e.timestamp = t;
        for (const auto& a : schema.actuators)
            e.actuator_values.push_back(
                static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(a.arity))));
        for (int k = 0; k < schema.sensor_count(); ++k)
            e.sensor_values.push_back(rng.gaussian(0.0, 1.0));
        e.label = Label::normal();
        log.entries.push_back(std::move(e));
    }
    return log;
}

// ---- criterion 1: gradient correctness --------------------------------

void criterion_gradients() {
    Timer timer;
    double worst = 0.0;
    Rng meta(811);
    bool ok = true;
    for (int trial = 0; trial < 20; ++trial) {
        ChannelSchema schema;
        const int n_act = static_cast<int>(meta.uniform_int(3));
        const int n_sen = 1 + static_cast<int>(meta.uniform_int(2));
        for (int j = 0; j < n_act; ++j)
            schema.actuators.push_back(
                {"A" + std::to_string(j), 2 + static_cast<int>(meta.uniform_int(3))});
        for (int k = 0; k < n_sen; ++k)
            schema.sensors.push_back({"S" + std::to_string(k), ""});
        DensityNetConfig cfg;
        cfg.hidden_dim = 2 + static_cast<int>(meta.uniform_int(7));  // 2..8
        cfg.seed = 7000 + static_cast<std::uint64_t>(trial);
        Rng rng(cfg.seed);
        const Log log =
            random_log(schema, 6 + static_cast<int>(meta.uniform_int(25)), rng);  // <= 30
        const double rel = gradient_check(cfg, log, 1e-5);
        worst = std::max(worst, rel);
        if (rel >= 1e-4) ok = false;
    }
    const double secs = timer.seconds();
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "20 nets, max relative gradient error %.3g (< 1e-4), %.1f s (< 60)",
                  worst, secs);
    report(1, ok && secs < 60.0, buf);
}

// ---- criterion 2: additivity and closed forms -------------------------

void criterion_closed_forms() {
    bool ok = true;
    std::string detail;

    PlantConfig pcfg = default_plant_config();
    pcfg.tick_count = 300;
    const Log raw = simulate(pcfg, {});
    const Log log = normalize(raw, compute_norm_stats(raw));
    DensityNetConfig cfg;
    cfg.hidden_dim = 10;
    cfg.seed = 21;
    const DensityNet net = init_net(cfg, log.schema);
    const ScoreTrace trace = outlier_factors(net, log);
    double max_gap = 0.0;
    for (std::size_t i = 0; i < trace.factors.size(); ++i)
        max_gap = std::max(max_gap,
                           std::abs(trace.factors[i] -
                                    trace.breakdown.row(static_cast<long>(i)).sum()));
    if (max_gap >= 1e-9) ok = false;

    ChannelSchema schema;
    schema.actuators = {{"ACT", 5}};
    schema.sensors = {{"SEN", ""}};
    DensityNetConfig zcfg;
    zcfg.hidden_dim = 4;
    DensityNet zn = init_net(zcfg, schema);
    for (auto* t : zn.params.tensors()) t->setZero();
    zn.params.sensors[0].out_bias(1, 0) =
        std::log(std::exp(1.0 - zn.variance_floor) - 1.0);  // variance exactly 1
    LogEntry e;
    e.actuator_values = {2};
    e.sensor_values = {0.0};
    const auto [st, terms] = forward_step(zn, zero_state(zn), nullptr, e);
    const double cat_gap = std::abs(terms[0] - std::log(5.0));
    const double gauss_gap = std::abs(terms[1] - kHalfLog2Pi);
    if (cat_gap >= 1e-9 || gauss_gap >= 1e-9) ok = false;

    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "additivity gap %.2g, ln(arity) gap %.2g, half-ln(2pi) gap %.2g "
                  "(all < 1e-9)",
                  max_gap, cat_gap, gauss_gap);
    report(2, ok, buf);
}

// ---- criterion 3: QP oracle equivalence -------------------------------

void criterion_qp_oracle() {
    Timer timer;
    Rng rng(5150);
    bool ok = true;
    double worst_obj = 0.0;
    int verdict_mismatches = 0;
    for (int trial = 0; trial < 50; ++trial) {
        long l;
        double nu;
        if (trial % 2 == 0) {
            l = 4 + static_cast<long>(rng.uniform_int(6));  // 4..9: full enumeration
            nu = 0.15 + 0.7 * rng.uniform();
        } else {
            l = 10 + static_cast<long>(rng.uniform_int(6));  // 10..15: slack bound
            nu = (0.2 + 0.7 * rng.uniform()) / static_cast<double>(l);
        }
        const int dim = 2 + static_cast<int>(rng.uniform_int(3));
        const double gamma = 0.05 + rng.uniform();
        Eigen::MatrixXd x(l, dim);
        for (long i = 0; i < l; ++i)
            for (int j = 0; j < dim; ++j) x(i, j) = rng.gaussian(0.0, 1.0);
        Eigen::MatrixXd gram(l, l);
        for (long i = 0; i < l; ++i)
            for (long j = 0; j <= i; ++j) {
                const double k =
                    std::exp(-gamma * (x.row(i) - x.row(j)).squaredNorm());
                gram(i, j) = k;
                gram(j, i) = k;
            }
        const DualSolution sol = solve_one_class_dual(gram, nu, 1e-9, 1'000'000);
        const auto oracle = wtad_test::brute_force_one_class_dual(gram, nu);
        if (!oracle.found) {
            ok = false;
            continue;
        }
        worst_obj = std::max(worst_obj, std::abs(sol.objective - oracle.objective));
        if (std::abs(sol.objective - oracle.objective) > 1e-6) ok = false;
        const Eigen::VectorXd fs = gram * sol.alpha - Eigen::VectorXd::Constant(l, sol.rho);
        const Eigen::VectorXd fo =
            gram * oracle.alpha - Eigen::VectorXd::Constant(l, oracle.lambda);
        for (long i = 0; i < l; ++i) {
            if (std::abs(fo[i]) < 1e-7) continue;  // margin SVs sit at zero
            if ((fs[i] >= 0.0) != (fo[i] >= 0.0)) ++verdict_mismatches;
        }
    }
    const double secs = timer.seconds();
    if (verdict_mismatches > 0) ok = false;
    char buf[180];
    std::snprintf(buf, sizeof(buf),
                  "50 problems, max objective gap %.2g (<= 1e-6), %d verdict "
                  "mismatches, %.1f s (< 120)",
                  worst_obj, verdict_mismatches, secs);
    report(3, ok && secs < 120.0, buf);
}

// ---- criterion 4: nu property -----------------------------------------

void criterion_nu_property() {
    Rng rng(940);
    const long l = 500;
    std::vector<Window> windows(static_cast<std::size_t>(l));
    for (long i = 0; i < l; ++i) {
        windows[static_cast<std::size_t>(i)].start_index = i;
        windows[static_cast<std::size_t>(i)].features = Eigen::VectorXd::NullaryExpr(
            2, [&rng](Eigen::Index) { return rng.gaussian(0.0, 1.0); });
    }
    bool ok = true;
    std::string detail;
    for (double nu : {0.01, 0.1, 0.5}) {
        SvmConfig cfg;
        cfg.w = 1;
        cfg.nu = nu;
        cfg.gamma = 0.5;
        const SvmModel model = train_svm(cfg, windows);
        long outliers = 0;
        for (const auto& p : predict(model, windows))
            if (p.verdict == Verdict::Abnormal) ++outliers;
        const double outlier_frac = static_cast<double>(outliers) / static_cast<double>(l);
        const double sv_frac =
            static_cast<double>(model.alphas.size()) / static_cast<double>(l);
        if (outlier_frac > nu + 0.05 || sv_frac < nu - 0.05) ok = false;
        char buf[80];
        std::snprintf(buf, sizeof(buf), "nu=%.2f: outliers %.3f, SVs %.3f; ", nu,
                      outlier_frac, sv_frac);
        detail += buf;
    }
    report(4, ok, detail + "bounds nu+0.05 / nu-0.05");
}

// ---- criterion 5: windowing exactness ---------------------------------

void criterion_windowing() {
    Rng rng(314159);
    bool ok = true;
    PlantConfig pcfg = default_plant_config();
    pcfg.tick_count = 150;
    for (int trial = 0; trial < 10; ++trial) {
        pcfg.seed = 100 + static_cast<std::uint64_t>(trial);
        Log log = simulate(pcfg, {});
        for (auto& e : log.entries)  // random sparse attack labels
            if (rng.uniform() < 0.1)
                e.label = Label::attack(1 + static_cast<int>(rng.uniform_int(3)));
        for (int w : {1, 2, 5, 17}) {
            const auto windows = extract_windows(log, w);
            if (windows.size() != log.size() - static_cast<std::size_t>(w) + 1) ok = false;
            for (const auto& win : windows) {
                bool any = false;
                for (int t = 0; t < w; ++t)
                    any |= log.entries[static_cast<std::size_t>(win.start_index + t)]
                               .label.is_attack();
                if (win.abnormal != any) ok = false;
            }
        }
        // Per-entry and per-window counting coincide at w = 1.
        ScoreTrace trace;
        for (std::size_t i = 0; i < log.size(); ++i)
            trace.factors.push_back(std::round(rng.uniform() * 6.0));
        std::vector<Label> labels;
        for (const auto& e : log.entries) labels.push_back(e.label);
        const EvalReport er = evaluate_dnn(trace, labels, 3.0);
        const auto w1 = extract_windows(log, 1);
        std::vector<SvmPrediction> verdicts(w1.size());
        for (std::size_t i = 0; i < w1.size(); ++i) {
            verdicts[i].start_index = static_cast<long>(i);
            verdicts[i].decision_value = -trace.factors[i];
            verdicts[i].verdict =
                trace.factors[i] >= 3.0 ? Verdict::Abnormal : Verdict::Normal;
        }
        const EvalReport wr = evaluate_svm(verdicts, window_labels(w1));
        if (er.tp != wr.tp || er.fp != wr.fp || er.fn != wr.fn || er.tn != wr.tn ||
            std::abs(er.f_measure - wr.f_measure) > 1e-12)
            ok = false;
    }
    report(5, ok, "k-w+1 window count, any-abnormal labels, entry==window at w=1 "
                  "(10 random logs)");
}

// ---- criterion 6: metric formula consistency --------------------------

void criterion_metric_consistency() {
    const Prf a = metrics_from_counts(19659L * 67847L, 341L * 67847L, 19659L * 32153L);
    const Prf b = metrics_from_counts(37L * 69901L, 3L * 69901L, 37L * 30099L);
    const double gap_a = std::abs(a.f_measure - 0.80281);
    const double gap_b = std::abs(b.f_measure - 0.79628);
    const bool ok = a.precision == 0.98295 && std::abs(a.recall - 0.67847) < 1e-12 &&
                    b.precision == 0.925 && std::abs(b.recall - 0.69901) < 1e-12 &&
                    gap_a < 5e-5 && gap_b < 5e-5;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "P/R 0.98295/0.67847 -> F gap %.2g; 0.92500/0.69901 -> F gap %.2g "
                  "(both < 5e-5)",
                  gap_a, gap_b);
    report(6, ok, buf);
}

// ---- criterion 7: qualitative reproduction on the simulator -----------

struct SuiteStats {
    std::map<int, double> dnn_recall, svm_recall;
    double dnn_far = 0.0, svm_far = 0.0;
};

SuiteStats run_suite(std::uint64_t seed) {
    const auto suite = standard_scenario_suite(seed);
    const Log& train = suite[0].train;

    // Density net, per the documented suite settings.
    DensityNetConfig dcfg;
    dcfg.hidden_dim = 32;
    dcfg.truncation_len = 100;
    dcfg.batch_size = 10;
    dcfg.learning_rate = 2e-3;
    dcfg.epochs = 300;
    dcfg.seed = 7;
    Timer dnn_timer;
    const TrainResult tr = wtad::train(dcfg, train);
    std::printf("  [suite] dnn training: %.1f s, first/last epoch cost %.3f / %.3f\n",
                dnn_timer.seconds(), tr.epoch_mean_cost.front(),
                tr.epoch_mean_cost.back());

    // Pool per-entry scores over all attack scenarios, then pick one
    // threshold by sweep and evaluate each scenario at that threshold.
    std::vector<double> pooled_scores;
    std::vector<Label> pooled_labels;
    std::vector<ScoreTrace> traces;
    std::vector<std::vector<Label>> label_sets;
    for (std::size_t i = 1; i < suite.size(); ++i) {
        const Log norm = normalize(suite[i].test, tr.net.train_stats);
        traces.push_back(outlier_factors(tr.net, norm));
        std::vector<Label> labels;
        for (const auto& e : suite[i].test.entries) labels.push_back(e.label);
        label_sets.push_back(labels);
        pooled_scores.insert(pooled_scores.end(), traces.back().factors.begin(),
                             traces.back().factors.end());
        pooled_labels.insert(pooled_labels.end(), labels.begin(), labels.end());
    }
    const double threshold =
        threshold_sweep(pooled_scores, pooled_labels).best_threshold;

    SuiteStats stats;
    long dnn_fp = 0, dnn_norm = 0;
    for (std::size_t i = 0; i < traces.size(); ++i) {
        const EvalReport r = evaluate_dnn(traces[i], label_sets[i], threshold);
        for (const auto& [id, rec] : r.per_attack_recall) stats.dnn_recall[id] = rec;
        dnn_fp += r.fp;
        dnn_norm += r.fp + r.tn;
    }
    stats.dnn_far = static_cast<double>(dnn_fp) / static_cast<double>(dnn_norm);

    // One-class SVM on w=4 windows of the same training run.
    SvmConfig scfg;
    scfg.w = 4;
    scfg.nu = 0.01;
    scfg.gamma = 0.2;
    Timer svm_timer;
    const Log train_norm = normalize(train, compute_norm_stats(train));
    const SvmModel model = train_svm(scfg, extract_windows(train_norm, scfg.w));
    std::printf("  [suite] svm training: %.1f s, %ld support vectors\n",
                svm_timer.seconds(), static_cast<long>(model.alphas.size()));

    long svm_fp = 0, svm_norm = 0;
    for (std::size_t i = 1; i < suite.size(); ++i) {
        const Log norm = normalize(suite[i].test, compute_norm_stats(suite[i].test));
        const auto windows = extract_windows(norm, scfg.w);
        const EvalReport r =
            evaluate_svm(predict(model, windows), window_labels(windows));
        for (const auto& [id, rec] : r.per_attack_recall) stats.svm_recall[id] = rec;
        svm_fp += r.fp;
        svm_norm += r.fp + r.tn;
    }
    stats.svm_far = static_cast<double>(svm_fp) / static_cast<double>(svm_norm);
    return stats;
}

void criterion_qualitative() {
    const SuiteStats s = run_suite(1);

    std::printf("  [suite] per-attack recall (dnn / svm):\n");
    for (const auto& [id, rec] : s.dnn_recall)
        std::printf("  [suite]   attack %d: %.3f / %.3f\n", id, rec,
                    s.svm_recall.count(id) ? s.svm_recall.at(id) : -1.0);
    std::printf("  [suite] false-alarm rate: dnn %.4f (per entry), svm %.4f "
                "(per window)\n",
                s.dnn_far, s.svm_far);

    // Attacks 1 and 2 are the constant-spoof / out-of-range pair; 3 and 4
    // are the drift pair.
    const double dnn_const = std::min(s.dnn_recall.at(1), s.dnn_recall.at(2));
    const double svm_const = std::min(s.svm_recall.at(1), s.svm_recall.at(2));
    const double dnn_drift = std::max(s.dnn_recall.at(3), s.dnn_recall.at(4));
    const double svm_drift = std::max(s.svm_recall.at(3), s.svm_recall.at(4));

    const bool a = dnn_const >= 0.7 && svm_const >= 0.7;
    const bool b = dnn_drift < dnn_const && svm_drift < svm_const;
    const bool c = s.dnn_far <= s.svm_far;
    char buf[240];
    std::snprintf(buf, sizeof(buf),
                  "(a) const/out-of-range recall dnn %.3f svm %.3f (>= 0.7): %s; "
                  "(b) drift %.3f/%.3f strictly lower: %s; "
                  "(c) dnn FAR %.4f <= svm FAR %.4f: %s",
                  dnn_const, svm_const, a ? "yes" : "no", dnn_drift, svm_drift,
                  b ? "yes" : "no", s.dnn_far, s.svm_far, c ? "yes" : "no");
    report(7, a && b && c, buf);
}

// ---- criterion 8: tuning reproducibility ------------------------------

void criterion_tuning() {
    const auto suite = standard_scenario_suite(1);
    Log train = suite[0].train;
    train.entries.resize(1500);
    const Log& eval = suite[2].test;  // out-of-range scenario
    Log eval_cut = eval;
    eval_cut.entries.resize(2000);

    const GridSpec grid = default_grid();
    const auto cells = grid_search(grid, train, eval_cut);
    bool shape_ok = cells.size() == 50;
    for (int w : grid.w_values)
        for (double nu : grid.nu_values)
            for (double gamma : grid.gamma_values) {
                int found = 0;
                for (const auto& c : cells)
                    if (c.w == w && c.nu == nu && c.gamma == gamma) ++found;
                if (found != 1) shape_ok = false;
            }
    double grid_best = -1.0;
    for (const auto& c : cells)
        if (c.converged) grid_best = std::max(grid_best, c.f_measure);

    RandomSearchSpec rs;
    rs.w = 2;
    rs.scale = 0.05;
    rs.trials = 100;
    rs.seed = 42;
    const RandomSearchResult r1 = random_search(rs, train, eval_cut);
    const RandomSearchResult r2 = random_search(rs, train, eval_cut);
    bool repro = r1.best_f == r2.best_f && r1.trials.size() == r2.trials.size();
    for (std::size_t i = 0; repro && i < r1.trials.size(); ++i)
        repro = r1.trials[i].nu == r2.trials[i].nu &&
                r1.trials[i].gamma == r2.trials[i].gamma &&
                r1.trials[i].f_measure == r2.trials[i].f_measure;

    const bool beats = r1.best_f >= grid_best;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "50-cell table: %s; random search bit-reproducible: %s; random "
                  "best F %.4f >= grid best F %.4f: %s",
                  shape_ok ? "yes" : "no", repro ? "yes" : "no", r1.best_f, grid_best,
                  beats ? "yes" : "no");
    report(8, shape_ok && repro && beats, buf);
}

// ---- criterion 9: optional external dataset ---------------------------

void criterion_dataset() {
    const char* env = std::getenv("WTAD_SWAT_NORMAL");
    const char* env_attack = std::getenv("WTAD_SWAT_ATTACK");
    const char* env_schema = std::getenv("WTAD_SWAT_SCHEMA");
    if (!env || !env_attack || !env_schema || !fs::exists(env) ||
        !fs::exists(env_attack) || !fs::exists(env_schema)) {
        std::printf("criterion 9: SKIP (advisory) — external dataset not present; set "
                    "WTAD_SWAT_NORMAL, WTAD_SWAT_ATTACK and WTAD_SWAT_SCHEMA\n");
        return;
    }
    try {
        const Log normal = ingest_csv(env, CsvFormat::SwatLayout, fs::path(env_schema));
        const Log attack =
            ingest_csv(env_attack, CsvFormat::SwatLayout, fs::path(env_schema));
        SvmConfig cfg;
        cfg.w = 4;
        cfg.gamma = 0.0008181483058667633;
        cfg.nu = 0.004584962079820046;
        const Log train_norm = normalize(normal, compute_norm_stats(normal));
        const Log test_norm = normalize(attack, compute_norm_stats(attack));
        const SvmModel model = train_svm(cfg, extract_windows(train_norm, cfg.w));
        const auto windows = extract_windows(test_norm, cfg.w);
        const EvalReport r =
            evaluate_svm(predict(model, windows), window_labels(windows));
        const bool ok = std::abs(r.f_measure - 0.79628) <= 0.05;
        char buf[120];
        std::snprintf(buf, sizeof(buf), "window-counted F %.5f vs 0.79628 +/- 0.05",
                      r.f_measure);
        report(9, ok, buf, /*gating=*/false);
    } catch (const std::exception& e) {
        report(9, false, std::string("error: ") + e.what(), /*gating=*/false);
    }
}

}  // namespace

int main() {
    criterion_gradients();
    criterion_closed_forms();
    criterion_qp_oracle();
    criterion_nu_property();
    criterion_windowing();
    criterion_metric_consistency();
    criterion_qualitative();
    criterion_tuning();
    criterion_dataset();
    if (failures > 0) {
        std::printf("%d gating criterion(s) failed\n", failures);
        return 1;
    }
    std::printf("all gating criteria passed\n");
    return 0;
}
