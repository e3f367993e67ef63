#include "wtad/tune.hpp"

#include <algorithm>
#include <cmath>

#include "wtad/errors.hpp"
#include "wtad/rng.hpp"

namespace wtad {

void GridSpec::validate() const {
    if (w_values.empty() || nu_values.empty() || gamma_values.empty())
        throw DataError("grid: value lists must be non-empty");
    for (int w : w_values)
        if (w < 1) throw DataError("grid: w must be >= 1");
    for (double nu : nu_values)
        if (!(nu > 0.0 && nu <= 1.0)) throw DataError("grid: nu must be in (0, 1]");
}

GridSpec default_grid() {
    GridSpec spec;
    spec.w_values = {2, 4};
    spec.nu_values = {1e-4, 1e-3, 1e-2, 1e-1, 0.5};
    spec.gamma_values = {1e-4, 1e-3, 1e-2, 1e-1, 1.0};
    return spec;
}

namespace {

Eigen::MatrixXd feature_matrix(const std::vector<Window>& windows) {
    const long l = static_cast<long>(windows.size());
    const long d = windows.empty() ? 0 : windows[0].features.size();
    Eigen::MatrixXd x(l, d);
    for (long i = 0; i < l; ++i)
        x.row(i) = windows[static_cast<std::size_t>(i)].features.transpose();
    return x;
}

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::VectorXd na = a.rowwise().squaredNorm();
    const Eigen::VectorXd nb = b.rowwise().squaredNorm();
    Eigen::MatrixXd d2 = -2.0 * (a * b.transpose());
    d2.colwise() += na;
    d2.rowwise() += nb.transpose();
    return d2.cwiseMax(0.0);
}

/// Shared per-w state: windows, labels, and squared-distance matrices,
/// reused across every (nu, gamma) cell.
struct WContext {
    std::vector<Window> train_windows;
    std::vector<WindowLabel> eval_labels;
    Eigen::MatrixXd d2_train;  // train x train
    Eigen::MatrixXd d2_cross;  // train x eval
    long dim = 0;
};

WContext make_context(const Log& train_log, const Log& eval_log, int w,
                      ActuatorEncoding encoding) {
    WContext ctx;
    const Log train_norm = normalize(train_log, compute_norm_stats(train_log));
    const Log eval_norm = normalize(eval_log, compute_norm_stats(eval_log));
    ctx.train_windows = extract_windows(train_norm, w, encoding);
    auto eval_windows = extract_windows(eval_norm, w, encoding);
    ctx.eval_labels = window_labels(eval_windows);
    const Eigen::MatrixXd xtr = feature_matrix(ctx.train_windows);
    const Eigen::MatrixXd xev = feature_matrix(eval_windows);
    ctx.d2_train = squared_distances(xtr, xtr);
    ctx.d2_cross = squared_distances(xtr, xev);
    ctx.dim = xtr.cols();
    return ctx;
}

GridCell run_cell(const WContext& ctx, int w, double nu, double gamma, double tol,
                  long max_iter) {
    GridCell cell;
    cell.w = w;
    cell.nu = nu;
    cell.gamma = gamma > 0.0 ? gamma : 1.0 / static_cast<double>(ctx.dim);
    try {
        const Eigen::MatrixXd gram = (-cell.gamma * ctx.d2_train.array()).exp();
        const DualSolution sol = solve_one_class_dual(gram, nu, tol, max_iter);
        // Decision values for every eval window from the cached distances.
        Eigen::VectorXd f = Eigen::VectorXd::Constant(ctx.d2_cross.cols(), -sol.rho);
        for (long i = 0; i < sol.alpha.size(); ++i)
            if (sol.alpha[i] > 0.0)
                f += sol.alpha[i] *
                     (-cell.gamma * ctx.d2_cross.row(i).array()).exp().matrix().transpose();
        std::vector<SvmPrediction> verdicts(static_cast<std::size_t>(f.size()));
        for (long e = 0; e < f.size(); ++e) {
            verdicts[static_cast<std::size_t>(e)].start_index = e;
            verdicts[static_cast<std::size_t>(e)].decision_value = f[e];
            verdicts[static_cast<std::size_t>(e)].verdict =
                f[e] >= 0.0 ? Verdict::Normal : Verdict::Abnormal;
        }
        cell.f_measure = evaluate_svm(verdicts, ctx.eval_labels).f_measure;
    } catch (const NumericalError& e) {
        cell.converged = false;
        cell.f_measure = std::numeric_limits<double>::quiet_NaN();
        cell.error = e.what();
    }
    return cell;
}

}  // namespace

std::vector<GridCell> grid_search(const GridSpec& spec, const Log& train_log,
                                  const Log& eval_log) {
    spec.validate();
    std::vector<GridCell> cells;
    for (int w : spec.w_values) {
        const WContext ctx = make_context(train_log, eval_log, w, spec.encoding);
        for (double gamma : spec.gamma_values)
            for (double nu : spec.nu_values)
                cells.push_back(
                    run_cell(ctx, w, nu, gamma, spec.solver_tol, spec.max_iter));
    }
    std::stable_sort(cells.begin(), cells.end(), [](const GridCell& a, const GridCell& b) {
        if (a.converged != b.converged) return a.converged;
        return a.f_measure > b.f_measure;
    });
    return cells;
}

RandomSearchResult random_search(const RandomSearchSpec& spec, const Log& train_log,
                                 const Log& eval_log) {
    if (spec.trials < 1) throw DataError("random search: trials must be >= 1");
    if (spec.scale <= 0.0) throw DataError("random search: scale must be > 0");
    const WContext ctx = make_context(train_log, eval_log, spec.w, spec.encoding);
    Rng rng(spec.seed);
    RandomSearchResult result;
    result.best_f = -1.0;
    for (int t = 0; t < spec.trials; ++t) {
        const double gamma = spec.scale * rng.exponential();
        const double nu = std::min(1.0, spec.scale * rng.exponential());
        GridCell cell =
            run_cell(ctx, spec.w, nu, gamma, spec.solver_tol, spec.max_iter);
        if (cell.converged && cell.f_measure > result.best_f) {
            result.best_f = cell.f_measure;
            result.best_config.w = spec.w;
            result.best_config.nu = nu;
            result.best_config.gamma = cell.gamma;
            result.best_config.encoding = spec.encoding;
            result.best_config.solver_tol = spec.solver_tol;
            result.best_config.max_iter = spec.max_iter;
        }
        result.trials.push_back(std::move(cell));
    }
    if (result.best_f < 0.0)
        throw NumericalError("random search: no trial converged");
    return result;
}

DnnOperatingPoint select_dnn_operating_point(
    const std::vector<std::vector<double>>& traces_by_epoch,
    const std::vector<Label>& labels) {
    if (traces_by_epoch.empty())
        throw DataError("select_dnn_operating_point: no epoch traces");
    DnnOperatingPoint best;
    best.f_measure = -1.0;
    for (std::size_t e = 0; e < traces_by_epoch.size(); ++e) {
        const SweepResult sweep = threshold_sweep(traces_by_epoch[e], labels);
        if (sweep.best_f > best.f_measure) {  // strict: earliest epoch wins ties
            best.f_measure = sweep.best_f;
            best.threshold = sweep.best_threshold;
            best.epoch = static_cast<int>(e);
        }
    }
    return best;
}

}  // namespace wtad
