#ifndef WTAD_TUNE_HPP
#define WTAD_TUNE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "wtad/eval.hpp"
#include "wtad/log.hpp"
#include "wtad/ocsvm.hpp"

namespace wtad {

struct GridSpec {
    std::vector<int> w_values;
    std::vector<double> nu_values;
    std::vector<double> gamma_values;  // entries <= 0 mean "1/d for that w"
    ActuatorEncoding encoding = ActuatorEncoding::OneHot;
    double solver_tol = 1e-6;
    long max_iter = 10'000'000;

    void validate() const;
};

/// The stock logarithmic grid: w in {2,4}, nu in {1e-4..0.5},
/// gamma in {1e-4..1} -- 50 cells.
GridSpec default_grid();

struct GridCell {
    int w = 0;
    double nu = 0.0;
    double gamma = 0.0;  // resolved value (1/d already substituted)
    double f_measure = 0.0;
    bool converged = true;
    std::string error;
};

/// Trains and evaluates every (w, nu, gamma) combination. Both logs are
/// normalized by their own stats (the SVM policy). Solver failures are
/// recorded per cell rather than aborting the sweep. Rows sorted by F
/// descending, failed cells last.
std::vector<GridCell> grid_search(const GridSpec& spec, const Log& train_log,
                                  const Log& eval_log);

struct RandomSearchSpec {
    int w = 4;
    double scale = 1e-3;  // gamma, nu ~ scale * Exp(1)
    int trials = 100;
    std::uint64_t seed = 0;
    ActuatorEncoding encoding = ActuatorEncoding::OneHot;
    double solver_tol = 1e-6;
    long max_iter = 10'000'000;
};

struct RandomSearchResult {
    SvmConfig best_config;
    double best_f = 0.0;
    std::vector<GridCell> trials;  // in sampling order
};

RandomSearchResult random_search(const RandomSearchSpec& spec, const Log& train_log,
                                 const Log& eval_log);

struct DnnOperatingPoint {
    int epoch = 0;  // index into the input traces
    double threshold = 0.0;
    double f_measure = 0.0;
};

/// Per-epoch threshold sweep; returns the argmax-F epoch (earliest on
/// ties) with its best threshold.
DnnOperatingPoint select_dnn_operating_point(
    const std::vector<std::vector<double>>& traces_by_epoch,
    const std::vector<Label>& labels);

}  // namespace wtad

#endif
