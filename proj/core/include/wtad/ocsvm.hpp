#ifndef WTAD_OCSVM_HPP
#define WTAD_OCSVM_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "wtad/log.hpp"

namespace wtad {

/// How actuator positions enter the window feature vector. One-hot is the
/// default; ordinal (raw position index) matches the raw-column layout of
/// the public dataset.
enum class ActuatorEncoding { OneHot, Ordinal };

struct SvmConfig {
    int w = 4;            // window size
    double nu = 0.5;      // in (0, 1]
    double gamma = -1.0;  // <= 0 means "use 1/d" where d is the feature dim
    double solver_tol = 1e-6;
    long max_iter = 10'000'000;
    ActuatorEncoding encoding = ActuatorEncoding::OneHot;

    void validate() const;
};

/// One sliding window: w consecutive entries flattened entry-major.
/// Abnormal iff any contained entry is labeled Attack; attack_ids lists
/// every attack contributing to the window.
struct Window {
    long start_index = 0;
    Eigen::VectorXd features;
    bool abnormal = false;
    std::vector<int> attack_ids;
};

/// k - w + 1 windows from a k-entry log. Throws DataError when k < w.
/// Sensor values are taken as-is; normalize the log first (the SVM policy
/// normalizes each dataset by its own stats).
std::vector<Window> extract_windows(const Log& log, int w,
                                    ActuatorEncoding encoding = ActuatorEncoding::OneHot);

/// exp(-gamma * ||x - y||^2)
double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma);

struct SvmModel {
    Eigen::MatrixXd support_vectors;  // one row per SV
    Eigen::VectorXd alphas;
    double rho = 0.0;
    double gamma = 0.0;
    int w = 0;
    ActuatorEncoding encoding = ActuatorEncoding::OneHot;

    double decision_value(const Eigen::VectorXd& x) const;
};

enum class Verdict { Normal, Abnormal };

struct SvmPrediction {
    long start_index = 0;
    Verdict verdict = Verdict::Normal;
    double decision_value = 0.0;
};

/// Solves the one-class dual
///   min 1/2 a' Q a   s.t. 0 <= a_i <= 1/(nu*l), sum a_i = 1
/// with pairwise working-set updates until the max KKT violation drops
/// below solver_tol. rho is recovered by averaging the kernel expansion
/// over margin support vectors. f(x) >= 0 classifies Normal.
/// Throws DataError on abnormal training windows and NumericalError on
/// non-convergence (the message carries the max KKT violation).
SvmModel train_svm(const SvmConfig& config, const std::vector<Window>& windows);

/// Variant taking a precomputed Gram matrix (used by the tuner, which
/// reuses squared-distance matrices across grid cells).
SvmModel train_svm_gram(const SvmConfig& config, const std::vector<Window>& windows,
                        const Eigen::MatrixXd& gram);

std::vector<SvmPrediction> predict(const SvmModel& model,
                                   const std::vector<Window>& windows);

/// Solver internals exposed for the tuner and for oracle comparisons.
struct DualSolution {
    Eigen::VectorXd alpha;
    double rho = 0.0;
    double objective = 0.0;  // 1/2 a' Q a
};
DualSolution solve_one_class_dual(const Eigen::MatrixXd& gram, double nu, double tol,
                                  long max_iter);

void save_svm(const SvmModel& model, const std::filesystem::path& path,
              const std::string& created_stamp = "0");
SvmModel load_svm(const std::filesystem::path& path);

}  // namespace wtad

#endif
