#include "wtad/ocsvm.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <functional>
#include <list>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "wtad/errors.hpp"

namespace wtad {

void SvmConfig::validate() const {
    if (w < 1) throw DataError("svm: window size must be >= 1");
    if (!(nu > 0.0 && nu <= 1.0)) throw DataError("svm: nu must be in (0, 1]");
    if (solver_tol <= 0.0) throw DataError("svm: solver_tol must be > 0");
    if (max_iter < 1) throw DataError("svm: max_iter must be >= 1");
}

std::vector<Window> extract_windows(const Log& log, int w, ActuatorEncoding encoding) {
    if (w < 1) throw DataError("extract_windows: w must be >= 1");
    const long k = static_cast<long>(log.size());
    if (k < w)
        throw DataError("extract_windows: log has " + std::to_string(k) +
                        " entries, fewer than w = " + std::to_string(w));
    const ChannelSchema& schema = log.schema;
    const int per_entry = (encoding == ActuatorEncoding::OneHot ? schema.arity_sum()
                                                                : schema.actuator_count()) +
                          schema.sensor_count();
    std::vector<Window> windows;
    windows.reserve(static_cast<std::size_t>(k - w + 1));
    for (long i = 0; i + w <= k; ++i) {
        Window win;
        win.start_index = i;
        win.features = Eigen::VectorXd::Zero(static_cast<long>(per_entry) * w);
        long off = 0;
        for (int t = 0; t < w; ++t) {
            const LogEntry& e = log.entries[static_cast<std::size_t>(i + t)];
            if (encoding == ActuatorEncoding::OneHot) {
                for (int j = 0; j < schema.actuator_count(); ++j) {
                    win.features[off + e.actuator_values[j]] = 1.0;
                    off += schema.actuators[j].arity;
                }
            } else {
                for (int j = 0; j < schema.actuator_count(); ++j)
                    win.features[off++] = static_cast<double>(e.actuator_values[j]);
            }
            for (int s = 0; s < schema.sensor_count(); ++s)
                win.features[off++] = e.sensor_values[s];
            if (e.label.is_attack()) {
                win.abnormal = true;
                if (std::find(win.attack_ids.begin(), win.attack_ids.end(),
                              e.label.attack_id) == win.attack_ids.end())
                    win.attack_ids.push_back(e.label.attack_id);
            }
        }
        windows.push_back(std::move(win));
    }
    return windows;
}

double rbf_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double gamma) {
    if (x.size() != y.size())
        throw DataError("rbf_kernel: dimension mismatch");
    return std::exp(-gamma * (x - y).squaredNorm());
}

namespace {

/// Pairwise working-set solver over a kernel-column provider, so the same
/// code serves the dense-Gram path and the on-demand row-cache path.
DualSolution solve_dual_impl(long l, const std::function<const Eigen::VectorXd&(long)>& col,
                             double nu, double tol, long max_iter) {
    if (l < 2) throw DataError("svm solver: need at least 2 windows");
    const double c_bound = 1.0 / (nu * static_cast<double>(l));

    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(l);
    {
        const double n_c = nu * static_cast<double>(l);
        const long full = static_cast<long>(std::floor(n_c));
        for (long i = 0; i < std::min(full, l); ++i) alpha[i] = c_bound;
        double placed = c_bound * static_cast<double>(std::min(full, l));
        if (placed < 1.0 && full < l) alpha[full] = 1.0 - placed;
    }

    Eigen::VectorXd g = Eigen::VectorXd::Zero(l);
    for (long i = 0; i < l; ++i)
        if (alpha[i] > 0.0) g += alpha[i] * col(i);

    const double eps_a = c_bound * 1e-12;
    double violation = 0.0;
    for (long iter = 0; iter < max_iter; ++iter) {
        long u = -1, v = -1;
        double gu = 0.0, gv = 0.0;
        for (long i = 0; i < l; ++i) {
            if (alpha[i] < c_bound - eps_a && (u < 0 || g[i] < gu)) {
                u = i;
                gu = g[i];
            }
            if (alpha[i] > eps_a && (v < 0 || g[i] > gv)) {
                v = i;
                gv = g[i];
            }
        }
        if (u < 0 || v < 0) {
            violation = 0.0;
            break;
        }
        violation = gv - gu;
        if (violation <= tol) break;
        // Copy cu: the provider may reuse its buffer for the next column.
        const Eigen::VectorXd cu = col(u);
        const Eigen::VectorXd& cv = col(v);
        double denom = cu[u] + cv[v] - 2.0 * cu[v];
        if (denom <= 1e-12) denom = 1e-12;
        double delta = violation / denom;
        delta = std::min({delta, c_bound - alpha[u], alpha[v]});
        alpha[u] += delta;
        alpha[v] -= delta;
        g += delta * (cu - cv);
        if (iter == max_iter - 1)
            throw NumericalError("svm solver did not converge; max KKT violation " +
                                 std::to_string(violation));
    }
    if (violation > tol)
        throw NumericalError("svm solver did not converge; max KKT violation " +
                             std::to_string(violation));

    DualSolution sol;
    sol.alpha = alpha;
    sol.objective = 0.5 * alpha.dot(g);

    // rho: average of the kernel expansion over margin SVs; fall back to the
    // midpoint of the KKT bracket if no alpha is strictly inside the box.
    const double eps_b = std::max(1e-12, c_bound * 1e-8);
    double sum = 0.0;
    long free_count = 0;
    for (long i = 0; i < l; ++i)
        if (alpha[i] > eps_b && alpha[i] < c_bound - eps_b) {
            sum += g[i];
            ++free_count;
        }
    if (free_count > 0) {
        sol.rho = sum / static_cast<double>(free_count);
    } else {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        for (long i = 0; i < l; ++i) {
            if (alpha[i] >= c_bound - eps_b) lo = std::max(lo, g[i]);
            if (alpha[i] <= eps_b) hi = std::min(hi, g[i]);
        }
        if (std::isinf(lo)) sol.rho = hi;
        else if (std::isinf(hi)) sol.rho = lo;
        else sol.rho = 0.5 * (lo + hi);
    }
    return sol;
}

// Simple LRU cache of kernel columns for training sets too large for a
// dense Gram matrix.
class ColumnCache {
public:
    ColumnCache(const Eigen::MatrixXd& x, double gamma, std::size_t capacity)
        : x_(x), gamma_(gamma), capacity_(capacity) {
        norms_ = x.rowwise().squaredNorm();
    }

    const Eigen::VectorXd& col(long i) {
        auto it = map_.find(i);
        if (it != map_.end()) {
            order_.splice(order_.begin(), order_, it->second.second);
            return it->second.first;
        }
        if (map_.size() >= capacity_) {
            map_.erase(order_.back());
            order_.pop_back();
        }
        Eigen::VectorXd c =
            (-(gamma_ * (norms_.array() - 2.0 * (x_ * x_.row(i).transpose()).array() +
                         norms_[i])))
                .exp();
        order_.push_front(i);
        auto pos = map_.emplace(i, std::make_pair(std::move(c), order_.begin())).first;
        return pos->second.first;
    }

private:
    const Eigen::MatrixXd& x_;
    double gamma_;
    std::size_t capacity_;
    Eigen::VectorXd norms_;
    std::list<long> order_;
    std::unordered_map<long, std::pair<Eigen::VectorXd, std::list<long>::iterator>> map_;
};

constexpr long kDenseGramLimit = 20'000;

Eigen::MatrixXd stack_features(const std::vector<Window>& windows) {
    if (windows.empty()) throw DataError("svm: no windows");
    const long l = static_cast<long>(windows.size());
    const long d = windows[0].features.size();
    Eigen::MatrixXd x(l, d);
    for (long i = 0; i < l; ++i) {
        if (windows[static_cast<std::size_t>(i)].features.size() != d)
            throw DataError("svm: inconsistent window feature dimensions");
        x.row(i) = windows[static_cast<std::size_t>(i)].features.transpose();
    }
    return x;
}

SvmModel finish_model(const SvmConfig& config, double gamma, const Eigen::MatrixXd& x,
                      const DualSolution& sol) {
    const long l = x.rows();
    const double eps_sv = 1e-12 / (config.nu * static_cast<double>(l));
    std::vector<long> sv;
    for (long i = 0; i < l; ++i)
        if (sol.alpha[i] > eps_sv) sv.push_back(i);
    SvmModel model;
    model.gamma = gamma;
    model.w = config.w;
    model.encoding = config.encoding;
    model.rho = sol.rho;
    model.support_vectors.resize(static_cast<long>(sv.size()), x.cols());
    model.alphas.resize(static_cast<long>(sv.size()));
    for (std::size_t i = 0; i < sv.size(); ++i) {
        model.support_vectors.row(static_cast<long>(i)) = x.row(sv[i]);
        model.alphas[static_cast<long>(i)] = sol.alpha[sv[i]];
    }
    return model;
}

}  // namespace

DualSolution solve_one_class_dual(const Eigen::MatrixXd& gram, double nu, double tol,
                                  long max_iter) {
    if (gram.rows() != gram.cols()) throw DataError("svm solver: Gram must be square");
    return solve_dual_impl(
        gram.rows(),
        [&gram](long i) -> const Eigen::VectorXd& {
            static thread_local Eigen::VectorXd buf;
            buf = gram.col(i);
            return buf;
        },
        nu, tol, max_iter);
}

SvmModel train_svm_gram(const SvmConfig& config, const std::vector<Window>& windows,
                        const Eigen::MatrixXd& gram) {
    config.validate();
    for (const auto& win : windows)
        if (win.abnormal) throw DataError("train_svm: abnormal window in training set");
    const Eigen::MatrixXd x = stack_features(windows);
    const double gamma =
        config.gamma > 0.0 ? config.gamma : 1.0 / static_cast<double>(x.cols());
    DualSolution sol = solve_dual_impl(
        gram.rows(),
        [&gram](long i) -> const Eigen::VectorXd& {
            static thread_local Eigen::VectorXd buf;
            buf = gram.col(i);
            return buf;
        },
        config.nu, config.solver_tol, config.max_iter);
    return finish_model(config, gamma, x, sol);
}

SvmModel train_svm(const SvmConfig& config, const std::vector<Window>& windows) {
    config.validate();
    for (const auto& win : windows)
        if (win.abnormal) throw DataError("train_svm: abnormal window in training set");
    const Eigen::MatrixXd x = stack_features(windows);
    const long l = x.rows();
    const double gamma =
        config.gamma > 0.0 ? config.gamma : 1.0 / static_cast<double>(x.cols());

    DualSolution sol;
    if (l <= kDenseGramLimit) {
        const Eigen::VectorXd norms = x.rowwise().squaredNorm();
        Eigen::MatrixXd gram =
            (-(gamma * ((norms.replicate(1, l) + norms.transpose().replicate(l, 1)) -
                        2.0 * (x * x.transpose()))))
                .array()
                .exp();
        sol = solve_dual_impl(
            l,
            [&gram](long i) -> const Eigen::VectorXd& {
                static thread_local Eigen::VectorXd buf;
                buf = gram.col(i);
                return buf;
            },
            config.nu, config.solver_tol, config.max_iter);
    } else {
        ColumnCache cache(x, gamma, 512);
        sol = solve_dual_impl(
            l, [&cache](long i) -> const Eigen::VectorXd& { return cache.col(i); },
            config.nu, config.solver_tol, config.max_iter);
    }
    return finish_model(config, gamma, x, sol);
}

double SvmModel::decision_value(const Eigen::VectorXd& x) const {
    if (x.size() != support_vectors.cols())
        throw DataError("predict: feature dimension " + std::to_string(x.size()) +
                        " does not match model dimension " +
                        std::to_string(support_vectors.cols()));
    const Eigen::VectorXd d2 =
        (support_vectors.rowwise() - x.transpose()).rowwise().squaredNorm();
    return alphas.dot((-gamma * d2.array()).exp().matrix()) - rho;
}

std::vector<SvmPrediction> predict(const SvmModel& model,
                                   const std::vector<Window>& windows) {
    std::vector<SvmPrediction> out;
    out.reserve(windows.size());
    for (const auto& win : windows) {
        SvmPrediction p;
        p.start_index = win.start_index;
        p.decision_value = model.decision_value(win.features);
        p.verdict = p.decision_value >= 0.0 ? Verdict::Normal : Verdict::Abnormal;
        out.push_back(p);
    }
    return out;
}

namespace {
constexpr char kSvmMagic[9] = "WTADSVM1";
}

void save_svm(const SvmModel& model, const std::filesystem::path& path,
              const std::string& created_stamp) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write model '" + path.string() + "'");
    nlohmann::json header;
    header["version"] = 1;
    header["created"] = created_stamp;
    header["gamma"] = model.gamma;
    header["rho"] = model.rho;
    header["w"] = model.w;
    header["encoding"] = model.encoding == ActuatorEncoding::OneHot ? "one-hot" : "ordinal";
    header["sv_count"] = model.support_vectors.rows();
    header["dim"] = model.support_vectors.cols();
    const std::string hs = header.dump();
    out.write(kSvmMagic, 8);
    const std::uint32_t hlen = static_cast<std::uint32_t>(hs.size());
    out.write(reinterpret_cast<const char*>(&hlen), 4);
    out.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    out.write(reinterpret_cast<const char*>(model.alphas.data()),
              static_cast<std::streamsize>(sizeof(double) * model.alphas.size()));
    out.write(reinterpret_cast<const char*>(model.support_vectors.data()),
              static_cast<std::streamsize>(sizeof(double) * model.support_vectors.size()));
    if (!out) throw DataError("I/O error writing model '" + path.string() + "'");
}

SvmModel load_svm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model '" + path.string() + "'");
    char magic[8];
    in.read(magic, 8);
    if (!in || std::memcmp(magic, kSvmMagic, 8) != 0)
        throw DataError("'" + path.string() + "' is not an svm model file");
    std::uint32_t hlen = 0;
    in.read(reinterpret_cast<char*>(&hlen), 4);
    if (!in || hlen > (1u << 20)) throw DataError("svm model header corrupted");
    std::string hs(hlen, '\0');
    in.read(hs.data(), hlen);
    if (!in) throw DataError("svm model header corrupted");
    SvmModel model;
    long sv_count = 0, dim = 0;
    try {
        const nlohmann::json header = nlohmann::json::parse(hs);
        if (header.at("version").get<int>() != 1)
            throw DataError("unsupported svm model version");
        model.gamma = header.at("gamma").get<double>();
        model.rho = header.at("rho").get<double>();
        model.w = header.at("w").get<int>();
        model.encoding = header.at("encoding").get<std::string>() == "ordinal"
                             ? ActuatorEncoding::Ordinal
                             : ActuatorEncoding::OneHot;
        sv_count = header.at("sv_count").get<long>();
        dim = header.at("dim").get<long>();
    } catch (const nlohmann::json::exception& e) {
        throw DataError("svm model header corrupted: " + std::string(e.what()));
    }
    if (sv_count < 0 || dim < 0) throw DataError("svm model header inconsistent");
    model.alphas.resize(sv_count);
    model.support_vectors.resize(sv_count, dim);
    in.read(reinterpret_cast<char*>(model.alphas.data()),
            static_cast<std::streamsize>(sizeof(double) * sv_count));
    in.read(reinterpret_cast<char*>(model.support_vectors.data()),
            static_cast<std::streamsize>(sizeof(double) * sv_count * dim));
    if (!in) throw DataError("svm model truncated or corrupted");
    return model;
}

}  // namespace wtad
