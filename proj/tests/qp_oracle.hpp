// Brute-force oracle for the one-class dual QP
//   min 1/2 a' Q a   s.t.  sum a = 1,  0 <= a_i <= C = 1/(nu*l).
// Enumerates every active-set partition (zero / free / at-bound), solves
// the KKT equality system for the free block, and keeps the feasible
// stationary point with the lowest objective. Exponential in l; intended
// for l <= 9 with bounds allowed, or l <= 15 when nu*l < 1 (then no
// variable can reach the bound, so only zero/free partitions exist).
#ifndef WTAD_TESTS_QP_ORACLE_HPP
#define WTAD_TESTS_QP_ORACLE_HPP

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

namespace wtad_test {

struct OracleResult {
    Eigen::VectorXd alpha;
    double lambda = 0.0;  // equality multiplier; equals rho at the optimum
    double objective = std::numeric_limits<double>::infinity();
    bool found = false;
};

inline OracleResult brute_force_one_class_dual(const Eigen::MatrixXd& q, double nu) {
    const long l = q.rows();
    const double c = 1.0 / (nu * static_cast<double>(l));
    const bool allow_upper = c <= 1.0 + 1e-12;  // otherwise the bound is slack
    const double tol = 1e-8;

    OracleResult best;
    std::vector<int> state(static_cast<std::size_t>(l), 0);  // 0 zero, 1 free, 2 upper
    const int radix = allow_upper ? 3 : 2;

    while (true) {
        std::vector<long> free_set, upper_set;
        for (long i = 0; i < l; ++i) {
            if (state[static_cast<std::size_t>(i)] == 1) free_set.push_back(i);
            if (state[static_cast<std::size_t>(i)] == 2) upper_set.push_back(i);
        }
        const double upper_mass = c * static_cast<double>(upper_set.size());
        const long nf = static_cast<long>(free_set.size());

        if (upper_mass <= 1.0 + tol) {
            Eigen::VectorXd alpha = Eigen::VectorXd::Zero(l);
            for (long i : upper_set) alpha[i] = c;
            bool ok = true;
            double lambda = 0.0;
            if (nf == 0) {
                ok = std::abs(upper_mass - 1.0) <= tol;
            } else {
                // [ Q_FF  -1 ] [alpha_F]   [ -Q_FU * c * 1 ]
                // [ 1'     0 ] [lambda ] = [ 1 - c*|U|     ]
                Eigen::MatrixXd sys(nf + 1, nf + 1);
                Eigen::VectorXd rhs(nf + 1);
                for (long r = 0; r < nf; ++r) {
                    for (long s = 0; s < nf; ++s) sys(r, s) = q(free_set[r], free_set[s]);
                    sys(r, nf) = -1.0;
                    sys(nf, r) = 1.0;
                    double cross = 0.0;
                    for (long u : upper_set) cross += q(free_set[r], u);
                    rhs[r] = -c * cross;
                }
                sys(nf, nf) = 0.0;
                rhs[nf] = 1.0 - upper_mass;
                const Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);
                if ((sys * sol - rhs).norm() > 1e-7) {
                    ok = false;  // singular system: no stationary point here
                } else {
                    for (long r = 0; r < nf; ++r) {
                        alpha[free_set[r]] = sol[r];
                        if (sol[r] < -tol || sol[r] > c + tol) ok = false;
                    }
                    lambda = sol[nf];
                }
            }
            if (ok) {
                const Eigen::VectorXd g = q * alpha;
                if (nf == 0 && !upper_set.empty()) {
                    // Any lambda >= max_U g works; pick the loosest.
                    lambda = -std::numeric_limits<double>::infinity();
                    for (long u : upper_set) lambda = std::max(lambda, g[u]);
                }
                for (long i = 0; i < l && ok; ++i) {
                    if (state[static_cast<std::size_t>(i)] == 0 && g[i] < lambda - 1e-6)
                        ok = false;
                    if (state[static_cast<std::size_t>(i)] == 2 && g[i] > lambda + 1e-6)
                        ok = false;
                }
                if (ok) {
                    const double obj = 0.5 * alpha.dot(g);
                    if (obj < best.objective) {
                        best.alpha = alpha;
                        best.lambda = lambda;
                        best.objective = obj;
                        best.found = true;
                    }
                }
            }
        }

        // Next ternary/binary assignment.
        long pos = 0;
        while (pos < l) {
            if (++state[static_cast<std::size_t>(pos)] < radix) break;
            state[static_cast<std::size_t>(pos)] = 0;
            ++pos;
        }
        if (pos == l) break;
    }
    return best;
}

}  // namespace wtad_test

#endif
