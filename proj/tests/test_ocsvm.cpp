#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "qp_oracle.hpp"
#include "wtad/errors.hpp"
#include "wtad/ocsvm.hpp"
#include "wtad/plant.hpp"
#include "wtad/rng.hpp"

using namespace wtad;
namespace fs = std::filesystem;

namespace {

std::vector<Window> gaussian_windows(long l, int dim, Rng& rng) {
    std::vector<Window> windows(static_cast<std::size_t>(l));
    for (long i = 0; i < l; ++i) {
        windows[static_cast<std::size_t>(i)].start_index = i;
        windows[static_cast<std::size_t>(i)].features = Eigen::VectorXd::NullaryExpr(
            dim, [&rng](Eigen::Index) { return rng.gaussian(0.0, 1.0); });
    }
    return windows;
}

Eigen::MatrixXd gram_of(const std::vector<Window>& windows, double gamma) {
    const long l = static_cast<long>(windows.size());
    Eigen::MatrixXd gram(l, l);
    for (long i = 0; i < l; ++i)
        for (long j = 0; j <= i; ++j) {
            const double k = rbf_kernel(windows[static_cast<std::size_t>(i)].features,
                                        windows[static_cast<std::size_t>(j)].features,
                                        gamma);
            gram(i, j) = k;
            gram(j, i) = k;
        }
    return gram;
}

}  // namespace

TEST_CASE("extract_windows: count, labels, feature layout") {
    PlantConfig cfg = default_plant_config();
    cfg.tick_count = 60;
    AttackSpec atk{3, 20, 25, {{"LIT101", AttackMode::ConstantSpoof, 700.0}}};
    const Log log = simulate(cfg, {atk});

    for (int w : {1, 2, 4, 7}) {
        const auto windows = extract_windows(log, w);
        CHECK(windows.size() == log.size() - static_cast<std::size_t>(w) + 1);
        // One-hot layout: arity_sum + sensors per entry, times w.
        const int per_entry = log.schema.arity_sum() + log.schema.sensor_count();
        CHECK(windows[0].features.size() == per_entry * w);
        // Any-abnormal labeling: window abnormal iff it overlaps [20, 25).
        for (const auto& win : windows) {
            const bool overlaps = win.start_index + w > 20 && win.start_index < 25;
            CHECK(win.abnormal == overlaps);
            if (overlaps) CHECK(win.attack_ids == std::vector<int>{3});
        }
    }

    // Ordinal encoding: one value per actuator instead of a one-hot block.
    const auto ordinal = extract_windows(log, 2, ActuatorEncoding::Ordinal);
    const int per_entry =
        log.schema.actuator_count() + log.schema.sensor_count();
    CHECK(ordinal[0].features.size() == per_entry * 2);

    // One-hot block of the first entry: each actuator contributes one 1.
    const auto onehot = extract_windows(log, 1);
    double block_sum = 0.0;
    for (int i = 0; i < log.schema.arity_sum(); ++i) block_sum += onehot[0].features[i];
    CHECK(block_sum == doctest::Approx(log.schema.actuator_count()));

    CHECK_THROWS_AS(extract_windows(log, 61), DataError);
    CHECK_THROWS_AS(extract_windows(log, 0), DataError);
}

TEST_CASE("rbf kernel closed forms") {
    Eigen::VectorXd x(2), y(2);
    x << 0.0, 0.0;
    y << 1.0, 2.0;
    CHECK(rbf_kernel(x, x, 0.7) == 1.0);
    CHECK(rbf_kernel(x, y, 0.5) == doctest::Approx(std::exp(-2.5)).epsilon(1e-12));
    CHECK(rbf_kernel(x, y, 0.5) == rbf_kernel(y, x, 0.5));
    Eigen::VectorXd z(3);
    CHECK_THROWS_AS(rbf_kernel(x, z, 1.0), DataError);
}

TEST_CASE("gram matrices are positive semidefinite") {
    Rng rng(17);
    const auto windows = gaussian_windows(40, 5, rng);
    for (double gamma : {0.01, 0.3, 2.0}) {
        const Eigen::MatrixXd gram = gram_of(windows, gamma);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
    }
}

TEST_CASE("working-set solver matches the brute-force oracle") {
    Rng rng(4242);
    int checked = 0;
    for (int trial = 0; trial < 50; ++trial) {
        long l;
        double nu;
        if (trial % 2 == 0) {
            // Small instances: full zero/free/upper enumeration.
            l = 4 + static_cast<long>(rng.uniform_int(6));  // 4..9
            nu = 0.15 + 0.7 * rng.uniform();
        } else {
            // Larger instances with nu*l < 1: the bound is slack.
            l = 10 + static_cast<long>(rng.uniform_int(3));  // 10..12
            nu = (0.2 + 0.7 * rng.uniform()) / static_cast<double>(l);
        }
        const int dim = 2 + static_cast<int>(rng.uniform_int(3));
        const double gamma = 0.05 + rng.uniform();
        const auto windows = gaussian_windows(l, dim, rng);
        const Eigen::MatrixXd gram = gram_of(windows, gamma);

        const DualSolution sol = solve_one_class_dual(gram, nu, 1e-9, 1'000'000);
        const auto oracle = wtad_test::brute_force_one_class_dual(gram, nu);
        REQUIRE(oracle.found);
        CHECK(std::abs(sol.objective - oracle.objective) <= 1e-6);

        // Verdict agreement on the training windows themselves.
        const Eigen::VectorXd f_solver =
            gram * sol.alpha - Eigen::VectorXd::Constant(l, sol.rho);
        const Eigen::VectorXd f_oracle =
            gram * oracle.alpha - Eigen::VectorXd::Constant(l, oracle.lambda);
        for (long i = 0; i < l; ++i) {
            if (std::abs(f_oracle[i]) < 1e-7) continue;  // margin SVs sit at 0
            CHECK((f_solver[i] >= 0.0) == (f_oracle[i] >= 0.0));
        }
        ++checked;
    }
    CHECK(checked == 50);
}

TEST_CASE("nu bounds outliers and lower-bounds support vectors") {
    Rng rng(314);
    const long l = 500;
    auto windows = gaussian_windows(l, 2, rng);
    for (double nu : {0.01, 0.1, 0.5}) {
        SvmConfig cfg;
        cfg.w = 1;
        cfg.nu = nu;
        cfg.gamma = 0.5;
        const SvmModel model = train_svm(cfg, windows);
        const auto preds = predict(model, windows);
        long outliers = 0;
        for (const auto& p : preds)
            if (p.verdict == Verdict::Abnormal) ++outliers;
        const double outlier_frac = static_cast<double>(outliers) / static_cast<double>(l);
        const double sv_frac =
            static_cast<double>(model.alphas.size()) / static_cast<double>(l);
        CHECK(outlier_frac <= nu + 0.05);
        CHECK(sv_frac >= nu - 0.05);
    }
}

TEST_CASE("identical training windows classify themselves as normal") {
    std::vector<Window> windows(10);
    for (auto& w : windows) w.features = Eigen::VectorXd::Constant(3, 1.5);
    SvmConfig cfg;
    cfg.w = 1;
    cfg.nu = 0.5;
    cfg.gamma = 1.0;
    const SvmModel model = train_svm(cfg, windows);
    const auto preds = predict(model, windows);
    for (const auto& p : preds) {
        CHECK(std::abs(p.decision_value) < 1e-9);  // f = 0: the tie case
        CHECK(p.verdict == Verdict::Normal);       // ties resolve Normal
    }
}

TEST_CASE("a far point scores approximately -rho") {
    Rng rng(77);
    const auto windows = gaussian_windows(60, 3, rng);
    SvmConfig cfg;
    cfg.w = 1;
    cfg.nu = 0.2;
    cfg.gamma = 0.8;
    const SvmModel model = train_svm(cfg, windows);
    const Eigen::VectorXd far = Eigen::VectorXd::Constant(3, 1e4);
    CHECK(model.decision_value(far) == doctest::Approx(-model.rho).epsilon(1e-12));
    CHECK(model.rho > 0.0);
}

TEST_CASE("training rejects abnormal windows and bad configs") {
    Rng rng(5);
    auto windows = gaussian_windows(20, 2, rng);
    windows[3].abnormal = true;
    SvmConfig cfg;
    CHECK_THROWS_AS(train_svm(cfg, windows), DataError);

    windows[3].abnormal = false;
    SUBCASE("nu out of range") {
        cfg.nu = 0.0;
        CHECK_THROWS_AS(train_svm(cfg, windows), DataError);
        cfg.nu = 1.5;
        CHECK_THROWS_AS(train_svm(cfg, windows), DataError);
    }
    SUBCASE("bad tolerance") {
        cfg.solver_tol = 0.0;
        CHECK_THROWS_AS(train_svm(cfg, windows), DataError);
    }
    SUBCASE("iteration budget exhausted") {
        cfg.nu = 0.5;
        cfg.max_iter = 1;
        cfg.solver_tol = 1e-12;
        CHECK_THROWS_AS(train_svm(cfg, windows), NumericalError);
    }
}

TEST_CASE("default gamma is 1/d") {
    Rng rng(6);
    const auto windows = gaussian_windows(30, 5, rng);
    SvmConfig cfg;
    cfg.w = 1;
    cfg.nu = 0.3;
    cfg.gamma = -1.0;
    const SvmModel model = train_svm(cfg, windows);
    CHECK(model.gamma == doctest::Approx(1.0 / 5.0));
}

TEST_CASE("train_svm_gram agrees with train_svm") {
    Rng rng(8);
    const auto windows = gaussian_windows(50, 3, rng);
    SvmConfig cfg;
    cfg.w = 1;
    cfg.nu = 0.25;
    cfg.gamma = 0.4;
    const SvmModel a = train_svm(cfg, windows);
    const SvmModel b = train_svm_gram(cfg, windows, gram_of(windows, cfg.gamma));
    CHECK(a.rho == doctest::Approx(b.rho).epsilon(1e-9));
    CHECK(a.alphas.size() == b.alphas.size());
    Rng rng2(9);
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(
            3, [&rng2](Eigen::Index) { return rng2.gaussian(0.0, 2.0); });
        CHECK(a.decision_value(x) == doctest::Approx(b.decision_value(x)).epsilon(1e-9));
    }
}

TEST_CASE("model save/load round-trip and corruption handling") {
    Rng rng(21);
    const auto windows = gaussian_windows(40, 4, rng);
    SvmConfig cfg;
    cfg.w = 1;
    cfg.nu = 0.2;
    const SvmModel model = train_svm(cfg, windows);
    const fs::path path = fs::temp_directory_path() / "wtad_test_svm.model";
    save_svm(model, path, "test-stamp");
    const SvmModel back = load_svm(path);
    CHECK(back.rho == model.rho);
    CHECK(back.gamma == model.gamma);
    CHECK(back.w == model.w);
    CHECK(back.alphas == model.alphas);
    CHECK(back.support_vectors == model.support_vectors);

    SUBCASE("truncated file") {
        const auto size = fs::file_size(path);
        fs::resize_file(path, size / 2);
        CHECK_THROWS_AS(load_svm(path), DataError);
    }
    SUBCASE("wrong magic") {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.write("NOTAMODL", 8);
        f.close();
        CHECK_THROWS_AS(load_svm(path), DataError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_svm(path.string() + ".nope"), DataError);
    }
    fs::remove(path);
}

TEST_CASE("predict checks feature dimensions") {
    Rng rng(31);
    const auto windows = gaussian_windows(20, 3, rng);
    SvmConfig cfg;
    cfg.w = 1;
    cfg.nu = 0.3;
    const SvmModel model = train_svm(cfg, windows);
    CHECK_THROWS_AS(model.decision_value(Eigen::VectorXd::Zero(7)), DataError);
}
